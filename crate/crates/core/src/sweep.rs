//! Grid sweeps over [`Settings`], figure presets and CSV output.
//!
//! Grid points are independent and evaluated in parallel; rows are always
//! gathered in grid order (last axis fastest), so the table does not depend
//! on the number of workers.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AxisSpec, Settings};
use crate::protocol::{run_ghz_protocol, single_pulse_excitation, stirap_transfer_populations, TRACK_NAMES};
use crate::{Error, Result};

/// Half-width of the fig2 window in units of the control pulse width.
pub const SINGLE_PULSE_HALF_SPAN: f64 = 8.0;
/// Margin beyond the STIRAP pulse centres for bare-ensemble runs.
pub const STIRAP_EDGE: f64 = 6.0;

pub const FIGURE_IDS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `|c_R|²` after one control pulse.
    ControlExcitation,
    /// `|c_{g^N}|²` and `|c_{s^N}|²` after STIRAP on the bare ensemble.
    StirapTransfer,
    /// `|c_{s^N}|²` only.
    TransferS,
    /// GHZ fidelities and success probability of the full protocol.
    Fidelity,
    /// Tracked populations of a single protocol run.
    TimeSeries,
}

impl Observable {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
            Error::param(
                "observable",
                format!(
                    "unknown observable `{s}` (expected control_excitation, stirap_transfer, transfer_s, fidelity, time_series)"
                ),
            )
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::ControlExcitation => "control_excitation",
            Observable::StirapTransfer => "stirap_transfer",
            Observable::TransferS => "transfer_s",
            Observable::Fidelity => "fidelity",
            Observable::TimeSeries => "time_series",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Observable::ControlExcitation => &["pop_R"],
            Observable::StirapTransfer => &["pop_gN", "pop_sN"],
            Observable::TransferS => &["pop_sN"],
            Observable::Fidelity => &[
                "fidelity_raw",
                "fidelity_phase_optimized",
                "success_probability",
                "optimal_phase",
                "fidelity_root",
            ],
            Observable::TimeSeries => &TRACK_NAMES,
        }
    }
}

/// One linear axis; `count = 1` gives the single value `min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Keys accepted as axis parameters besides the numeric settings keys.
const AXIS_ALIASES: [&str; 1] = ["gamma"];

impl Axis {
    pub fn new(param: &str, min: f64, max: f64, count: usize) -> Self {
        Self {
            param: param.to_string(),
            min,
            max,
            count,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }

    /// CSV column name of the axis.
    pub fn column(&self) -> String {
        match self.param.as_str() {
            "n_atoms" => "N".to_string(),
            p => format!("{p}_T"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::param(&self.param, "axis needs at least one point"));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::param(&self.param, "axis bounds must be finite"));
        }
        if AXIS_ALIASES.contains(&self.param.as_str()) {
            return Ok(());
        }
        let mut probe = Settings::default();
        probe
            .set_number(&self.param, self.min.abs().round())
            .map_err(|_| Error::param(&self.param, "not a numeric configuration key"))?;
        Ok(())
    }
}

impl From<&AxisSpec> for Axis {
    fn from(a: &AxisSpec) -> Self {
        Axis::new(&a.param, a.min, a.max, a.count)
    }
}

/// Settings applied to grid points with a given atom number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NOverride {
    pub n_atoms: usize,
    pub values: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub id: String,
    pub axes: Vec<Axis>,
    pub template: Settings,
    pub per_n: Vec<NOverride>,
    pub observable: Observable,
}

impl SweepSpec {
    pub fn new(id: &str, observable: Observable, template: Settings) -> Self {
        Self {
            id: id.to_string(),
            axes: Vec::new(),
            template,
            per_n: Vec::new(),
            observable,
        }
    }

    /// Builds a custom sweep from a config file's `[sweep]` section.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let section = settings
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
        let observable = match &section.observable {
            Some(o) => Observable::parse(o)?,
            None => Observable::Fidelity,
        };
        let mut template = settings.clone();
        template.sweep = None;
        let mut spec = SweepSpec::new("custom", observable, template);
        spec.axes = section.axes.iter().map(Axis::from).collect();
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_axis(mut self, param: &str, min: f64, max: f64, count: usize) -> Self {
        self.axes.push(Axis::new(param, min, max, count));
        self
    }

    fn with_n(mut self, n_atoms: usize, values: &[(&str, f64)]) -> Self {
        self.per_n.push(NOverride {
            n_atoms,
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
        self
    }

    /// Applies `key=value` overrides to the template. An overridden key also
    /// wins over the per-N presets.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        self.template.apply_overrides(overrides)?;
        for o in overrides {
            if let Some((k, _)) = o.as_ref().split_once('=') {
                let k = k.trim();
                for n in &mut self.per_n {
                    n.values
                        .retain(|(key, _)| key != k && !(key == "gamma" && k.starts_with("gamma_")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.observable == Observable::TimeSeries && !self.axes.is_empty() {
            return Err(Error::invalid("a time-series sweep takes no axes"));
        }
        for a in &self.axes {
            a.validate()?;
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of grid point `index`, last axis fastest.
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            let i = index % a.count;
            index /= a.count;
            out[k] = a.values()[i];
        }
        out
    }

    /// Settings of the grid point with the given axis values.
    pub fn settings_at(&self, values: &[f64]) -> Result<Settings> {
        let mut s = self.template.clone();
        let set = |s: &mut Settings| -> Result<()> {
            for (a, v) in self.axes.iter().zip(values) {
                s.set_number(&a.param, *v)?;
            }
            Ok(())
        };
        set(&mut s)?;
        if let Some(o) = self.per_n.iter().find(|o| o.n_atoms == s.n_atoms) {
            for (k, v) in &o.values {
                if !self.axes.iter().any(|a| &a.param == k) {
                    s.set_number(k, *v)?;
                }
            }
        }
        Ok(s)
    }

    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<String> = if self.observable == Observable::TimeSeries {
            vec!["t_over_T".to_string()]
        } else {
            self.axes.iter().map(Axis::column).collect()
        };
        c.extend(self.observable.columns().iter().map(|s| s.to_string()));
        c
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("experiment".to_string(), self.id.clone()),
            ("observable".to_string(), self.observable.name().to_string()),
            ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("settings".to_string(), self.template.to_json_string()),
        ];
        if !self.axes.is_empty() {
            m.push((
                "axes".to_string(),
                serde_json::to_string(&self.axes).expect("axes serialise"),
            ));
        }
        if !self.per_n.is_empty() {
            m.push((
                "per_n".to_string(),
                serde_json::to_string(&self.per_n).expect("overrides serialise"),
            ));
        }
        m
    }
}

/// Evaluates the observable of one grid point.
pub fn evaluate(observable: Observable, s: &Settings) -> Result<Vec<f64>> {
    let mut s = s.clone();
    // only the final state is needed
    s.samples = 2;
    match observable {
        Observable::ControlExcitation => {
            let c = s.control()?;
            let p = single_pulse_excitation(
                c.omega_c0,
                c.t_c,
                c.delta_r,
                SINGLE_PULSE_HALF_SPAN * c.t_c,
                &s.solver(),
            )?;
            Ok(vec![p])
        }
        Observable::StirapTransfer | Observable::TransferS => {
            let t = s.target()?;
            let edge = 0.5 * t.stirap.tau + STIRAP_EDGE;
            let span = (s.t_start.unwrap_or(-edge), s.t_end.unwrap_or(edge));
            let (g, sn) = stirap_transfer_populations(&t, s.gamma_target, span, &s.solver())?;
            Ok(if observable == Observable::TransferS {
                vec![sn]
            } else {
                vec![g, sn]
            })
        }
        Observable::Fidelity => {
            let (_, out) = run_ghz_protocol(&s.to_protocol_config()?)?;
            Ok(vec![
                out.fidelity_raw,
                out.fidelity_phase_optimized,
                out.success_probability,
                out.optimal_phase,
                out.fidelity_root(),
            ])
        }
        Observable::TimeSeries => Err(Error::invalid("time series are not grid observables")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
    /// One entry per failed grid point.
    pub errors: Vec<String>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::param("jobs", "must be >= 1"));
        }
        b = b.num_threads(j);
    }
    b.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// Runs every grid point on `jobs` workers (all cores when `None`).
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    if spec.observable == Observable::TimeSeries {
        return run_time_series(spec).map(|(series, _)| series);
    }
    let start = Instant::now();
    let n = spec.len();
    let width = spec.observable.columns().len();
    let outcomes: Vec<(Vec<f64>, Option<String>)> = pool(jobs)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let point = spec.point(i);
                let res = spec.settings_at(&point).and_then(|s| evaluate(spec.observable, &s));
                match res {
                    Ok(v) => (point.into_iter().chain(v).collect(), None),
                    Err(e) => {
                        let msg = format!("row {i} at {point:?}: {e}");
                        (
                            point.into_iter().chain(std::iter::repeat_n(f64::NAN, width)).collect(),
                            Some(msg),
                        )
                    }
                }
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(n);
    let mut errors = Vec::new();
    for (row, err) in outcomes {
        rows.push(row);
        errors.extend(err);
    }
    let mut metadata = spec.metadata();
    metadata.push(("failed_points".to_string(), errors.len().to_string()));
    metadata.push((
        "wall_time_s".to_string(),
        format!("{:.3}", start.elapsed().as_secs_f64()),
    ));
    Ok(SweepResult {
        columns: spec.columns(),
        rows,
        metadata,
        errors,
    })
}

/// Runs a single protocol and returns the population time series and a
/// one-row summary with the fidelities.
pub fn run_time_series(spec: &SweepSpec) -> Result<(SweepResult, SweepResult)> {
    let start = Instant::now();
    let s = spec.settings_at(&[])?;
    let cfg = s.to_protocol_config()?;
    let (traj, out) = run_ghz_protocol(&cfg)?;
    let rows = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            std::iter::once(*t)
                .chain(traj.tracks.iter().map(|tr| tr.values[i]))
                .collect()
        })
        .collect();
    let mut metadata = spec.metadata();
    metadata.push(("max_norm_drift".to_string(), format_g(traj.diagnostics.max_norm_drift)));
    metadata.push((
        "wall_time_s".to_string(),
        format!("{:.3}", start.elapsed().as_secs_f64()),
    ));
    let series = SweepResult {
        columns: spec.columns(),
        rows,
        metadata: metadata.clone(),
        errors: Vec::new(),
    };
    let summary = SweepResult {
        columns: [
            "fidelity_raw",
            "fidelity_phase_optimized",
            "success_probability",
            "optimal_phase",
            "fidelity_root",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows: vec![vec![
            out.fidelity_raw,
            out.fidelity_phase_optimized,
            out.success_probability,
            out.optimal_phase,
            out.fidelity_root(),
        ]],
        metadata,
        errors: Vec::new(),
    };
    Ok((series, summary))
}

/// Parameters and grid of a published figure.
pub fn figure_preset(id: &str) -> Result<SweepSpec> {
    let base = Settings::default();
    let spec = match id {
        "fig2" => SweepSpec::new(id, Observable::ControlExcitation, base)
            .with_axis("t_c", 0.1, 1.0, 2)
            .with_axis("delta_r", 0.0, 10.0, 101)
            .with_axis("omega_c0", 0.0, 20.0, 101),
        "fig3" => SweepSpec::new(id, Observable::StirapTransfer, base)
            .with_axis("n_atoms", 1.0, 5.0, 2)
            .with_axis("omega", 0.0, 10.0, 101)
            .with_axis("delta", 0.0, 10.0, 101),
        "fig4" => SweepSpec::new(id, Observable::TransferS, Settings { omega: 9.5, ..base })
            .with_axis("n_atoms", 1.0, 10.0, 10)
            .with_axis("gamma_r", 0.0, 0.1, 21),
        "fig5" => SweepSpec::new(id, Observable::TimeSeries, base),
        "fig6" => SweepSpec::new(id, Observable::Fidelity, base)
            .with_axis("n_atoms", 1.0, 5.0, 2)
            .with_axis("blockade", 0.0, 1000.0, 50)
            .with_n(1, &[("omega", 3.5)])
            .with_n(5, &[("omega", 5.0)]),
        "fig7" => SweepSpec::new(id, Observable::Fidelity, base)
            .with_axis("n_atoms", 1.0, 5.0, 2)
            .with_axis("gamma", 0.0, 0.01, 50)
            .with_n(1, &[("omega", 3.5), ("blockade", 200.0)])
            .with_n(5, &[("omega", 5.0), ("blockade", 500.0)]),
        other => {
            return Err(Error::invalid(format!(
                "unknown figure `{other}` (expected one of {})",
                FIGURE_IDS.join(", ")
            )))
        }
    };
    Ok(spec)
}

/// `%.15g`-style rendering.
pub fn format_g(x: f64) -> String {
    const DIGITS: i32 = 15;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x))
    }
}

/// CSV text: `# key: value` preamble, header, rows; LF line endings.
pub fn to_csv_string(result: &SweepResult) -> String {
    let mut out = String::new();
    for (k, v) in &result.metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    for e in &result.errors {
        let _ = writeln!(out, "# error: {e}");
    }
    out.push_str(&result.columns.join(","));
    out.push('\n');
    for row in &result.rows {
        let cells: Vec<String> = row.iter().map(|x| format_g(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Everything after the `#` preamble.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, to_csv_string(result)).map_err(io)
}

pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut metadata = Vec::new();
    let mut errors = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once(": ").unwrap_or((rest, ""));
            if k == "error" {
                errors.push(v.to_string());
            } else {
                metadata.push((k.to_string(), v.to_string()));
            }
        } else if columns.is_none() {
            columns = Some(line.split(',').map(str::to_string).collect());
        } else if !line.is_empty() {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Csv(format!("line {}: {e}", n + 1)))?;
            if row.len() != columns.as_ref().map_or(0, Vec::len) {
                return Err(Error::Csv(format!("line {}: wrong number of cells", n + 1)));
            }
            rows.push(row);
        }
    }
    Ok(SweepResult {
        columns: columns.ok_or_else(|| Error::Csv("missing header".into()))?,
        rows,
        metadata,
        errors,
    })
}

pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(format_g(0.0), "0");
        assert_eq!(format_g(1.0), "1");
        assert_eq!(format_g(-2.5), "-2.5");
        assert_eq!(format_g(0.1), "0.1");
        assert_eq!(format_g(1e-5), "1e-05");
        assert_eq!(format_g(123456789012345.0), "123456789012345");
        assert_eq!(format_g(1234567890123456.0), "1.23456789012346e+15");
        assert_eq!(format_g(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_g(0.0001), "0.0001");
        assert_eq!(format_g(f64::NAN), "nan");
        assert!("nan".parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn grid_order_last_axis_fastest() {
        let spec = SweepSpec::new("custom", Observable::TransferS, Settings::default())
            .with_axis("n_atoms", 1.0, 2.0, 2)
            .with_axis("omega", 0.0, 1.0, 3);
        assert_eq!(spec.len(), 6);
        assert_eq!(spec.point(0), vec![1.0, 0.0]);
        assert_eq!(spec.point(1), vec![1.0, 0.5]);
        assert_eq!(spec.point(3), vec![2.0, 0.0]);
        assert_eq!(spec.columns(), vec!["N", "omega_T", "pop_sN"]);
    }

    #[test]
    fn axis_values() {
        assert_eq!(Axis::new("omega", 2.0, 5.0, 1).values(), vec![2.0]);
        let v = Axis::new("blockade", 0.0, 1000.0, 50).values();
        assert_eq!(v.len(), 50);
        assert_eq!(v[49], 1000.0);
        assert!(Axis::new("nope", 0.0, 1.0, 2).validate().is_err());
        assert!(Axis::new("omega", 0.0, 1.0, 0).validate().is_err());
        assert!(Axis::new("gamma", 0.0, 1.0, 2).validate().is_ok());
    }

    #[test]
    fn presets() {
        for id in FIGURE_IDS {
            let s = figure_preset(id).unwrap();
            s.validate().unwrap();
            assert_eq!(s.template.tau, 1.4);
        }
        assert!(figure_preset("fig9").is_err());
        let f4 = figure_preset("fig4").unwrap();
        assert_eq!(f4.columns(), vec!["N", "gamma_r_T", "pop_sN"]);
        assert_eq!(f4.len(), 210);
        let f5 = figure_preset("fig5").unwrap();
        assert_eq!(f5.columns(), vec!["t_over_T", "p0g", "p0s", "p1g", "p1s"]);
        let s = f5.settings_at(&[]).unwrap();
        assert_eq!((s.omega, s.blockade, s.delta), (5.0, 500.0, 0.0));
        let f7 = figure_preset("fig7").unwrap();
        let s = f7.settings_at(&[1.0, 0.01]).unwrap();
        assert_eq!(
            (s.omega, s.blockade, s.gamma_control, s.gamma_target),
            (3.5, 200.0, 0.01, 0.01)
        );
        let s = f7.settings_at(&[5.0, 0.0]).unwrap();
        assert_eq!((s.omega, s.blockade), (5.0, 500.0));
    }

    #[test]
    fn overrides_beat_per_n_presets() {
        let mut f6 = figure_preset("fig6").unwrap();
        f6.apply_overrides(&["omega=4"]).unwrap();
        assert_eq!(f6.settings_at(&[1.0, 100.0]).unwrap().omega, 4.0);
    }

    #[test]
    fn failed_points_become_nan() {
        let spec = SweepSpec::new("custom", Observable::TransferS, Settings::default())
            .with_axis("tau", -1.0, 0.0, 2)
            .with_axis("omega", 0.0, 0.0, 1);
        let r = run_sweep(&spec, Some(1)).unwrap();
        assert!(r.rows[0][2].is_nan());
        assert_eq!(r.rows[1][2], 0.0);
        assert_eq!(r.errors.len(), 1);
        assert!(r.errors[0].contains("tau"));
    }

    #[test]
    fn csv_round_trip() {
        let r = SweepResult {
            columns: vec!["a".into(), "b".into()],
            rows: vec![vec![1.0 / 3.0, -2e-9], vec![f64::NAN, 12345.678]],
            metadata: vec![("experiment".into(), "custom".into())],
            errors: vec!["row 1: boom".into()],
        };
        let text = to_csv_string(&r);
        assert!(!text.contains('\r'));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back.columns, r.columns);
        assert_eq!(back.metadata, r.metadata);
        assert_eq!(back.errors, r.errors);
        assert!((back.rows[0][0] - r.rows[0][0]).abs() < 1e-15);
        assert_eq!(back.rows[0][1], -2e-9);
        assert!(back.rows[1][0].is_nan());
        assert_eq!(csv_body(&text), "a,b\n0.333333333333333,-2e-09\nnan,12345.678\n");
    }
}
