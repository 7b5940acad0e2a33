//! User-facing parameter sets.
//!
//! [`Settings`] is a flat, fully optional key/value view of one protocol run
//! that maps onto [`ProtocolConfig`]. It reads from TOML or JSON and accepts
//! `key=value` overrides. Unknown keys are rejected.
//!
//! Rabi frequencies given here follow `rabi_convention`. With `"full"` (the
//! default) a field of Rabi frequency `Ω` couples two levels with matrix
//! element `Ω`, the convention of the published figure captions; internally
//! every peak is doubled so the Hamiltonians can keep the `Ω/2` coupling.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Method, SolverOptions};
use crate::hamiltonian::{ControlParams, ProtocolConfig, TargetParams};
use crate::pulses::{pi_pulse_peak, StirapPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RabiConvention {
    /// Coupling matrix element `Ω`.
    Full,
    /// Coupling matrix element `Ω/2`.
    Half,
}

impl RabiConvention {
    /// Factor converting a user-facing peak into the internal `Ω/2` form.
    pub fn scale(self) -> f64 {
        match self {
            RabiConvention::Full => 2.0,
            RabiConvention::Half => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Dp45,
    Rk4,
}

/// Sweep axes embedded in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub axes: Vec<AxisSpec>,
    #[serde(default)]
    pub observable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub n_atoms: usize,
    pub omega: f64,
    pub delta: f64,
    pub tau: f64,
    /// Control pulse peak; calibrated to a π pulse of order `pi_order` when
    /// absent.
    pub omega_c0: Option<f64>,
    pub pi_order: u32,
    pub delta_r: f64,
    pub t_c: f64,
    /// Control pulse offset; `tau + 4(1 + t_c)` when absent.
    pub tau_c: Option<f64>,
    pub blockade: f64,
    #[serde(rename = "gamma_R")]
    pub gamma_control: f64,
    #[serde(rename = "gamma_r")]
    pub gamma_target: f64,
    pub rabi_convention: RabiConvention,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub samples: usize,
    pub method: MethodName,
    pub rk4_step: f64,
    pub max_steps: usize,
    pub check_positivity: bool,
    /// Dominance factor for the regime classifier.
    pub kappa: f64,
    /// Physical value of the time unit; metadata only.
    #[serde(rename = "T_microseconds")]
    pub t_microseconds: f64,
    pub sweep: Option<SweepSection>,
}

impl Default for Settings {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            n_atoms: 5,
            omega: 5.0,
            delta: 0.0,
            tau: 1.4,
            omega_c0: None,
            pi_order: 0,
            delta_r: 0.0,
            t_c: 0.1,
            tau_c: None,
            blockade: 500.0,
            gamma_control: 0.0,
            gamma_target: 0.0,
            rabi_convention: RabiConvention::Full,
            t_start: None,
            t_end: None,
            rtol: solver.rtol,
            atol: solver.atol,
            samples: solver.samples,
            method: MethodName::Dp45,
            rk4_step: 1e-3,
            max_steps: solver.max_steps,
            check_positivity: false,
            kappa: 2.0,
            t_microseconds: 1.0,
            sweep: None,
        }
    }
}

/// `(key, meaning)` for every scalar key, in file order.
pub const KEYS: &[(&str, &str)] = &[
    ("n_atoms", "number of ensemble atoms N"),
    ("omega", "STIRAP peak Rabi frequency"),
    ("delta", "ensemble Rydberg detuning"),
    ("tau", "STIRAP pulse separation"),
    ("omega_c0", "control pulse peak (default: π-pulse calibration)"),
    ("pi_order", "odd multiple 2p+1 of π/2 used for the calibration"),
    ("delta_r", "control Rydberg detuning"),
    ("t_c", "control pulse width"),
    ("tau_c", "control pulse offset (default: tau + 4(1 + t_c))"),
    ("blockade", "blockade shift Δ"),
    ("gamma_R", "control Rydberg decay rate"),
    ("gamma_r", "ensemble Rydberg decay rate (each channel)"),
    ("rabi_convention", "\"full\" (coupling Ω) or \"half\" (coupling Ω/2)"),
    (
        "t_start",
        "start of the time window (default: symmetric, covers all pulses)",
    ),
    ("t_end", "end of the time window (default: symmetric)"),
    ("rtol", "integrator relative tolerance"),
    ("atol", "integrator absolute tolerance"),
    ("samples", "number of uniform output samples"),
    ("method", "\"dp45\" (adaptive) or \"rk4\" (fixed step)"),
    ("rk4_step", "largest RK4 step"),
    ("max_steps", "integrator step budget"),
    ("check_positivity", "track the minimum eigenvalue of ρ"),
    ("kappa", "dominance factor for regime classification"),
    ("T_microseconds", "physical time unit, recorded in metadata only"),
];

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl Settings {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(config_error)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(config_error)
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(config_error)
    }

    /// Compact single-line JSON echo.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("settings always serialise")
    }

    /// Default value of `key` rendered for help text.
    pub fn default_display(key: &str) -> String {
        let table = toml::Table::try_from(Settings::default()).expect("settings always serialise");
        match table.get(key) {
            Some(v) => v.to_string(),
            None => "derived".to_string(),
        }
    }

    /// Applies one `key=value` assignment; the value uses TOML syntax, and
    /// bare words are taken as strings. `gamma` sets both decay rates.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config("empty key in override".into()));
        }
        if key == "gamma" {
            self.set("gamma_R", value)?;
            return self.set("gamma_r", value);
        }
        let parsed = format!("v = {}", value.trim())
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.trim().to_string()));
        let mut table = toml::Table::try_from(&*self).map_err(config_error)?;
        table.insert(key.to_string(), parsed);
        *self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("override `{key}`: {}", e.message())))?;
        Ok(())
    }

    /// Sets a numeric key; `gamma` sets both decay rates.
    pub fn set_number(&mut self, key: &str, value: f64) -> Result<()> {
        if key == "gamma" {
            self.gamma_control = value;
            self.gamma_target = value;
            return Ok(());
        }
        let literal = if matches!(key, "n_atoms" | "pi_order" | "samples" | "max_steps") {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::param(
                    key,
                    format!("expects a non-negative integer, got {value}"),
                ));
            }
            format!("{}", value as u64)
        } else {
            format!("{value:?}")
        };
        self.set(key, &literal)
    }

    /// Applies `key=value` strings in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not of the form key=value")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            rtol: self.rtol,
            atol: self.atol,
            samples: self.samples,
            method: match self.method {
                MethodName::Dp45 => Method::DormandPrince45,
                MethodName::Rk4 => Method::Rk4 {
                    max_step: self.rk4_step,
                },
            },
            max_steps: self.max_steps,
            check_positivity: self.check_positivity,
            dense_output: false,
        }
    }

    /// Internal STIRAP peak.
    pub fn omega_internal(&self) -> f64 {
        self.omega * self.rabi_convention.scale()
    }

    pub fn control(&self) -> Result<ControlParams> {
        let omega_c0 = match self.omega_c0 {
            Some(v) => v * self.rabi_convention.scale(),
            None => pi_pulse_peak(self.t_c, self.pi_order)
                .map_err(|_| Error::param("t_c", format!("must be finite and > 0, got {}", self.t_c)))?,
        };
        let c = ControlParams {
            omega_c0,
            delta_r: self.delta_r,
            t_c: self.t_c,
            tau_c: self.tau_c.unwrap_or(self.tau + 4.0 * (1.0 + self.t_c)),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn target(&self) -> Result<TargetParams> {
        if self.n_atoms == 0 {
            return Err(Error::param("n_atoms", "must be >= 1"));
        }
        let t = TargetParams {
            n_atoms: self.n_atoms,
            stirap: StirapPair::new(self.omega_internal(), self.tau)?,
            delta: self.delta,
        };
        t.validate()?;
        Ok(t)
    }

    /// Validated dimensionless configuration.
    pub fn to_protocol_config(&self) -> Result<ProtocolConfig> {
        if !(self.kappa > 0.0) {
            return Err(Error::param("kappa", "must be > 0"));
        }
        let control = self.control()?;
        let target = self.target()?;
        let h = ProtocolConfig::default_half_span(&control, &target);
        let cfg = ProtocolConfig {
            control,
            target,
            blockade: self.blockade,
            gamma_control: self.gamma_control,
            gamma_target: self.gamma_target,
            t_span: (self.t_start.unwrap_or(-h), self.t_end.unwrap_or(h)),
            solver: self.solver(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_are_the_reference_point() {
        let s = Settings::default();
        let cfg = s.to_protocol_config().unwrap();
        assert_eq!(cfg.target.n_atoms, 5);
        assert_eq!(cfg.target.stirap.omega, 10.0);
        assert_eq!(cfg.blockade, 500.0);
        assert_relative_eq!(cfg.control.omega_c0, 12.533141373155, epsilon = 1e-9);
        assert_relative_eq!(cfg.control.tau_c, 1.4 + 4.4, epsilon = 1e-15);
        assert!(cfg.is_closed());
    }

    #[test]
    fn toml_and_json_agree() {
        let t = Settings::from_toml_str("n_atoms = 3\nomega = 4.5\ngamma_r = 0.01\n").unwrap();
        let j = Settings::from_json_str(r#"{"n_atoms": 3, "omega": 4.5, "gamma_r": 0.01}"#).unwrap();
        assert_eq!(t, j);
        assert_eq!(t.gamma_target, 0.01);
        let back = Settings::from_toml_str(&t.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = Settings::from_toml_str("omgea = 3\n").unwrap_err().to_string();
        assert!(e.contains("omgea"), "{e}");
        let mut s = Settings::default();
        let e = s.set("bogus", "1").unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
    }

    #[test]
    fn invalid_values_name_the_key() {
        let mut s = Settings::default();
        s.set("gamma_r", "-1").unwrap();
        let e = s.to_protocol_config().unwrap_err().to_string();
        assert!(e.contains("gamma_r"), "{e}");
        let mut s = Settings::default();
        s.set("n_atoms", "0").unwrap();
        assert!(s.to_protocol_config().unwrap_err().to_string().contains("n_atoms"));
        let mut s = Settings::default();
        assert!(s.set("n_atoms", "-2").unwrap_err().to_string().contains("n_atoms"));
    }

    #[test]
    fn overrides() {
        let mut s = Settings::default();
        s.apply_overrides(&["omega=9.5", "rabi_convention=half", "method=rk4", "tau_c=7"])
            .unwrap();
        assert_eq!(s.omega, 9.5);
        assert_eq!(s.rabi_convention, RabiConvention::Half);
        assert_eq!(s.method, MethodName::Rk4);
        assert_eq!(s.tau_c, Some(7.0));
        assert_eq!(s.omega_internal(), 9.5);
        assert!(s.apply_overrides(&["omega"]).is_err());
        s.set_number("gamma", 0.01).unwrap();
        assert_eq!((s.gamma_control, s.gamma_target), (0.01, 0.01));
        s.apply_overrides(&["gamma=0.02"]).unwrap();
        assert_eq!((s.gamma_control, s.gamma_target), (0.02, 0.02));
        s.set_number("n_atoms", 7.0).unwrap();
        assert_eq!(s.n_atoms, 7);
        assert!(s.set_number("n_atoms", 1.5).is_err());
    }

    #[test]
    fn explicit_control_peak_follows_convention() {
        let mut s = Settings {
            omega_c0: Some(6.2),
            ..Settings::default()
        };
        assert_relative_eq!(s.control().unwrap().omega_c0, 12.4);
        s.rabi_convention = RabiConvention::Half;
        assert_relative_eq!(s.control().unwrap().omega_c0, 6.2);
    }

    #[test]
    fn sweep_section_parses() {
        let s = Settings::from_toml_str(
            "omega = 3\n[sweep]\nobservable = \"fidelity\"\naxes = [{ param = \"blockade\", min = 0, max = 10, count = 3 }]\n",
        )
        .unwrap();
        let sw = s.sweep.unwrap();
        assert_eq!(sw.axes[0].param, "blockade");
        assert_eq!(sw.axes[0].count, 3);
    }

    #[test]
    fn every_key_has_help() {
        let table = toml::Table::try_from(Settings {
            omega_c0: Some(1.0),
            tau_c: Some(1.0),
            t_start: Some(-1.0),
            t_end: Some(1.0),
            ..Settings::default()
        })
        .unwrap();
        for k in table.keys() {
            assert!(KEYS.iter().any(|(n, _)| n == k), "{k} undocumented");
        }
        assert_eq!(Settings::default_display("omega"), "5.0");
        assert_eq!(Settings::default_display("omega_c0"), "derived");
    }
}
