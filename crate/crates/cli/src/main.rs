use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use rydberg_ghz::config::{Settings, KEYS};
use rydberg_ghz::protocol::{run_ghz_protocol, single_pulse_excitation, TRACK_NAMES};
use rydberg_ghz::pulses::sqrt_half_pi;
use rydberg_ghz::spectral::{adiabaticity_margin_with, regime_classify, Regime};
use rydberg_ghz::sweep::{
    figure_preset, format_g, run_sweep, run_time_series, write_csv, SweepResult, SweepSpec, FIGURE_IDS,
    SINGLE_PULSE_HALF_SPAN,
};
use rydberg_ghz::Error;

const EXIT_DIAGNOSTIC: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Default tolerance of the π-pulse area check.
const PI_AREA_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "sim", version, about = "Rydberg-blockade GHZ protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate the data of a published figure.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURE_IDS))]
        id: String,
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run one protocol and print its fidelities and diagnostics.
    Protocol {
        /// TOML or JSON parameter file (default: built-in parameters).
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the grid described by a config file's [sweep] section.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check adiabaticity, blockade regimes and the control π pulse.
    Check {
        config: Option<PathBuf>,
        /// Override a parameter, `key=value` (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Dominance factor for "much greater than" (default: config `kappa`).
        #[arg(long)]
        kappa: Option<f64>,
        /// Tolerance of the π-pulse area check.
        #[arg(long, value_name = "REL", default_value_t = PI_AREA_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override a parameter, `key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Integrator relative tolerance (absolute tolerance follows at 1e-2 × REL).
    #[arg(long, value_name = "REL")]
    tol: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(t) = self.tol {
            o.push(format!("rtol={t:?}"));
            o.push(format!("atol={:?}", t * 1e-2));
        }
        o
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::InvalidParameter { .. } | Error::Config(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn keys_help() -> String {
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Configurable keys:\n");
    for (key, meaning) in KEYS {
        let default = Settings::default_display(key);
        if default == "derived" {
            s.push_str(&format!("  {key:width$}  {meaning}\n"));
        } else {
            s.push_str(&format!("  {key:width$}  {meaning} [default: {default}]\n"));
        }
    }
    s.push_str(&format!("  {:width$}  sets gamma_R and gamma_r together\n", "gamma"));
    s
}

fn load_settings(path: Option<&Path>, overrides: &[String]) -> Result<Settings, Failure> {
    let mut s = match path {
        Some(p) => Settings::from_path(p).map_err(Failure::usage)?,
        None => Settings::default(),
    };
    s.apply_overrides(overrides)?;
    Ok(s)
}

fn write(result: &SweepResult, dir: &Path, name: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    write_csv(result, &path)?;
    Ok(path)
}

fn report_sweep(result: &SweepResult, path: &Path) {
    println!("wrote {} ({} rows)", path.display(), result.rows.len());
    if !result.errors.is_empty() {
        eprintln!("{} grid points failed and were written as nan:", result.errors.len());
        for e in &result.errors {
            eprintln!("  {e}");
        }
    }
}

fn cmd_figure(id: &str, common: &Common, jobs: Option<usize>) -> Result<u8, Failure> {
    let mut spec = figure_preset(id)?;
    spec.apply_overrides(&common.overrides())?;
    if id == "fig5" {
        let (series, summary) = run_time_series(&spec)?;
        let path = write(&series, &common.out, &format!("{id}.csv"))?;
        report_sweep(&series, &path);
        let path = write(&summary, &common.out, &format!("{id}_summary.csv"))?;
        println!("wrote {}", path.display());
        print_row(&summary);
    } else {
        let result = run_sweep(&spec, jobs)?;
        let path = write(&result, &common.out, &format!("{id}.csv"))?;
        report_sweep(&result, &path);
    }
    Ok(0)
}

fn print_row(r: &SweepResult) {
    if let Some(row) = r.rows.first() {
        let fields: Vec<String> = r
            .columns
            .iter()
            .zip(row)
            .map(|(c, v)| format!("{c}={}", format_g(*v)))
            .collect();
        println!("{}", fields.join(" "));
    }
}

fn cmd_sweep(config: &Path, common: &Common, jobs: Option<usize>) -> Result<u8, Failure> {
    let s = load_settings(Some(config), &common.overrides())?;
    let mut spec = SweepSpec::from_settings(&s)?;
    if let Some(stem) = config.file_stem().and_then(|s| s.to_str()) {
        spec.id = stem.to_string();
    }
    let result = run_sweep(&spec, jobs)?;
    let path = write(&result, &common.out, &format!("{}.csv", spec.id))?;
    report_sweep(&result, &path);
    Ok(0)
}

struct Branches {
    transfer: Regime,
    blocked: Regime,
    margin: f64,
}

fn branches(s: &Settings, kappa: f64) -> Result<Branches, Failure> {
    let t = s.target()?;
    let n = t.n_atoms;
    let omega = t.stirap.omega;
    // undefined without a pulse pair; reported as nan
    let margin = adiabaticity_margin_with(&t.stirap, t.delta, n, kappa).map_or(f64::NAN, |r| r.margin_transfer);
    Ok(Branches {
        transfer: regime_classify(omega, t.delta, n, kappa).regime,
        blocked: regime_classify(omega, t.delta + s.blockade, n, kappa).regime,
        margin,
    })
}

fn cmd_protocol(config: Option<&Path>, common: &Common) -> Result<u8, Failure> {
    let s = load_settings(config, &common.overrides())?;
    let cfg = s.to_protocol_config()?;
    let b = branches(&s, s.kappa)?;
    let (traj, out) = run_ghz_protocol(&cfg)?;

    let columns = std::iter::once("t_over_T")
        .chain(TRACK_NAMES)
        .map(String::from)
        .collect();
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
    let series = SweepResult {
        columns,
        rows,
        metadata: vec![
            ("id".to_string(), "protocol".to_string()),
            ("code_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("settings".to_string(), s.to_json_string()),
            ("max_norm_drift".to_string(), format_g(traj.diagnostics.max_norm_drift)),
        ],
        errors: Vec::new(),
    };
    let path = write(&series, &common.out, "protocol.csv")?;
    println!("wrote {}", path.display());
    println!(
        "fidelity_raw={} fidelity_phase_optimized={} fidelity_root={} success_probability={} optimal_phase={} \
         margin={} regime_transfer_branch={} regime_blocked_branch={}",
        format_g(out.fidelity_raw),
        format_g(out.fidelity_phase_optimized),
        format_g(out.fidelity_root()),
        format_g(out.success_probability),
        format_g(out.optimal_phase),
        format_g(b.margin),
        b.transfer,
        b.blocked,
    );
    if b.margin.is_nan() || b.margin < 1.0 {
        eprintln!(
            "warning: adiabaticity margin {} < 1 on the transfer branch",
            format_g(b.margin)
        );
    }
    if b.transfer != Regime::Transfer {
        eprintln!("warning: transfer branch |1⟩ is classified {}", b.transfer);
    }
    if b.blocked != Regime::Blocked {
        eprintln!("warning: blocked branch |0⟩ is classified {}", b.blocked);
    }
    Ok(0)
}

fn cmd_check(config: Option<&Path>, set: &[String], kappa: Option<f64>, tol: f64) -> Result<u8, Failure> {
    let s = load_settings(config, set)?;
    let cfg = s.to_protocol_config()?;
    let kappa = kappa.unwrap_or(s.kappa);
    let t = &cfg.target;
    let mut ok = true;

    for (label, delta, want) in [
        ("|1⟩", t.delta, Regime::Transfer),
        ("|0⟩", t.delta + cfg.blockade, Regime::Blocked),
    ] {
        let regime = regime_classify(t.stirap.omega, delta, t.n_atoms, kappa);
        let margin = adiabaticity_margin_with(&t.stirap, delta, t.n_atoms, kappa)?;
        let pass = regime.regime == want;
        ok &= pass;
        println!(
            "branch {label}: delta={} regime={} (expected {want}) margin={} margin_exact={} lhs_max={} \
             Ω²/(√N δ)={} Ω/√N={} δ/(√N Ω²)={}",
            format_g(delta),
            regime.regime,
            format_g(margin.margin_transfer),
            format_g(margin.margin_exact),
            format_g(margin.lhs_max),
            format_g(regime.transfer_detuned),
            format_g(regime.transfer_resonant),
            format_g(regime.blocked),
        );
    }

    let c = &cfg.control;
    let area = c.omega_c0 * c.t_c * sqrt_half_pi();
    let error = (area.sin().powi(2) - 1.0).abs();
    let excitation = single_pulse_excitation(
        c.omega_c0,
        c.t_c,
        c.delta_r,
        SINGLE_PULSE_HALF_SPAN * c.t_c,
        &cfg.solver,
    )?;
    let pi_ok = error < tol;
    ok &= pi_ok;
    println!(
        "control pulse: area={} |sin²(area) − 1|={} (tol {}) excitation={} {}",
        format_g(area),
        format_g(error),
        format_g(tol),
        format_g(excitation),
        if pi_ok { "ok" } else { "not a π pulse" },
    );
    println!("kappa={}", format_g(kappa));

    if ok {
        println!("check passed");
        Ok(0)
    } else {
        println!("check failed: the protocol needs transfer on |1⟩, blocking on |0⟩ and a π pulse on the control atom");
        Ok(EXIT_DIAGNOSTIC)
    }
}

fn command_with_keys() -> clap::Command {
    let help = keys_help();
    let mut cmd = Cli::command();
    for name in ["figure", "protocol", "sweep", "check"] {
        cmd = cmd.mut_subcommand(name, |c| c.after_help(help.clone()));
    }
    cmd.after_help(help)
}

fn dispatch(matches: &ArgMatches) -> Result<u8, Failure> {
    let cli = Cli::from_arg_matches(matches).map_err(Failure::usage)?;
    match &cli.command {
        Command::Figure { id, common, jobs } => cmd_figure(id, common, *jobs),
        Command::Protocol { config, common } => cmd_protocol(config.as_deref(), common),
        Command::Sweep { config, common, jobs } => cmd_sweep(config, common, *jobs),
        Command::Check {
            config,
            set,
            kappa,
            tol,
        } => cmd_check(config.as_deref(), set, *kappa, *tol),
    }
}

fn main() -> ExitCode {
    let matches = match command_with_keys().try_get_matches() {
        Ok(m) => m,
        Err(e) => e.exit(),
    };
    match dispatch(&matches) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
