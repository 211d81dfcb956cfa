mod config;
mod oracle_check;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chi2sim::convergence::convergence_report;
use chi2sim::observables::{dfg_spectrum, sfg_spectrum, spdc_biphoton};
use chi2sim::quadrature::QuadratureConfig;
use chi2sim::ratios::{figure2_curve, linear_sweep};
use chi2sim::scenario::Scenario;
use chi2sim::Error;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{load_scenario, ConfigError};
use crate::output::{AchievedTolerance, RatioJson, RatiosJson, Sig17};

#[derive(Debug, Parser)]
#[command(name = "chi2sim", version, about = "Classical and quantum chi(2) processes in lossy waveguides")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generated spectrum (DFG, SFG) or biphoton amplitude (SPDC) as CSV.
    Spectra {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        process: ProcessArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative tolerance of the time quadrature.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Quantum-classical number ratios as JSON.
    Ratios {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Treat fields that are not spectrally narrow as a configuration error.
        #[arg(long)]
        strict: bool,
    },
    /// Loss-integral discrepancy curve as CSV.
    Figure2 {
        /// Pump-band loss rate times the window half-width.
        #[arg(long = "beta-sh-T")]
        beta_sh_t: f64,
        /// β/β_SH values as MIN:MAX:N.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Sweep,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fock-space and high-resolution cross-checks as a pass/fail table.
    OracleCheck {
        /// Scenario to check; the bundled g1 scenario when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Grid and time refinement table as CSV.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProcessArg {
    Spdc,
    Dfg,
    Sfg,
}

#[derive(Debug, Clone, Copy)]
struct Sweep {
    min: f64,
    max: f64,
    n: usize,
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, n] = parts.as_slice() else {
        return Err(format!("expected MIN:MAX:N, got `{s}`"));
    };
    let min: f64 = min.parse().map_err(|_| format!("bad sweep minimum `{min}`"))?;
    let max: f64 = max.parse().map_err(|_| format!("bad sweep maximum `{max}`"))?;
    let n: usize = n.parse().map_err(|_| format!("bad sweep count `{n}`"))?;
    if min < 0.0 {
        return Err(format!("sweep minimum must be >= 0, got {min}"));
    }
    if max < min {
        return Err(format!("sweep maximum {max} is below minimum {min}"));
    }
    if n == 0 {
        return Err("sweep needs at least one point".into());
    }
    Ok(Sweep { min, max, n })
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    Config(String),
    Convergence(String),
    UndefinedRatio(String),
    CheckFailed(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::CheckFailed(_) | Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Convergence(_) => 3,
            Failure::UndefinedRatio(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m)
            | Failure::Convergence(m)
            | Failure::UndefinedRatio(m)
            | Failure::CheckFailed(m)
            | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConvergenceFailure { .. } | Error::NumericalDomain { .. } => Failure::Convergence(e.to_string()),
            Error::UndefinedRatio { .. } => Failure::UndefinedRatio(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path, tolerance: Option<f64>) -> Result<Scenario, Failure> {
    let scenario = load_scenario(path)?;
    apply_tolerance(scenario, tolerance)
}

fn apply_tolerance(scenario: Scenario, tolerance: Option<f64>) -> Result<Scenario, Failure> {
    match tolerance {
        None => Ok(scenario),
        Some(t) => {
            let q = scenario.simulation.quadrature;
            let q = QuadratureConfig::new(t, q.max_doublings, q.base_nodes)?;
            Ok(scenario.with_quadrature(q))
        }
    }
}

fn run_spectra(config: &Path, process: ProcessArg, out: Option<&Path>, tolerance: Option<f64>) -> Result<(), Failure> {
    let scenario = load(config, tolerance)?;
    let sim = &scenario.simulation;
    let text = match process {
        ProcessArg::Dfg => output::spectrum_csv(&dfg_spectrum(sim, &scenario.dfg_inputs()?)?),
        ProcessArg::Sfg => output::spectrum_csv(&sfg_spectrum(sim, &scenario.sfg_inputs()?)?),
        ProcessArg::Spdc => output::biphoton_csv(&spdc_biphoton(sim, &scenario.spdc_inputs()?)?),
    };
    emit(out, &text)
}

fn run_ratios(config: &Path, out: Option<&Path>, tolerance: Option<f64>, strict: bool) -> Result<(), Failure> {
    let scenario = load(config, tolerance)?;
    let mut missing = Vec::new();
    for (present, name) in [
        (scenario.has_spdc(), "[spdc.pump]"),
        (scenario.has_dfg(), "[dfg.seed] and [dfg.pump]"),
        (scenario.has_sfg(), "[sfg.signal] and [sfg.idler]"),
    ] {
        if !present {
            missing.push(format!("ratios need {name}"));
        }
    }
    if !missing.is_empty() {
        return Err(Failure::Config(missing.join("; ")));
    }
    let warnings: Vec<String> = scenario.narrowness_warnings()?.iter().map(|w| w.to_string()).collect();
    if strict && !warnings.is_empty() {
        return Err(Failure::Config(format!("fields are not spectrally narrow:\n  - {}", warnings.join("\n  - "))));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let run = scenario.run()?;
    let (dfg, sfg) = scenario.ratios_from(&run)?;
    let report = RatiosJson {
        dfg: dfg.as_ref().map(RatioJson::from),
        sfg: sfg.as_ref().map(RatioJson::from),
        achieved_tolerance: AchievedTolerance {
            dfg: run.dfg.as_ref().and_then(|a| a.achieved_tolerance).map(Sig17),
            sfg: run.sfg.as_ref().and_then(|a| a.achieved_tolerance).map(Sig17),
            spdc: run.spdc.as_ref().and_then(|g| g.achieved_tolerance).map(Sig17),
        },
        requested_tolerance: Sig17(scenario.simulation.quadrature.tolerance),
        narrowness_warnings: warnings,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

fn run_figure2(beta_sh_t: f64, sweep: Sweep, out: Option<&Path>) -> Result<(), Failure> {
    let values = linear_sweep(sweep.min, sweep.max, sweep.n)?;
    let curve = figure2_curve(beta_sh_t, 1.0, &values)?;
    emit(out, &output::figure2_csv(&curve))
}

fn run_convergence(config: &Path, out: Option<&Path>, tolerance: Option<f64>) -> Result<(), Failure> {
    let scenario = load(config, tolerance)?;
    let table = convergence_report(&scenario, &scenario.simulation.quadrature)?;
    eprintln!(
        "largest relative change {:.3e} against tolerance {:.3e}: {}",
        table.max_change(),
        table.tolerance,
        if table.converged() { "converged" } else { "not converged" }
    );
    emit(out, &output::convergence_csv(&table))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectra {
            config,
            process,
            out,
            tolerance,
        } => run_spectra(&config, process, out.as_deref(), tolerance),
        Command::Ratios {
            config,
            out,
            tolerance,
            strict,
        } => run_ratios(&config, out.as_deref(), tolerance, strict),
        Command::Figure2 { beta_sh_t, sweep, out } => run_figure2(beta_sh_t, sweep, out.as_deref()),
        Command::OracleCheck { config, out, tolerance } => {
            let scenario = match config {
                Some(path) => load(&path, tolerance)?,
                None => apply_tolerance(oracle_check::bundled_g1()?, tolerance)?,
            };
            let table = oracle_check::run_checks(&scenario)?;
            emit(out.as_deref(), &table.to_csv())?;
            let failed = table.failures();
            if failed > 0 {
                return Err(Failure::CheckFailed(format!("{failed} oracle check(s) failed")));
            }
            eprintln!("all {} oracle checks passed", table.rows.len());
            Ok(())
        }
        Command::Convergence { config, out, tolerance } => run_convergence(&config, out.as_deref(), tolerance),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
