use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use staggered_nystrom::experiments::{self, ExperimentKind, Output, RunConfig, RunError};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(version, about = "Staggered Nyström experiments for the 2D Helmholtz hypersingular equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error and convergence rate per N.
    Convergence(Overrides),
    /// Richardson-extrapolated potential from grids N and 2N.
    Richardson(Overrides),
    /// Error as a function of the staggering parameter at fixed N.
    SweepEps(Overrides),
    /// Condition numbers of W and of the preconditioned V W.
    Cond(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Staggering parameter.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Node counts per curve, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Wavenumber.
    #[arg(long)]
    k: Option<f64>,
    /// Output CSV path; the JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, ov) = match cli.command {
        Command::Convergence(o) => (ExperimentKind::Convergence, o),
        Command::Richardson(o) => (ExperimentKind::Richardson, o),
        Command::SweepEps(o) => (ExperimentKind::SweepEps, o),
        Command::Cond(o) => (ExperimentKind::Cond, o),
    };
    let cfg = match load(kind, &ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let out_path = cfg.out.clone();
    match experiments::run(&cfg) {
        Ok(out) => match emit(&cfg, &out, out_path.as_ref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_NUMERICAL)
            }
        },
        Err(RunError::Numerical { source, partial }) => {
            eprintln!("error: numerical failure: {source}");
            if let Some(p) = partial {
                if let Err(e) = emit(&cfg, &p, out_path.as_ref()) {
                    eprintln!("error: could not write partial table: {e:#}");
                }
            }
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn load(kind: ExperimentKind, ov: &Overrides) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(&ov.config).with_context(|| format!("reading {}", ov.config.display()))?;
    if cfg.experiment != kind {
        eprintln!("note: running {kind:?} although the config names {:?}", cfg.experiment);
        cfg.experiment = kind;
    }
    if let Some(e) = ov.eps {
        cfg.eps = e;
    }
    if let Some(n) = &ov.n {
        cfg.n_list = n.clone();
    }
    if let Some(k) = ov.k {
        cfg.k = k;
    }
    if let Some(o) = &ov.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes CSV and sidecar to `path`, or the CSV to stdout when no path is set.
fn emit(cfg: &RunConfig, out: &Output, path: Option<&PathBuf>) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let side = experiments::write_outputs(cfg, out, p)?;
            eprintln!("wrote {} and {}", p.display(), side.display());
        }
        None => print!("{}", experiments::to_csv(out)),
    }
    Ok(())
}
