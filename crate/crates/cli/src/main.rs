//! `qgraph`: spectral statistics of quantum graphs from a JSON config.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, ExperimentConfig, ExperimentKind, Level};
use run::RunError;

const AFTER_HELP: &str = "\
Outputs (written under --out, with manifest.json recording the config, seeds,
version, wall time and sha256 of every file):
  build        propagator.json
  spectrum     spectrum.csv           index,phase
  formfactor   formfactor.csv         tau,K,stderr,realizations
               formfactor_smoothed.csv (with formfactor.smooth)
  nns          nns.csv                s,P,count
               nns_summary.json       KS distances to Poisson, COE, CUE
  gap          gap.json, gap_spectrum.csv   modulus,argument
  gap-scaling  gap_scaling.csv        size,gap
               gap_scaling.json       fitted exponent
  walk         spread.csv             t,sigma,sigma_classical
               walk.csv               position,probability,t
  trace-check  trace_check.csv        n,orbit_re,orbit_im,matrix_re,matrix_im,abs_error

Exit codes: 0 success, 1 I/O error, 2 invalid config, 3 numerical failure.";

#[derive(Parser)]
#[command(name = "qgraph", version, about, after_help = AFTER_HELP)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "QGRAPH_OUT_DIR", default_value = "out")]
    out: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, overriding the config (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build one propagator at wavenumber k and save it as JSON.
    Build,
    /// Eigenphases of one propagator.
    Spectrum,
    /// Ensemble-averaged spectral form factor.
    Formfactor,
    /// Nearest-neighbour spacing distribution of an ensemble.
    Nns,
    /// Spectral gap of the classical Markov matrix.
    Gap,
    /// Gap against system size over a family of graphs.
    GapScaling,
    /// Discrete-time quantum walk on the line.
    Walk,
    /// Compare the periodic-orbit sum with Tr Sⁿ.
    TraceCheck,
    /// Check a config for the experiment it declares, without running.
    Validate,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Build => ExperimentKind::Build,
            Command::Spectrum => ExperimentKind::Spectrum,
            Command::Formfactor => ExperimentKind::Formfactor,
            Command::Nns => ExperimentKind::Nns,
            Command::Gap => ExperimentKind::Gap,
            Command::GapScaling => ExperimentKind::GapScaling,
            Command::Walk => ExperimentKind::Walk,
            Command::TraceCheck => ExperimentKind::TraceCheck,
            Command::Validate => return None,
        })
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        }
        None => parse_config("{}").expect("empty config parses"),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

/// Prints diagnostics and fails if any is an error.
fn check(cfg: &ExperimentConfig, kind: ExperimentKind, quiet: bool) -> Result<(), RunError> {
    let diags = cfg.validate(kind);
    for d in &diags {
        if d.level == Level::Error || !quiet {
            eprintln!("{d}");
        }
    }
    let errors = diags.iter().filter(|d| d.level == Level::Error).count();
    if errors > 0 {
        return Err(RunError::Config(format!("{errors} error(s)")));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let cfg = load(cli)?;
    let Some(kind) = cli.command.kind() else {
        let kind = cfg
            .experiment
            .ok_or_else(|| RunError::Config("experiment: set the experiment kind to validate against".into()))?;
        check(&cfg, kind, cli.quiet)?;
        if !cli.quiet {
            println!("config is valid for {kind}");
        }
        return Ok(());
    };
    check(&cfg, kind, cli.quiet)?;
    let threads = cfg.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    let summary = pool.install(|| run::run(kind, &cfg, &cli.out, threads))?;
    if !cli.quiet {
        println!("{kind}: {summary}; outputs in {}", cli.out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qgraph: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
