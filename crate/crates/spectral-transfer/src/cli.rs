//! Command-line front end: argument parsing, thread capping and exit codes.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::experiments::run_experiment;
use crate::report::emit_reports;

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "SPECTRAL_TRANSFER_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    CoarsenTransfer,
    PerturbStability,
    CircleSampling,
    ConvnetTransfer,
    McVerify,
}

impl From<ExperimentArg> for Experiment {
    fn from(a: ExperimentArg) -> Self {
        match a {
            ExperimentArg::CoarsenTransfer => Experiment::CoarsenTransfer,
            ExperimentArg::PerturbStability => Experiment::PerturbStability,
            ExperimentArg::CircleSampling => Experiment::CircleSampling,
            ExperimentArg::ConvnetTransfer => Experiment::ConvnetTransfer,
            ExperimentArg::McVerify => Experiment::McVerify,
        }
    }
}

/// Run one transferability experiment and certify its inequalities.
///
/// Exit status: 0 when every inequality is certified, 1 when one fails, 2 on usage, config or IO errors.
#[derive(Debug, Parser)]
#[command(name = "spectral-transfer", version)]
pub struct Args {
    pub experiment: ExperimentArg,
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config (default: out/<experiment>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write scatter.svg.
    #[arg(long)]
    pub svg: bool,
}

/// Parse SPECTRAL_TRANSFER_THREADS: unset means rayon's default, otherwise a positive integer.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
    }
}

/// Load, override, run and report; returns the process exit code.
pub fn run(args: &Args) -> Result<i32> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    let requested: Experiment = args.experiment.into();
    if cfg.experiment != requested {
        return Err(Error::Config(format!(
            "{} describes experiment {}, not {}",
            args.config.display(),
            cfg.experiment.name(),
            requested.name()
        )));
    }
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    let out = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out").join(requested.name()));
    let bundle = run_experiment(&cfg)?;
    let files = emit_reports(&bundle, &out, args.svg)?;
    for (name, ok) in &bundle.verdicts {
        if !ok {
            eprintln!("FAILED: {name}");
        }
    }
    let passed = bundle.verdicts.iter().filter(|v| v.1).count();
    println!("{}: {passed}/{} inequalities certified", requested.name(), bundle.verdicts.len());
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(if bundle.certified() { EXIT_CERTIFIED } else { EXIT_FAILED })
}

/// The whole program, minus `std::process::exit`.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_CERTIFIED };
            let _ = e.print();
            return code;
        }
    };
    let threads = match thread_cap(std::env::var(THREADS_ENV).ok().as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(n) = threads {
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
