//! Experiment runner behind the `bgc` binary.
//!
//! `bgc <command> [preset] [--config FILE] [--out DIR] [--seed N] [--set key=value ...]`
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 on runtime failure.

pub mod config;
pub mod figure;
pub mod manifest;
pub mod output;
pub mod report;
pub mod run;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use crate::lil::LilError;
use crate::model::ModelError;
use crate::simulate::SimError;
use crate::stats::StatsError;

use self::config::{Command, ConfigError, ExperimentConfig};
use self::manifest::{RunManifest, MANIFEST_FILE};
use self::output::{Outputs, WriteError};
use self::svg::SvgError;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "BGC_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

macro_rules! runtime_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(SimError, StatsError, LilError, ModelError, SvgError, WriteError);

#[derive(Debug, Parser)]
#[command(name = "bgc", version, about = "Simulate and analyse BGC Itô diffusions")]
struct Args {
    /// One of simulate, density, envelope, barrier, lattice, check, figure.
    command: String,
    /// Figure preset (fig5a, fig5b, fig5c, fig5d, fig6, fig7, fig8).
    target: Option<String>,
    /// Config file of `key = value` lines, or a manifest from an earlier run.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Config override, applied after the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Outcome of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub written: Vec<PathBuf>,
}

fn load_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let text = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            let text = if manifest::is_manifest(&text) {
                manifest::config_section(&text)
            } else {
                text
            };
            Some((path, text))
        }
        None => None,
    };
    let body = text.as_ref().map_or("", |(_, t)| t.as_str());
    let mut cfg = ExperimentConfig::parse_with_overrides(body, &args.set).map_err(|e| match (&text, e.line) {
        (Some((path, _)), Some(_)) => CliError::Validation(format!("{}: {e}", path.display())),
        _ => e.into(),
    })?;

    cfg.command = args.command.parse::<Command>().map_err(CliError::Validation)?;
    if let Some(target) = &args.target {
        if cfg.command != Command::Figure {
            return Err(CliError::Validation(format!(
                "unexpected argument `{target}`: only `figure` takes a preset"
            )));
        }
        cfg.preset = Some(target.parse().map_err(CliError::Validation)?);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

/// Worker count from `BGC_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Validation(format!("{THREADS_ENV}: {e}"))),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Runs `cfg` and writes its outputs plus a manifest into `cfg.out_dir`.
pub fn run_config(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RunReport, CliError> {
    let outputs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("cannot start {n} workers: {e}")))?
            .install(|| run::execute(cfg))?,
        None => run::execute(cfg)?,
    };
    let mut all = Outputs::new();
    let manifest = RunManifest::new(cfg, &outputs);
    for (name, bytes) in outputs.files() {
        all.add(name.clone(), bytes.clone());
    }
    all.add(MANIFEST_FILE, manifest.render().into_bytes());
    let written = all.write_all(&cfg.out_dir)?;
    Ok(RunReport {
        config: cfg.clone(),
        written,
    })
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = load_config(&args).and_then(|cfg| {
        let threads = threads_from_env()?;
        run_config(&cfg, threads)
    });
    match result {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            for path in &report.written {
                let _ = writeln!(stdout, "{}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("bgc: {e}");
            e.exit_code()
        }
    }
}
