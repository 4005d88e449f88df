//! `key = value` experiment definitions.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::lil::DEFAULT_T_MIN;
use crate::model::BgcSde;
use crate::simulate::SimConfig;
use crate::stats::{Bandwidth, DEFAULT_BARRIER_QUANTILE, DEFAULT_RELATIVE_PROMINENCE};

use super::figure::Preset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line of the offending entry; `None` for `--set` overrides and
    /// cross-field checks.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Simulate,
    Density,
    Envelope,
    Barrier,
    Lattice,
    Check,
    Figure,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Simulate,
        Command::Density,
        Command::Envelope,
        Command::Barrier,
        Command::Lattice,
        Command::Check,
        Command::Figure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Density => "density",
            Command::Envelope => "envelope",
            Command::Barrier => "barrier",
            Command::Lattice => "lattice",
            Command::Check => "check",
            Command::Figure => "figure",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            format!("unknown command `{s}` (expected one of: {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutputFormat {
    Csv,
    Svg,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Svg => "svg",
        }
    }
}

/// A fully validated experiment definition.
///
/// Defaults follow the reference protocol: 1,000 unit steps, 1,000 paths,
/// `Ψ(x) = x²/100`, `μ = 0`, `σ = 1`, paths starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub preset: Option<Preset>,
    pub mu: f64,
    pub sigma: f64,
    /// `None` means `Ψ ≡ 0`.
    pub beta: Option<f64>,
    pub x0: f64,
    pub dt: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub t_min: f64,
    pub bins: usize,
    pub bandwidth: Bandwidth,
    /// Band threshold as a fraction of the peak density.
    pub prominence: f64,
    pub quantile: f64,
    /// Pooled density samples are taken at times `t ≥ pool_from`.
    pub pool_from: f64,
    pub radius: f64,
    pub grid_step: f64,
    pub lattice_steps: usize,
    pub dx: f64,
    pub walks: usize,
    /// Paths written to path CSV files; `None` writes all of them.
    pub csv_paths: Option<usize>,
    pub out_dir: PathBuf,
    pub formats: BTreeSet<OutputFormat>,
}

pub const DEFAULT_BETA: f64 = 100.0;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CSV_PATHS: usize = 100;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Simulate,
            preset: None,
            mu: 0.0,
            sigma: 1.0,
            beta: Some(DEFAULT_BETA),
            x0: 0.0,
            dt: 1.0,
            steps: 1000,
            paths: 1000,
            seed: DEFAULT_SEED,
            t_min: DEFAULT_T_MIN,
            bins: 50,
            bandwidth: Bandwidth::Auto,
            prominence: DEFAULT_RELATIVE_PROMINENCE,
            quantile: DEFAULT_BARRIER_QUANTILE,
            pool_from: 100.0,
            radius: 100.0,
            grid_step: 0.1,
            lattice_steps: 10,
            dx: 1.0,
            walks: 100_000,
            csv_paths: Some(DEFAULT_CSV_PATHS),
            out_dir: PathBuf::from("out"),
            formats: [OutputFormat::Csv, OutputFormat::Svg].into_iter().collect(),
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "preset",
    "mu",
    "sigma",
    "psi",
    "beta",
    "x0",
    "dt",
    "steps",
    "paths",
    "seed",
    "t_min",
    "bins",
    "bandwidth",
    "prominence",
    "quantile",
    "pool_from",
    "radius",
    "grid_step",
    "lattice_steps",
    "dx",
    "walks",
    "csv_paths",
    "out_dir",
    "formats",
];

fn parse_real(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{key}` expects a real number, got `{value}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{key}` must be finite, got `{value}`"))
    }
}

fn parse_count(key: &str, value: &str) -> Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` expects a nonnegative integer, got `{value}`"))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text`, then applies `key=value` overrides in order.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let at = |message: String| ConfigError {
                line: Some(line_no),
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value).map_err(at)?;
        }
        for entry in overrides {
            let at = |message: String| ConfigError {
                line: None,
                message: format!("--set {entry}: {message}"),
            };
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| at("expected key=value".to_string()))?;
            cfg.set(key.trim(), value.trim()).map_err(at)?;
        }
        cfg.validate_cross()?;
        Ok(cfg)
    }

    /// Sets one key, validating the value against the operation it feeds.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "command" => self.command = value.parse()?,
            "preset" => {
                self.preset = match value {
                    "none" | "" => None,
                    v => Some(v.parse()?),
                }
            }
            "mu" => self.mu = parse_real(key, value)?,
            "sigma" => self.sigma = parse_real(key, value)?,
            "psi" => match value {
                "none" => self.beta = None,
                "quadratic" => {
                    if self.beta.is_none() {
                        self.beta = Some(DEFAULT_BETA);
                    }
                }
                other => return Err(format!("`psi` expects `quadratic` or `none`, got `{other}`")),
            },
            "beta" => {
                if value == "none" {
                    self.beta = None;
                } else {
                    let beta = parse_real(key, value)?;
                    check(beta > 0.0, || format!("`beta` must be positive, got {beta}"))?;
                    self.beta = Some(beta);
                }
            }
            "x0" => self.x0 = parse_real(key, value)?,
            "dt" => {
                let dt = parse_real(key, value)?;
                check(dt > 0.0, || format!("`dt` must be positive, got {dt}"))?;
                self.dt = dt;
            }
            "steps" => {
                let n = parse_count(key, value)?;
                check(n > 0, || "`steps` must be positive".into())?;
                self.steps = n;
            }
            "paths" => {
                let n = parse_count(key, value)?;
                check(n > 0, || "`paths` must be positive".into())?;
                self.paths = n;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("`seed` expects an unsigned 64-bit integer, got `{value}`"))?
            }
            "t_min" => {
                let t = parse_real(key, value)?;
                check(t >= std::f64::consts::E, || {
                    format!("`t_min` must be at least e, got {t}")
                })?;
                self.t_min = t;
            }
            "bins" => {
                let n = parse_count(key, value)?;
                check(n >= 2, || format!("`bins` must be at least 2, got {n}"))?;
                self.bins = n;
            }
            "bandwidth" => {
                self.bandwidth = if value == "auto" {
                    Bandwidth::Auto
                } else {
                    let h = parse_real(key, value)?;
                    check(h > 0.0, || format!("`bandwidth` must be positive or `auto`, got {h}"))?;
                    Bandwidth::Fixed(h)
                }
            }
            "prominence" => {
                let p = parse_real(key, value)?;
                check((0.0..1.0).contains(&p), || {
                    format!("`prominence` is a fraction of the peak density in [0, 1), got {p}")
                })?;
                self.prominence = p;
            }
            "quantile" => {
                let q = parse_real(key, value)?;
                check(q > 0.5 && q < 1.0, || {
                    format!("`quantile` must lie in (0.5, 1), got {q}")
                })?;
                self.quantile = q;
            }
            "pool_from" => {
                let t = parse_real(key, value)?;
                check(t >= 0.0, || format!("`pool_from` must be nonnegative, got {t}"))?;
                self.pool_from = t;
            }
            "radius" => {
                let r = parse_real(key, value)?;
                check(r > 0.0, || format!("`radius` must be positive, got {r}"))?;
                self.radius = r;
            }
            "grid_step" => {
                let h = parse_real(key, value)?;
                check(h > 0.0, || format!("`grid_step` must be positive, got {h}"))?;
                self.grid_step = h;
            }
            "lattice_steps" => self.lattice_steps = parse_count(key, value)?,
            "dx" => {
                let dx = parse_real(key, value)?;
                check(dx > 0.0, || format!("`dx` must be positive, got {dx}"))?;
                self.dx = dx;
            }
            "walks" => {
                let n = parse_count(key, value)?;
                check(n > 0, || "`walks` must be positive".into())?;
                self.walks = n;
            }
            "csv_paths" => {
                self.csv_paths = if value == "all" {
                    None
                } else {
                    Some(parse_count(key, value)?)
                }
            }
            "out_dir" => {
                check(!value.is_empty(), || "`out_dir` must not be empty".into())?;
                self.out_dir = PathBuf::from(value);
            }
            "formats" => {
                let mut formats = BTreeSet::new();
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    formats.insert(match item {
                        "csv" => OutputFormat::Csv,
                        "svg" => OutputFormat::Svg,
                        other => return Err(format!("unknown output format `{other}` (expected csv, svg)")),
                    });
                }
                check(!formats.is_empty(), || {
                    "`formats` must name at least one of csv, svg".into()
                })?;
                self.formats = formats;
            }
            other => return Err(format!("unknown key `{other}` (known keys: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    fn validate_cross(&self) -> Result<(), ConfigError> {
        let fail = |message: String| Err(ConfigError { line: None, message });
        if self.grid_step >= self.radius {
            return fail(format!(
                "`grid_step` ({}) must be smaller than `radius` ({})",
                self.grid_step, self.radius
            ));
        }
        if !(self.dt * self.steps as f64).is_finite() {
            return fail("horizon dt * steps is not finite".into());
        }
        Ok(())
    }

    /// Renders every key, so `parse(render(c)) == c`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("command", self.command.name().into());
        line("preset", self.preset.map_or("none".into(), |p| p.name().into()));
        line("mu", self.mu.to_string());
        line("sigma", self.sigma.to_string());
        match self.beta {
            Some(beta) => {
                line("psi", "quadratic".into());
                line("beta", beta.to_string());
            }
            None => line("psi", "none".into()),
        }
        line("x0", self.x0.to_string());
        line("dt", self.dt.to_string());
        line("steps", self.steps.to_string());
        line("paths", self.paths.to_string());
        line("seed", self.seed.to_string());
        line("t_min", self.t_min.to_string());
        line("bins", self.bins.to_string());
        line(
            "bandwidth",
            match self.bandwidth {
                Bandwidth::Auto => "auto".into(),
                Bandwidth::Fixed(h) => h.to_string(),
            },
        );
        line("prominence", self.prominence.to_string());
        line("quantile", self.quantile.to_string());
        line("pool_from", self.pool_from.to_string());
        line("radius", self.radius.to_string());
        line("grid_step", self.grid_step.to_string());
        line("lattice_steps", self.lattice_steps.to_string());
        line("dx", self.dx.to_string());
        line("walks", self.walks.to_string());
        line("csv_paths", self.csv_paths.map_or("all".into(), |n| n.to_string()));
        line("out_dir", self.out_dir.display().to_string());
        line(
            "formats",
            self.formats.iter().map(|f| f.name()).collect::<Vec<_>>().join(","),
        );
        out
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }

    pub fn sde(&self) -> BgcSde {
        BgcSde::constant_coefficients(self.mu, self.sigma, self.beta, self.x0)
    }

    pub fn sde_with(&self, mu: f64, sigma: f64, constrained: bool) -> BgcSde {
        BgcSde::constant_coefficients(mu, sigma, if constrained { self.beta } else { None }, self.x0)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.dt, self.steps, self.paths, self.seed)
    }
}
