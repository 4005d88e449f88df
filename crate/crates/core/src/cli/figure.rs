//! Figure presets: fixed parameter grids run with and without BGC.

use std::fmt;
use std::str::FromStr;

use crate::simulate::{run_ensemble, Ensemble};
use crate::stats::{
    detect_bands, escape_fraction, estimate_barrier, estimate_density, pooled_samples, relative_threshold, skewness,
    terminal_samples, BandReport, BarrierMethod, DensityEstimate,
};

use super::config::{ExperimentConfig, OutputFormat};
use super::output::Outputs;
use super::report::{self, COLOR_BGC, COLOR_FREE};
use super::table::{Cell, Table};
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Fig5a,
    Fig5b,
    Fig5c,
    Fig5d,
    Fig6,
    Fig7,
    Fig8,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig5a,
        Preset::Fig5b,
        Preset::Fig5c,
        Preset::Fig5d,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
            Preset::Fig5c => "fig5c",
            Preset::Fig5d => "fig5d",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }

    /// `(μ, σ)` pairs run by the preset.
    pub fn grid(self) -> Vec<(f64, f64)> {
        match self {
            Preset::Fig5a => vec![(-0.05, 1.0)],
            Preset::Fig5b => vec![(0.05, 1.0)],
            Preset::Fig5c => vec![(0.0, 1.0)],
            Preset::Fig5d => vec![(0.0, 2.0)],
            Preset::Fig6 | Preset::Fig7 => vec![(-0.05, 1.0), (0.0, 1.0), (0.05, 1.0)],
            Preset::Fig8 => vec![(0.0, -1.5), (0.0, 1.0), (0.0, 3.5)],
        }
    }

    fn single_run(self) -> bool {
        self.grid().len() == 1
    }

    /// File-name prefix of one grid point.
    pub fn run_prefix(self, mu: f64, sigma: f64) -> String {
        if self.single_run() {
            self.name().to_string()
        } else {
            format!("{}_mu{mu}_sigma{sigma}", self.name())
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset `{s}` (valid presets: {})", names.join(", "))
        })
    }
}

/// One analysed ensemble.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub ensemble: Ensemble,
    pub density: DensityEstimate,
    pub bands: BandReport,
}

/// A grid point simulated with and without the constraint on one seed.
#[derive(Debug, Clone)]
pub struct PairedRun {
    pub mu: f64,
    pub sigma: f64,
    pub bgc: RunAnalysis,
    pub free: RunAnalysis,
}

pub fn analyse(cfg: &ExperimentConfig, ensemble: Ensemble) -> Result<RunAnalysis, CliError> {
    let horizon = ensemble.config.horizon();
    if cfg.pool_from > horizon {
        return Err(CliError::Validation(format!(
            "`pool_from` ({}) lies beyond the horizon dt * steps = {horizon}",
            cfg.pool_from
        )));
    }
    let samples = pooled_samples(&ensemble, cfg.pool_from);
    let density = estimate_density(&samples, cfg.bins, cfg.bandwidth)?;
    let bands = detect_bands(&density, relative_threshold(&density, cfg.prominence));
    Ok(RunAnalysis {
        ensemble,
        density,
        bands,
    })
}

pub fn run_pair(cfg: &ExperimentConfig, mu: f64, sigma: f64) -> Result<PairedRun, CliError> {
    let sim = cfg.sim_config();
    let bgc = run_ensemble(&cfg.sde_with(mu, sigma, true), &sim)?;
    let free = run_ensemble(&cfg.sde_with(mu, sigma, false), &sim)?;
    Ok(PairedRun {
        mu,
        sigma,
        bgc: analyse(cfg, bgc)?,
        free: analyse(cfg, free)?,
    })
}

/// Runs every grid point of `preset` and buffers its output files.
pub fn run_figure(cfg: &ExperimentConfig, preset: Preset, out: &mut Outputs) -> Result<Vec<PairedRun>, CliError> {
    let runs = preset
        .grid()
        .into_iter()
        .map(|(mu, sigma)| run_pair(cfg, mu, sigma))
        .collect::<Result<Vec<_>, _>>()?;

    let mut bands = report::bands_header();
    for run in &runs {
        let prefix = preset.run_prefix(run.mu, run.sigma);
        let title = format!("{preset}: mu = {}, sigma = {}", run.mu, run.sigma);
        for (tag, analysis) in [("bgc", &run.bgc), ("free", &run.free)] {
            let name = format!("{prefix}_{tag}");
            if cfg.wants(OutputFormat::Csv) {
                out.csv(
                    format!("{name}_paths.csv"),
                    &report::paths_table(&analysis.ensemble, cfg.csv_paths),
                );
                out.csv(format!("{name}_density.csv"), &report::density_table(&analysis.density));
            }
            report::push_bands(&mut bands, &name, &analysis.bands);
        }
        if cfg.wants(OutputFormat::Svg) {
            match preset {
                Preset::Fig6 => {
                    out.svg(
                        format!("{prefix}_free_markers.svg"),
                        &report::markers_chart(
                            &format!("{title}, without BGC"),
                            &run.free.ensemble,
                            "without BGC",
                            COLOR_FREE,
                        ),
                    )?;
                    out.svg(
                        format!("{prefix}_bgc_markers.svg"),
                        &report::markers_chart(&format!("{title}, with BGC"), &run.bgc.ensemble, "with BGC", COLOR_BGC),
                    )?;
                }
                Preset::Fig7 => {
                    out.svg(
                        format!("{prefix}_density.svg"),
                        &report::overlay_density_chart(
                            &title,
                            (&run.free.density, &run.free.bands),
                            (&run.bgc.density, &run.bgc.bands),
                        ),
                    )?;
                }
                _ => {
                    out.svg(
                        format!("{prefix}_paths.svg"),
                        &report::overlay_paths_chart(&title, &run.free.ensemble, &run.bgc.ensemble),
                    )?;
                }
            }
        }
    }

    if cfg.wants(OutputFormat::Csv) {
        out.csv(format!("{preset}_bands.csv"), &bands);
        match preset {
            Preset::Fig7 => out.csv("fig7_skewness.csv", &skewness_table(&runs)?),
            Preset::Fig8 => out.csv("fig8_escape.csv", &escape_table(cfg, &runs)?),
            _ => {}
        }
    }
    Ok(runs)
}

/// Terminal skewness with and without the constraint, per drift.
pub fn skewness_table(runs: &[PairedRun]) -> Result<Table, CliError> {
    let mut table = Table::new(["mu", "sigma", "skew_bgc", "skew_free", "difference"]);
    for run in runs {
        let bgc = skewness(&terminal_samples(&run.bgc.ensemble))?;
        let free = skewness(&terminal_samples(&run.free.ensemble))?;
        table.push(vec![
            run.mu.into(),
            run.sigma.into(),
            bgc.into(),
            free.into(),
            (bgc - free).into(),
        ]);
    }
    Ok(table)
}

/// Escape fractions against the empirical barrier of the `σ = 1` BGC run.
pub fn escape_table(cfg: &ExperimentConfig, runs: &[PairedRun]) -> Result<Table, CliError> {
    let reference = runs
        .iter()
        .find(|r| r.sigma == 1.0)
        .ok_or_else(|| CliError::Runtime("escape table needs a sigma = 1 reference run".into()))?;
    let barrier = estimate_barrier(
        &cfg.sde_with(reference.mu, reference.sigma, true),
        BarrierMethod::EmpiricalQuantile { quantile: cfg.quantile },
        Some(&reference.bgc.ensemble),
    )?;
    let level = barrier.x_plus.max(-barrier.x_minus);
    let mut table = Table::new(["mu", "sigma", "level", "escape_bgc", "escape_free"]);
    for run in runs {
        table.push(vec![
            run.mu.into(),
            run.sigma.into(),
            level.into(),
            escape_fraction(&run.bgc.ensemble, level)?.into(),
            Cell::from(escape_fraction(&run.free.ensemble, level)?),
        ]);
    }
    Ok(table)
}
