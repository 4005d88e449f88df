//! One function per command. Each fills an [`Outputs`] buffer.

use crate::lil::{
    empirical_liminf_ratio, empirical_limsup_ratio, lil_envelope, EnvelopeKind, EnvelopeSeries, LilError,
};
use crate::model::check_conditions;
use crate::simulate::{run_ensemble, Ensemble};
use crate::stats::{
    estimate_barrier, ks_distance, lattice_evolve, mean, quantile, sample_std, simulate_walk_endpoints,
    terminal_samples, BarrierMethod, DEFAULT_ROOT_BRACKET,
};

use super::config::{Command, ExperimentConfig, OutputFormat};
use super::figure::{analyse, run_figure};
use super::output::Outputs;
use super::report::{self, COLOR_BGC, COLOR_FREE, COLOR_LIL, COLOR_PATH, COLOR_SQRT};
use super::svg::{Chart, Series};
use super::table::{Cell, Table};
use super::CliError;

/// Runs `cfg.command` and returns its buffered outputs.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let mut out = Outputs::new();
    match cfg.command {
        Command::Simulate => simulate(cfg, &mut out)?,
        Command::Density => density(cfg, &mut out)?,
        Command::Envelope => envelope(cfg, &mut out)?,
        Command::Barrier => barrier(cfg, &mut out)?,
        Command::Lattice => lattice(cfg, &mut out)?,
        Command::Check => check(cfg, &mut out)?,
        Command::Figure => {
            let preset = cfg.preset.ok_or_else(|| {
                let names: Vec<&str> = super::figure::Preset::ALL.iter().map(|p| p.name()).collect();
                CliError::Validation(format!("`figure` needs a preset (one of: {})", names.join(", ")))
            })?;
            run_figure(cfg, preset, &mut out)?;
        }
    }
    Ok(out)
}

fn color(cfg: &ExperimentConfig) -> &'static str {
    if cfg.beta.is_some() {
        COLOR_BGC
    } else {
        COLOR_FREE
    }
}

fn ensemble(cfg: &ExperimentConfig) -> Result<Ensemble, CliError> {
    Ok(run_ensemble(&cfg.sde(), &cfg.sim_config())?)
}

fn simulate(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let ens = ensemble(cfg)?;
    let terminal = terminal_samples(&ens);
    if cfg.wants(OutputFormat::Csv) {
        out.csv("paths.csv", &report::paths_table(&ens, cfg.csv_paths));
        out.csv(
            "summary.csv",
            &Table::key_value([
                ("sde", Cell::from(ens.sde_label.as_str())),
                ("paths", ens.len().into()),
                ("steps", cfg.steps.into()),
                ("dt", cfg.dt.into()),
                ("seed", cfg.seed.into()),
                ("terminal_mean", mean(&terminal).into()),
                ("terminal_std", sample_std(&terminal).ok().into()),
                ("max_abs", ens.max_abs().into()),
            ]),
        );
    }
    if cfg.wants(OutputFormat::Svg) {
        out.svg(
            "paths.svg",
            &report::single_paths_chart(&ens.sde_label, &ens, color(cfg)),
        )?;
    }
    Ok(())
}

fn density(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let run = analyse(cfg, ensemble(cfg)?)?;
    if cfg.wants(OutputFormat::Csv) {
        out.csv("density.csv", &report::density_table(&run.density));
        let mut bands = report::bands_header();
        let tag = if cfg.beta.is_some() { "bgc" } else { "free" };
        report::push_bands(&mut bands, tag, &run.bands);
        out.csv("bands.csv", &bands);
        out.csv(
            "density_summary.csv",
            &Table::key_value([
                ("samples", run.density.n_samples.into()),
                ("bandwidth", run.density.bandwidth.into()),
                ("prominence_threshold", run.bands.prominence_threshold.into()),
                ("modes", run.bands.n_modes().into()),
            ]),
        );
    }
    if cfg.wants(OutputFormat::Svg) {
        out.svg(
            "density.svg",
            &report::density_chart(&run.ensemble.sde_label, &run.density, &run.bands, color(cfg)),
        )?;
    }
    Ok(())
}

/// Fraction of states at `t ≥ t_min` lying inside `±lil_envelope(t)`.
pub fn lil_coverage(ens: &Ensemble, t_min: f64) -> Result<f64, LilError> {
    let (mut inside, mut total) = (0usize, 0usize);
    for path in &ens.paths {
        for (t, x) in path.iter().filter(|&(t, _)| t >= t_min) {
            total += 1;
            if x.abs() <= lil_envelope(t)? {
                inside += 1;
            }
        }
    }
    if total == 0 {
        return Err(LilError::EmptyWindow { t_min });
    }
    Ok(inside as f64 / total as f64)
}

fn optional_ratio(r: Result<f64, LilError>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(LilError::NoPositiveSamples { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn envelope(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let ens = ensemble(cfg)?;
    let times = ens.times().to_vec();
    if cfg.wants(OutputFormat::Csv) {
        let mut table = Table::new(["t", "sqrt_t", "lil", "lil_adjusted"]);
        for &t in &times {
            table.push(vec![
                t.into(),
                EnvelopeKind::SqrtT.eval(t).ok().into(),
                EnvelopeKind::Lil.eval(t).ok().into(),
                EnvelopeKind::LilAdjusted.eval(t).ok().into(),
            ]);
        }
        out.csv("envelope.csv", &table);

        let mut ratios = Table::new(["path_index", "limsup_ratio", "liminf_ratio"]);
        let mut limsups = Vec::with_capacity(ens.len());
        for path in &ens.paths {
            let sup = optional_ratio(empirical_limsup_ratio(path, cfg.t_min))?;
            let inf = optional_ratio(empirical_liminf_ratio(path, cfg.t_min))?;
            limsups.extend(sup);
            ratios.push(vec![path.path_index.into(), sup.into(), inf.into()]);
        }
        out.csv("lil_ratios.csv", &ratios);
        out.csv(
            "envelope_summary.csv",
            &Table::key_value([
                ("t_min", cfg.t_min.into()),
                ("lil_coverage", lil_coverage(&ens, cfg.t_min)?.into()),
                ("median_limsup_ratio", quantile(&limsups, 0.5).ok().into()),
            ]),
        );
    }
    if cfg.wants(OutputFormat::Svg) {
        let mut chart = report::single_paths_chart(&ens.sde_label, &ens, COLOR_PATH);
        report::push_envelope(
            &mut chart,
            &EnvelopeSeries::compute_on_domain(EnvelopeKind::Lil, &times),
            "sqrt(2t ln ln t)",
            COLOR_LIL,
        );
        report::push_envelope(
            &mut chart,
            &EnvelopeSeries::compute_on_domain(EnvelopeKind::SqrtT, &times),
            "sqrt(t)",
            COLOR_SQRT,
        );
        out.svg("envelope.svg", &chart)?;
    }
    Ok(())
}

fn barrier(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let sde = cfg.sde();
    let ens = ensemble(cfg)?;
    let root = estimate_barrier(
        &sde,
        BarrierMethod::DeterministicRoot {
            x_max: DEFAULT_ROOT_BRACKET,
        },
        None,
    )?;
    let empirical = estimate_barrier(
        &sde,
        BarrierMethod::EmpiricalQuantile { quantile: cfg.quantile },
        Some(&ens),
    )?;
    if cfg.wants(OutputFormat::Csv) {
        let mut table = Table::new(["method", "quantile", "x_plus", "x_minus"]);
        for est in [root, empirical] {
            table.push(vec![
                est.method.name().into(),
                est.quantile().into(),
                est.x_plus.into(),
                est.x_minus.into(),
            ]);
        }
        out.csv("barrier.csv", &table);
    }
    if cfg.wants(OutputFormat::Svg) {
        let mut chart = report::single_paths_chart(&ens.sde_label, &ens, color(cfg));
        let (t0, t1) = (ens.times()[0], *ens.times().last().unwrap_or(&0.0));
        for (est, label, col) in [
            (root, "drift root", "black"),
            (empirical, "empirical quantile", "orange"),
        ] {
            for level in [est.x_plus, est.x_minus] {
                chart.push(Series::line(label, col, vec![(t0, level), (t1, level)]));
            }
        }
        out.svg("barrier.svg", &chart)?;
    }
    Ok(())
}

fn lattice(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let dist = lattice_evolve(cfg.lattice_steps, cfg.dx);
    let walks = simulate_walk_endpoints(cfg.seed, cfg.walks, cfg.lattice_steps, cfg.dx);
    let ks = ks_distance(&walks, &dist);
    let positions = dist.positions();
    let mut hits = vec![0u64; positions.len()];
    for w in &walks {
        let j = (w / cfg.dx + cfg.lattice_steps as f64).round();
        if j >= 0.0 && (j as usize) < hits.len() {
            hits[j as usize] += 1;
        }
    }
    let freq: Vec<f64> = hits.iter().map(|&h| h as f64 / walks.len() as f64).collect();
    if cfg.wants(OutputFormat::Csv) {
        let mut table = Table::new(["position", "probability", "empirical"]);
        for ((&x, &p), &f) in positions.iter().zip(&dist.probs).zip(&freq) {
            table.push(vec![x.into(), p.into(), f.into()]);
        }
        out.csv("lattice.csv", &table);
        out.csv(
            "lattice_summary.csv",
            &Table::key_value([
                ("steps", cfg.lattice_steps.into()),
                ("dx", cfg.dx.into()),
                ("walks", cfg.walks.into()),
                ("ks_distance", ks.into()),
            ]),
        );
    }
    if cfg.wants(OutputFormat::Svg) {
        let mut chart = Chart::new(format!("{}-step lattice walk", cfg.lattice_steps), "x", "probability");
        chart.push(Series::line(
            "lattice",
            COLOR_FREE,
            positions.iter().copied().zip(dist.probs.iter().copied()).collect(),
        ));
        chart.push(Series::markers(
            "simulated",
            COLOR_BGC,
            positions.iter().copied().zip(freq.iter().copied()).collect(),
        ));
        out.svg("lattice.svg", &chart)?;
    }
    Ok(())
}

fn check(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let report = check_conditions(&cfg.sde(), cfg.radius, cfg.grid_step)?;
    if cfg.wants(OutputFormat::Csv) {
        out.csv(
            "conditions.csv",
            &Table::key_value([
                ("sde", Cell::from(cfg.sde().label())),
                ("lambda1_est", report.lambda1_est.into()),
                ("lambda2_est", report.lambda2_est.into()),
                ("domain_radius", report.domain_radius.into()),
                ("grid_step", report.grid_step.into()),
                ("linear_growth_violated", report.linear_growth_violated.into()),
            ]),
        );
    } else {
        return Err(CliError::Validation(
            "`check` only produces CSV; add csv to `formats`".into(),
        ));
    }
    Ok(())
}
