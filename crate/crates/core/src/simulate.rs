//! Euler–Maruyama integration of BGC diffusions.
//!
//! Every path draws its Gaussian increments from its own counter-based
//! substream (ChaCha8 keyed by the master seed, stream id = path index), so a
//! path's states depend only on `(sde, config, path_index)` and never on how
//! many workers ran the ensemble or in which order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{bgc_drift, BgcSde, FieldRole, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("path {path_index} exploded at step {step} (state {state})")]
    PathExplosion { path_index: usize, step: usize, state: f64 },
    #[error("path {path_index}, step {step}: {source}")]
    Model {
        path_index: usize,
        step: usize,
        #[source]
        source: ModelError,
    },
    #[error("{} of the ensemble paths failed; first: {}", .0.len(), .0[0])]
    Ensemble(Vec<SimError>),
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// Failure of a single Euler–Maruyama step, before the caller attaches the
/// path index and step number.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("state became non-finite ({0})")]
    NonFinite(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Negate every Gaussian draw.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(dt: f64, n_steps: usize, n_paths: usize, master_seed: u64) -> Self {
        Self {
            dt,
            n_steps,
            n_paths,
            master_seed,
            antithetic: false,
        }
    }

    /// 1,000 unit steps over 1,000 paths.
    pub fn experiment_default(master_seed: u64) -> Self {
        Self::new(1.0, 1000, 1000, master_seed)
    }

    pub fn with_antithetic(mut self, antithetic: bool) -> Self {
        self.antithetic = antithetic;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(SimError::InvalidConfig("n_steps must be positive".into()));
        }
        if self.n_paths == 0 {
            return Err(SimError::InvalidConfig("n_paths must be positive".into()));
        }
        if !self.horizon().is_finite() {
            return Err(SimError::InvalidConfig("horizon dt * n_steps is not finite".into()));
        }
        Ok(())
    }

    /// The shared time grid `t_k = k dt`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| k as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub path_index: usize,
}

impl Path {
    pub fn terminal(&self) -> f64 {
        *self.states.last().expect("paths are never empty")
    }

    pub fn max_abs(&self) -> f64 {
        self.states.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.states.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub paths: Vec<Path>,
    pub config: SimConfig,
    pub sde_label: String,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.paths[0].times
    }

    /// `max` over paths and times of `|X(t)|`.
    pub fn max_abs(&self) -> f64 {
        self.paths.iter().map(Path::max_abs).fold(0.0, f64::max)
    }
}

/// Deterministic stream of standard normals for one path.
///
/// Uniforms come from the ChaCha8 block function at stream `path_index`;
/// normals are produced by the Marsaglia polar method.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(path_index);
        Self { rng, spare: None }
    }

    /// Uniform on the open interval (-1, 1), 53-bit resolution.
    fn symmetric_uniform(&mut self) -> f64 {
        loop {
            let bits = self.rng.next_u64() >> 11;
            let u = (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            let v = 2.0 * u - 1.0;
            if v > -1.0 && v < 1.0 {
                return v;
            }
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = self.symmetric_uniform();
            let v = self.symmetric_uniform();
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * scale);
                return u * scale;
            }
        }
    }
}

impl Iterator for GaussianStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

pub fn gaussian_stream(master_seed: u64, path_index: usize) -> GaussianStream {
    GaussianStream::new(master_seed, path_index as u64)
}

/// One Euler–Maruyama step `x + F(x,t) dt + g(x,t) √dt z`.
pub fn em_step(sde: &BgcSde, x: f64, t: f64, dt: f64, z: f64) -> Result<f64, StepError> {
    let drift = bgc_drift(sde, x, t)?;
    let g = sde.diffusion.try_eval(FieldRole::Diffusion, x, t)?;
    let next = x + drift * dt + g * dt.sqrt() * z;
    if next.is_finite() {
        Ok(next)
    } else {
        Err(StepError::NonFinite(next))
    }
}

pub fn simulate_path(sde: &BgcSde, config: &SimConfig, path_index: usize) -> Result<Path, SimError> {
    config.validate()?;
    if path_index >= config.n_paths {
        return Err(SimError::InvalidConfig(format!(
            "path index {path_index} out of range for {} paths",
            config.n_paths
        )));
    }
    integrate_path(sde, config, path_index)
}

fn integrate_path(sde: &BgcSde, config: &SimConfig, path_index: usize) -> Result<Path, SimError> {
    let times = config.times();
    let mut states = Vec::with_capacity(config.n_steps + 1);
    let sign = if config.antithetic { -1.0 } else { 1.0 };
    let mut stream = gaussian_stream(config.master_seed, path_index);
    let mut x = sde.x0;
    states.push(x);
    for (step, &t) in times[..config.n_steps].iter().enumerate() {
        let z = sign * stream.next_normal();
        x = em_step(sde, x, t, config.dt, z).map_err(|err| match err {
            StepError::NonFinite(state) => SimError::PathExplosion {
                path_index,
                step: step + 1,
                state,
            },
            StepError::Model(ModelError::NonFinite { .. }) => SimError::PathExplosion {
                path_index,
                step: step + 1,
                state: x,
            },
            StepError::Model(source) => SimError::Model {
                path_index,
                step: step + 1,
                source,
            },
        })?;
        states.push(x);
    }
    Ok(Path {
        times,
        states,
        path_index,
    })
}

/// Simulates all paths on the current rayon pool.
pub fn run_ensemble(sde: &BgcSde, config: &SimConfig) -> Result<Ensemble, SimError> {
    config.validate()?;
    let results: Vec<Result<Path, SimError>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| integrate_path(sde, config, i))
        .collect();
    collect_ensemble(sde, config, results)
}

/// Simulates all paths on a dedicated pool of `workers` threads.
pub fn run_ensemble_with_workers(sde: &BgcSde, config: &SimConfig, workers: usize) -> Result<Ensemble, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Workers(e.to_string()))?;
    pool.install(|| run_ensemble(sde, config))
}

fn collect_ensemble(
    sde: &BgcSde,
    config: &SimConfig,
    results: Vec<Result<Path, SimError>>,
) -> Result<Ensemble, SimError> {
    let mut paths = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(path) => paths.push(path),
            Err(err) => failures.push(err),
        }
    }
    if !failures.is_empty() {
        return Err(SimError::Ensemble(failures));
    }
    Ok(Ensemble {
        paths,
        config: *config,
        sde_label: sde.label(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarField;
    use approx::assert_abs_diff_eq;

    fn deterministic(mu: f64, beta: Option<f64>, x0: f64) -> BgcSde {
        BgcSde::constant_coefficients(mu, 0.0, beta, x0)
    }

    #[test]
    fn stream_moments() {
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for z in gaussian_stream(42, 0).take(n) {
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.02, "variance {var}");
    }

    #[test]
    fn stream_is_deterministic_and_per_path() {
        let a: Vec<f64> = gaussian_stream(42, 0).take(100).collect();
        let b: Vec<f64> = gaussian_stream(42, 0).take(100).collect();
        let c: Vec<f64> = gaussian_stream(42, 1).take(100).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().zip(&c).filter(|(x, y)| x == y).count() < 5);

        // Consuming another stream first does not perturb this one.
        let mut other = gaussian_stream(42, 1);
        for _ in 0..1000 {
            other.next_normal();
        }
        let again: Vec<f64> = gaussian_stream(42, 0).take(100).collect();
        assert_eq!(a, again);
    }

    #[test]
    fn em_step_examples() {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 2.0);
        assert_abs_diff_eq!(em_step(&sde, 2.0, 0.0, 0.01, 0.0).unwrap(), 1.9996, epsilon = 1e-15);
        assert_abs_diff_eq!(em_step(&sde, 2.0, 0.0, 0.01, 1.0).unwrap(), 2.0996, epsilon = 1e-14);
        assert_eq!(em_step(&sde, 0.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn em_step_reports_non_finite_state() {
        let sde = BgcSde::constant_coefficients(f64::MAX, 0.0, None, 0.0);
        assert!(matches!(
            em_step(&sde, f64::MAX, 0.0, 10.0, 0.0),
            Err(StepError::NonFinite(_))
        ));
    }

    #[test]
    fn constant_path_without_dynamics() {
        let path = simulate_path(&deterministic(0.0, None, 5.0), &SimConfig::new(1.0, 50, 1, 7), 0).unwrap();
        assert!(path.states.iter().all(|&x| x == 5.0));
        assert_eq!(path.times.len(), 51);
        assert_eq!(path.times[0], 0.0);
    }

    #[test]
    fn deterministic_drift_line() {
        let path = simulate_path(&deterministic(0.05, None, 0.0), &SimConfig::new(1.0, 1000, 1, 7), 0).unwrap();
        for (k, &x) in path.states.iter().enumerate() {
            assert_abs_diff_eq!(x, 0.05 * k as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn deterministic_constrained_path_approaches_root_from_below() {
        // Oracle: RK4 on x' = 0.05 - x^2/100 with a fine step converges to √5.
        let rhs = |x: f64| 0.05 - x * x / 100.0;
        let (mut x, h) = (0.0_f64, 0.01);
        for _ in 0..200_000 {
            let k1 = rhs(x);
            let k2 = rhs(x + 0.5 * h * k1);
            let k3 = rhs(x + 0.5 * h * k2);
            let k4 = rhs(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let root = 5.0_f64.sqrt();
        assert_abs_diff_eq!(x, root, epsilon = 1e-8);

        let path = simulate_path(
            &deterministic(0.05, Some(100.0), 0.0),
            &SimConfig::new(1.0, 1000, 1, 7),
            0,
        )
        .unwrap();
        for w in path.states.windows(2) {
            assert!(w[1] >= w[0]);
            assert!(w[1] <= root + 4.0 * f64::EPSILON);
        }
        assert_abs_diff_eq!(path.terminal(), x, epsilon = 1e-6);
    }

    #[test]
    fn explosion_is_reported_with_indices() {
        let sde = BgcSde::unconstrained(
            ScalarField::autonomous("x^3", |x| x * x * x),
            ScalarField::constant(0.0),
            2.0,
        );
        match simulate_path(&sde, &SimConfig::new(1.0, 100, 1, 1), 0) {
            Err(SimError::PathExplosion { path_index, step, .. }) => {
                assert_eq!(path_index, 0);
                assert!(step > 1 && step < 100);
            }
            other => panic!("expected explosion, got {other:?}"),
        }
        match run_ensemble(&sde, &SimConfig::new(1.0, 100, 3, 1)) {
            Err(SimError::Ensemble(errs)) => assert_eq!(errs.len(), 3),
            other => panic!("expected ensemble failure, got {other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        let sde = BgcSde::standard_wiener();
        assert!(run_ensemble(&sde, &SimConfig::new(0.0, 10, 1, 0)).is_err());
        assert!(run_ensemble(&sde, &SimConfig::new(1.0, 0, 1, 0)).is_err());
        assert!(run_ensemble(&sde, &SimConfig::new(1.0, 10, 0, 0)).is_err());
        assert!(simulate_path(&sde, &SimConfig::new(1.0, 10, 2, 0), 2).is_err());
    }

    #[test]
    fn ensemble_of_deterministic_lines() {
        let ens = run_ensemble(&deterministic(0.05, None, 0.0), &SimConfig::new(1.0, 1000, 3, 9)).unwrap();
        assert_eq!(ens.len(), 3);
        assert_eq!(ens.paths[0].states, ens.paths[1].states);
        assert_eq!(ens.paths[1].states, ens.paths[2].states);
    }

    #[test]
    fn ensemble_is_reproducible_and_schedule_independent() {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
        let cfg = SimConfig::new(1.0, 200, 64, 42);
        let a = run_ensemble_with_workers(&sde, &cfg, 1).unwrap();
        let b = run_ensemble_with_workers(&sde, &cfg, 8).unwrap();
        let c = run_ensemble(&sde, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        for path in &a.paths {
            assert_eq!(path, &simulate_path(&sde, &cfg, path.path_index).unwrap());
        }
    }

    #[test]
    fn zero_constraint_matches_plain_sde_bitwise() {
        let cfg = SimConfig::new(0.5, 300, 16, 3);
        let bgc = BgcSde::constant_coefficients(0.05, 1.3, Some(100.0), 0.0).without_constraint();
        let plain = BgcSde::unconstrained(ScalarField::constant(0.05), ScalarField::constant(1.3), 0.0);
        let a = run_ensemble(&bgc, &cfg).unwrap();
        let b = run_ensemble(&plain, &cfg).unwrap();
        for (p, q) in a.paths.iter().zip(&b.paths) {
            let pb: Vec<u64> = p.states.iter().map(|x| x.to_bits()).collect();
            let qb: Vec<u64> = q.states.iter().map(|x| x.to_bits()).collect();
            assert_eq!(pb, qb);
        }
    }

    #[test]
    fn antithetic_mode_negates_states() {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
        let cfg = SimConfig::new(1.0, 500, 8, 11);
        let a = run_ensemble(&sde, &cfg).unwrap();
        let b = run_ensemble(&sde, &cfg.with_antithetic(true)).unwrap();
        for (p, q) in a.paths.iter().zip(&b.paths) {
            for (x, y) in p.states.iter().zip(&q.states) {
                assert_eq!(*x, -*y);
            }
        }
    }

    #[test]
    fn negative_sigma_is_accepted() {
        let sde = BgcSde::constant_coefficients(0.0, -1.5, Some(100.0), 0.0);
        let ens = run_ensemble(&sde, &SimConfig::new(1.0, 100, 4, 5)).unwrap();
        assert_eq!(ens.len(), 4);
    }

    #[test]
    fn stronger_constraint_never_widens_excursions() {
        let cfg = SimConfig::new(1.0, 1000, 200, 42);
        let spread: Vec<f64> = [400.0, 100.0, 25.0]
            .iter()
            .map(|&beta| {
                run_ensemble(&BgcSde::constant_coefficients(0.0, 1.0, Some(beta), 0.0), &cfg)
                    .unwrap()
                    .max_abs()
            })
            .collect();
        assert!(spread[0] >= spread[1] && spread[1] >= spread[2], "{spread:?}");
    }

    #[test]
    fn constraint_shrinks_terminal_spread() {
        let cfg = SimConfig::experiment_default(42);
        let free = run_ensemble(&BgcSde::constant_coefficients(0.0, 1.0, None, 0.0), &cfg).unwrap();
        let bgc = run_ensemble(&BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0), &cfg).unwrap();
        let sd = |e: &Ensemble| {
            let xs: Vec<f64> = e.paths.iter().map(Path::terminal).collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        };
        assert!(sd(&bgc) < sd(&free));
    }
}
