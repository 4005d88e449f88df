//! Asymptotic bounds and recurrence diagnostics.
//!
//! Envelopes `√t`, `√(2t ln ln t)` and its `e`-shifted variant; Kolmogorov's
//! normalized partial-sum ratio; finite-horizon surrogates of the limsup and
//! liminf path ratios; the scale function and speed measure of a
//! one-dimensional diffusion; and an integral-test classifier for
//! `∫ dt / s(h(t))`.
//!
//! Logarithms are natural throughout.

use std::f64::consts::E;

use thiserror::Error;

use crate::model::{FieldRole, ModelError, ScalarField};
use crate::quad::{self, QuadError, Tolerance};
use crate::simulate::Path;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LilError {
    #[error("t = {t} is outside the envelope domain (the iterated-log envelope is undefined on [0, e))")]
    Domain { t: f64 },
    #[error("no grid times at or after t_min = {t_min}")]
    EmptyWindow { t_min: f64 },
    #[error("path has no positive states at or after t_min = {t_min}")]
    NoPositiveSamples { t_min: f64 },
    #[error("length mismatch: {partial_sums} partial sums vs {variances} variances")]
    LengthMismatch { partial_sums: usize, variances: usize },
    #[error("variances must be strictly increasing (index {index})")]
    NonIncreasingVariance { index: usize },
    #[error("diffusion coefficient vanishes at x = {x}")]
    ZeroDiffusion { x: f64 },
    #[error("integrand 1/s(h(t)) requires s(h(t)) > 0, got {value} at t = {t}")]
    NonPositiveIntegrand { t: f64, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `e^e`, the default start of the ratio windows.
pub const DEFAULT_T_MIN: f64 = 15.154_262_241_479_262;

/// `√(2 t ln ln t)` for `t ≥ e`.
pub fn lil_envelope(t: f64) -> Result<f64, LilError> {
    if !(t >= E) || !t.is_finite() {
        return Err(LilError::Domain { t });
    }
    // ln(ln e) can round a hair below zero; the envelope is pinned to 0 there.
    let lnln = t.ln().ln().max(0.0);
    Ok((2.0 * t * lnln).sqrt())
}

/// `√(2 t ln ln t) − e`.
pub fn adjusted_lil_envelope(t: f64) -> Result<f64, LilError> {
    Ok(lil_envelope(t)? - E)
}

pub fn sqrt_envelope(t: f64) -> Result<f64, LilError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(LilError::Domain { t });
    }
    Ok(t.sqrt())
}

/// The unique `t* > e` where the iterated-log envelope overtakes `√t`,
/// i.e. `ln ln t* = 1/2`. Found by bisection to an absolute width of 1e-10.
pub fn envelope_crossover() -> f64 {
    // sign of lil² − t = t (2 ln ln t − 1)
    let gap = |t: f64| 2.0 * t.ln().ln() - 1.0;
    let (mut lo, mut hi) = (E, E.powf(E));
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    SqrtT,
    Lil,
    LilAdjusted,
}

impl EnvelopeKind {
    pub fn eval(self, t: f64) -> Result<f64, LilError> {
        match self {
            EnvelopeKind::SqrtT => sqrt_envelope(t),
            EnvelopeKind::Lil => lil_envelope(t),
            EnvelopeKind::LilAdjusted => adjusted_lil_envelope(t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeKind::SqrtT => "sqrt_t",
            EnvelopeKind::Lil => "lil",
            EnvelopeKind::LilAdjusted => "lil_adjusted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    pub kind: EnvelopeKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EnvelopeSeries {
    pub fn compute(kind: EnvelopeKind, times: &[f64]) -> Result<Self, LilError> {
        let values = times.iter().map(|&t| kind.eval(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            kind,
            times: times.to_vec(),
            values,
        })
    }

    /// Evaluates on the grid points of `times` that lie inside the domain.
    pub fn compute_on_domain(kind: EnvelopeKind, times: &[f64]) -> Self {
        let lower = match kind {
            EnvelopeKind::SqrtT => 0.0,
            EnvelopeKind::Lil | EnvelopeKind::LilAdjusted => E,
        };
        let kept: Vec<f64> = times.iter().copied().filter(|&t| t >= lower).collect();
        Self::compute(kind, &kept).expect("filtered to the envelope domain")
    }
}

/// `S_n / √(2 B_n ln ln B_n)` elementwise; `None` where `B_n < e`.
pub fn kolmogorov_ratio(partial_sums: &[f64], variances: &[f64]) -> Result<Vec<Option<f64>>, LilError> {
    if partial_sums.len() != variances.len() {
        return Err(LilError::LengthMismatch {
            partial_sums: partial_sums.len(),
            variances: variances.len(),
        });
    }
    if let Some(index) = variances.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(LilError::NonIncreasingVariance { index: index + 1 });
    }
    Ok(partial_sums
        .iter()
        .zip(variances)
        .map(|(&s, &b)| {
            let env = lil_envelope(b).ok()?;
            if env > 0.0 {
                Some(s / env)
            } else {
                None
            }
        })
        .collect())
}

fn check_t_min(t_min: f64) -> Result<(), LilError> {
    if t_min >= E && t_min.is_finite() {
        Ok(())
    } else {
        Err(LilError::Domain { t: t_min })
    }
}

/// `max_{t ≥ t_min} |X(t)| / √(2t ln ln t)` over the path's grid.
pub fn empirical_limsup_ratio(path: &Path, t_min: f64) -> Result<f64, LilError> {
    check_t_min(t_min)?;
    let mut best: Option<f64> = None;
    for (t, x) in path.iter().filter(|&(t, _)| t >= t_min) {
        let env = lil_envelope(t)?;
        if env > 0.0 {
            let r = x.abs() / env;
            best = Some(best.map_or(r, |b| b.max(r)));
        }
    }
    best.ok_or(LilError::EmptyWindow { t_min })
}

/// `min_{t ≥ t_min, X(t) > 0} ln(X(t)/√t) / ln ln t` over the path's grid.
pub fn empirical_liminf_ratio(path: &Path, t_min: f64) -> Result<f64, LilError> {
    check_t_min(t_min)?;
    let mut any_time = false;
    let mut best: Option<f64> = None;
    for (t, x) in path.iter().filter(|&(t, _)| t >= t_min) {
        any_time = true;
        let lnln = t.ln().ln();
        if x > 0.0 && lnln > 0.0 {
            let r = (x / t.sqrt()).ln() / lnln;
            best = Some(best.map_or(r, |b| b.min(r)));
        }
    }
    if !any_time {
        return Err(LilError::EmptyWindow { t_min });
    }
    best.ok_or(LilError::NoPositiveSamples { t_min })
}

/// Anchor point and quadrature settings for the scale/speed computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSpeedSpec {
    pub c: f64,
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub max_subdivisions: usize,
}

impl ScaleSpeedSpec {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            quad_abs_tol: 1e-13,
            quad_rel_tol: 1e-12,
            max_subdivisions: 200_000,
        }
    }

    fn outer(&self) -> Tolerance {
        Tolerance::new(self.quad_abs_tol, self.quad_rel_tol, self.max_subdivisions)
    }

    /// Inner tolerance is a tenth of the outer one.
    fn inner(&self) -> Tolerance {
        self.outer().scaled(0.1)
    }

    fn validate(&self) -> Result<(), LilError> {
        if !self.c.is_finite() {
            return Err(LilError::InvalidArgument(format!(
                "anchor c = {} is not finite",
                self.c
            )));
        }
        if !(self.quad_abs_tol > 0.0 && self.quad_rel_tol > 0.0) {
            return Err(LilError::InvalidArgument(
                "quadrature tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for ScaleSpeedSpec {
    fn default() -> Self {
        Self::new(0.0)
    }
}

const MIN_DIFFUSION: f64 = 1e-12;

fn drift_over_variance(f: &ScalarField, g: &ScalarField, z: f64) -> Result<f64, LilError> {
    let gz = g.try_eval(FieldRole::Diffusion, z, 0.0)?;
    if gz.abs() < MIN_DIFFUSION {
        return Err(LilError::ZeroDiffusion { x: z });
    }
    Ok(f.try_eval(FieldRole::Drift, z, 0.0)? / (gz * gz))
}

/// `s'(x) = exp(−2 ∫_c^x f/g²)`.
fn scale_density(f: &ScalarField, g: &ScalarField, spec: &ScaleSpeedSpec, x: f64) -> Result<f64, LilError> {
    let inner = quad::integrate(|z| drift_over_variance(f, g, z), spec.c, x, spec.inner())?;
    Ok((-2.0 * inner).exp())
}

/// Scale function `s_c(x) = ∫_c^x exp(−2 ∫_c^y f(z)/g²(z) dz) dy`, by nested
/// adaptive Simpson quadrature at `t = 0`.
pub fn scale_function(f: &ScalarField, g: &ScalarField, spec: &ScaleSpeedSpec, x: f64) -> Result<f64, LilError> {
    spec.validate()?;
    if !x.is_finite() {
        return Err(LilError::InvalidArgument(format!("x = {x} is not finite")));
    }
    quad::integrate(|y| scale_density(f, g, spec, y), spec.c, x, spec.outer())
}

/// Speed measure density `m(x) = 2 / (s'(x) g²(x))`.
pub fn speed_measure_density(f: &ScalarField, g: &ScalarField, spec: &ScaleSpeedSpec, x: f64) -> Result<f64, LilError> {
    spec.validate()?;
    let gx = g.try_eval(FieldRole::Diffusion, x, 0.0)?;
    if gx.abs() < MIN_DIFFUSION {
        return Err(LilError::ZeroDiffusion { x });
    }
    Ok(2.0 / (scale_density(f, g, spec, x)? * gx * gx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotooVerdict {
    /// `∫ dt/s(h(t)) = ∞`: limsup of `X/h` is at least one.
    Divergent,
    /// `∫ dt/s(h(t)) < ∞`: limsup of `X/h` is zero.
    Convergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotooReport {
    pub verdict: MotooVerdict,
    /// `I(T_k) = ∫_{t0}^{T_k} dt / s(h(t))` at each horizon.
    pub integrals: Vec<f64>,
    /// Tail bound used by the convergence test, when one was computable.
    pub tail_bound: Option<f64>,
}

/// Increment ratios above this on every one of the last [`MOTOO_WINDOW`]
/// increments mean divergence.
pub const MOTOO_DIVERGENCE_RATIO: f64 = 0.9;
pub const MOTOO_WINDOW: usize = 5;
/// Geometric tail bound below this fraction of the accumulated integral means
/// convergence.
pub const MOTOO_CONVERGENCE_TOL: f64 = 1e-6;

/// Geometric horizons `t0 · factor^k`, `k = 1..=count`.
pub fn geometric_horizons(t0: f64, factor: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| t0 * factor.powi(k as i32)).collect()
}

/// Classifies `∫_{t0}^∞ dt / s(h(t))` from its values at increasing horizons.
pub fn motoo_classify<S, H>(
    mut scale: S,
    h: H,
    t0: f64,
    horizons: &[f64],
    tol: Tolerance,
) -> Result<MotooReport, LilError>
where
    S: FnMut(f64) -> Result<f64, LilError>,
    H: Fn(f64) -> f64,
{
    if !(t0 > 0.0) {
        return Err(LilError::InvalidArgument(format!("t0 must be positive, got {t0}")));
    }
    if horizons.first().is_some_and(|&t| t <= t0) || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LilError::InvalidArgument(
            "horizons must be strictly increasing and exceed t0".into(),
        ));
    }

    let mut integrand = |t: f64| -> Result<f64, LilError> {
        let value = scale(h(t))?;
        if value > 0.0 {
            Ok(1.0 / value)
        } else {
            Err(LilError::NonPositiveIntegrand { t, value })
        }
    };

    let mut integrals = Vec::with_capacity(horizons.len());
    let mut increments = Vec::with_capacity(horizons.len());
    let mut acc = 0.0;
    let mut start = t0;
    for &end in horizons {
        let piece = quad::integrate(&mut integrand, start, end, tol)?;
        acc += piece;
        increments.push(piece);
        integrals.push(acc);
        start = end;
    }

    let ratios: Vec<f64> = increments.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.len() < MOTOO_WINDOW {
        return Ok(MotooReport {
            verdict: MotooVerdict::Inconclusive,
            integrals,
            tail_bound: None,
        });
    }
    let recent = &ratios[ratios.len() - MOTOO_WINDOW..];
    if recent.iter().all(|&r| r > MOTOO_DIVERGENCE_RATIO) {
        return Ok(MotooReport {
            verdict: MotooVerdict::Divergent,
            integrals,
            tail_bound: None,
        });
    }

    let worst = recent.iter().copied().fold(f64::MIN, f64::max);
    let tail_bound = (worst < 1.0).then(|| increments[increments.len() - 1] * worst / (1.0 - worst));
    let verdict = match tail_bound {
        Some(tail) if tail < MOTOO_CONVERGENCE_TOL * acc => MotooVerdict::Convergent,
        _ => MotooVerdict::Inconclusive,
    };
    Ok(MotooReport {
        verdict,
        integrals,
        tail_bound,
    })
}
