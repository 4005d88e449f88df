use super::moments::quantile_sorted;
use super::{pooled_samples, StatsError};
use crate::model::{bgc_drift, BgcSde};
use crate::simulate::Ensemble;

pub const DEFAULT_BARRIER_QUANTILE: f64 = 0.995;
pub const DEFAULT_ROOT_BRACKET: f64 = 1.0e3;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierMethod {
    /// Roots of `F(x) = f(x) − sgn(x) Ψ(x)` at `t = 0` on `(0, x_max]` and
    /// `[−x_max, 0)`. A side where `F` points back toward the origin
    /// everywhere reports its barrier at `0`.
    DeterministicRoot { x_max: f64 },
    /// Upper and lower `quantile` of every simulated state.
    EmpiricalQuantile { quantile: f64 },
}

impl BarrierMethod {
    pub fn default_for(sde: &BgcSde) -> Self {
        if sde.is_autonomous() {
            BarrierMethod::DeterministicRoot {
                x_max: DEFAULT_ROOT_BRACKET,
            }
        } else {
            BarrierMethod::EmpiricalQuantile {
                quantile: DEFAULT_BARRIER_QUANTILE,
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BarrierMethod::DeterministicRoot { .. } => "deterministic_root",
            BarrierMethod::EmpiricalQuantile { .. } => "empirical_quantile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierEstimate {
    pub x_plus: f64,
    pub x_minus: f64,
    pub method: BarrierMethod,
}

impl BarrierEstimate {
    pub fn quantile(&self) -> Option<f64> {
        match self.method {
            BarrierMethod::EmpiricalQuantile { quantile } => Some(quantile),
            BarrierMethod::DeterministicRoot { .. } => None,
        }
    }
}

/// Locates the hidden reflecting levels of a constrained diffusion.
pub fn estimate_barrier(
    sde: &BgcSde,
    method: BarrierMethod,
    ens: Option<&Ensemble>,
) -> Result<BarrierEstimate, StatsError> {
    let (x_plus, x_minus) = match method {
        BarrierMethod::DeterministicRoot { x_max } => {
            if !(x_max > 0.0 && x_max.is_finite()) {
                return Err(StatsError::InvalidArgument(format!(
                    "root bracket must be positive, got {x_max}"
                )));
            }
            let drift = |x: f64| bgc_drift(sde, x, 0.0);
            (side_root(&drift, x_max, 1.0)?, side_root(&drift, x_max, -1.0)?)
        }
        BarrierMethod::EmpiricalQuantile { quantile } => {
            if !(quantile > 0.5 && quantile < 1.0) {
                return Err(StatsError::InvalidArgument(format!(
                    "barrier quantile must lie in (0.5, 1), got {quantile}"
                )));
            }
            let ens = ens.ok_or(StatsError::MissingEnsemble)?;
            let mut states = pooled_samples(ens, f64::NEG_INFINITY);
            if states.is_empty() {
                return Err(StatsError::Degenerate("ensemble has no states".into()));
            }
            states.sort_by(f64::total_cmp);
            (
                quantile_sorted(&states, quantile),
                quantile_sorted(&states, 1.0 - quantile),
            )
        }
    };
    Ok(BarrierEstimate {
        x_plus,
        x_minus,
        method,
    })
}

/// Root of the drift on one side of the origin (`side` = ±1).
fn side_root<F>(drift: &F, x_max: f64, side: f64) -> Result<f64, StatsError>
where
    F: Fn(f64) -> Result<f64, crate::model::ModelError>,
{
    let near = side * x_max * 1e-15;
    let far = side * x_max;
    let f_near = drift(near)?;
    let f_far = drift(far)?;

    if f_near.signum() != f_far.signum() && f_near != 0.0 && f_far != 0.0 {
        let (mut a, mut b, mut fa) = (near, far, f_near);
        while (b - a).abs() > ROOT_TOL {
            let mid = 0.5 * (a + b);
            let fm = drift(mid)?;
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        return Ok(0.5 * (a + b));
    }
    if f_far == 0.0 {
        return Ok(far);
    }
    // Restoring on the whole bracket: the flow crosses the origin, so this
    // side's barrier collapses onto it.
    if side * f_near <= 0.0 && side * f_far < 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if side > 0.0 { (0.0, x_max) } else { (-x_max, 0.0) };
    Err(StatsError::NoRoot {
        side: if side > 0.0 { "positive" } else { "negative" },
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{run_ensemble, SimConfig};

    const ROOT: BarrierMethod = BarrierMethod::DeterministicRoot {
        x_max: DEFAULT_ROOT_BRACKET,
    };

    #[test]
    fn positive_drift_root() {
        let sde = BgcSde::constant_coefficients(0.05, 1.0, Some(100.0), 0.0);
        let b = estimate_barrier(&sde, ROOT, None).unwrap();
        assert!((b.x_plus - 5.0f64.sqrt()).abs() < 1e-9);
        assert!((b.x_plus - 2.2360680).abs() < 1e-7);
        // F = 0.05 + x²/100 > 0 on the negative side pushes every state back
        // across the origin.
        assert_eq!(b.x_minus, 0.0);
    }

    #[test]
    fn zero_drift_root_at_origin() {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
        let b = estimate_barrier(&sde, ROOT, None).unwrap();
        assert_eq!(b.x_plus, 0.0);
        assert_eq!(b.x_minus, 0.0);
        assert_eq!(b.quantile(), None);
    }

    #[test]
    fn scale_consistency() {
        for &beta in &[25.0, 100.0, 400.0] {
            for &mu in &[0.01, 0.05] {
                let sde = BgcSde::constant_coefficients(mu, 1.0, Some(beta), 0.0);
                let b = estimate_barrier(&sde, ROOT, None).unwrap();
                assert!((b.x_plus - (beta * mu).sqrt()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn no_root_is_reported() {
        let sde = BgcSde::constant_coefficients(0.05, 1.0, None, 0.0);
        assert!(matches!(
            estimate_barrier(&sde, ROOT, None),
            Err(StatsError::NoRoot { side: "positive", .. })
        ));
    }

    #[test]
    fn empirical_requires_ensemble_and_valid_quantile() {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
        let q = BarrierMethod::EmpiricalQuantile { quantile: 0.995 };
        assert_eq!(estimate_barrier(&sde, q, None), Err(StatsError::MissingEnsemble));
        let ens = run_ensemble(&sde, &SimConfig::new(1.0, 100, 10, 1)).unwrap();
        let bad = BarrierMethod::EmpiricalQuantile { quantile: 1.0 };
        assert!(estimate_barrier(&sde, bad, Some(&ens)).is_err());
        let b = estimate_barrier(&sde, q, Some(&ens)).unwrap();
        assert!(b.x_minus <= 0.0 && 0.0 <= b.x_plus);
        assert_eq!(b.quantile(), Some(0.995));
    }

    #[test]
    fn default_method_follows_autonomy() {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
        assert_eq!(BarrierMethod::default_for(&sde).name(), "deterministic_root");
        let timed = sde
            .clone()
            .with_constraint(crate::model::ScalarField::new("x^2 t", |x, t| x * x * t));
        assert_eq!(BarrierMethod::default_for(&timed).name(), "empirical_quantile");
    }
}
