//! SDE data model: coefficient fields, the constrained drift and numerical
//! well-posedness diagnostics.
//!
//! A BGC diffusion is the Itô SDE
//!
//! ```text
//! dX = (f(X,t) - sgn(X) Ψ(X,t)) dt + g(X,t) dW
//! ```
//!
//! where the nonnegative constraint field `Ψ` pulls the state back toward the
//! origin from both sides. Setting `Ψ ≡ 0` recovers the plain diffusion.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Which coefficient of a [`BgcSde`] a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Drift,
    Diffusion,
    Constraint,
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FieldRole::Drift => "drift",
            FieldRole::Diffusion => "diffusion",
            FieldRole::Constraint => "constraint",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{role} field `{label}` is not finite at x={x}, t={t}")]
    NonFinite {
        role: FieldRole,
        label: String,
        x: f64,
        t: f64,
    },
    #[error("constraint field `{label}` is negative ({value}) at x={x}, t={t}")]
    NegativeConstraint { label: String, value: f64, x: f64, t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

type FieldFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A real-valued coefficient `(x, t) -> value` with a display label and the
/// named constants it was built from.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<FieldFn>,
    label: String,
    params: BTreeMap<String, f64>,
    autonomous: bool,
    identically_zero: bool,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("params", &self.params)
            .field("autonomous", &self.autonomous)
            .finish()
    }
}

impl ScalarField {
    /// A general time-dependent field.
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            label: label.into(),
            params: BTreeMap::new(),
            autonomous: false,
            identically_zero: false,
        }
    }

    /// A field depending on the state only.
    pub fn autonomous<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut field = Self::new(label, move |x, _t| eval(x));
        field.autonomous = true;
        field
    }

    pub fn constant(value: f64) -> Self {
        Self::autonomous(format!("{value}"), move |_| value).with_param("c", value)
    }

    pub fn zero() -> Self {
        let mut field = Self::constant(0.0);
        field.label = "0".to_string();
        field.identically_zero = true;
        field
    }

    /// `Ψ(x) = x² / β`, the constraint used throughout the experiments.
    pub fn quadratic_constraint(beta: f64) -> Self {
        Self::autonomous(format!("x^2/{beta}"), move |x| x * x / beta).with_param("beta", beta)
    }

    /// `Ψ(x) = k |x|`.
    pub fn abs_linear(k: f64) -> Self {
        Self::autonomous(format!("{k}|x|"), move |x| k * x.abs()).with_param("k", k)
    }

    /// `f(x) = a x + b`.
    pub fn linear(slope: f64, intercept: f64) -> Self {
        Self::autonomous(format!("{slope}x+{intercept}"), move |x| slope * x + intercept)
            .with_param("slope", slope)
            .with_param("intercept", intercept)
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.eval)(x, t)
    }

    /// Evaluates and rejects non-finite results.
    pub fn try_eval(&self, role: FieldRole, x: f64, t: f64) -> Result<f64, ModelError> {
        let value = self.eval(x, t);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ModelError::NonFinite {
                role,
                label: self.label.clone(),
                x,
                t,
            })
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    /// True when the field was declared time-invariant at construction.
    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    /// True only for [`ScalarField::zero`].
    pub fn is_identically_zero(&self) -> bool {
        self.identically_zero
    }
}

/// The `(f, g, Ψ, x₀)` quadruple of one constrained diffusion.
#[derive(Debug, Clone)]
pub struct BgcSde {
    pub drift: ScalarField,
    pub diffusion: ScalarField,
    pub constraint: ScalarField,
    pub x0: f64,
}

impl BgcSde {
    pub fn new(drift: ScalarField, diffusion: ScalarField, constraint: ScalarField, x0: f64) -> Self {
        Self {
            drift,
            diffusion,
            constraint,
            x0,
        }
    }

    /// Standard Itô diffusion `dX = f dt + g dW` with no constraint.
    pub fn unconstrained(drift: ScalarField, diffusion: ScalarField, x0: f64) -> Self {
        Self::new(drift, diffusion, ScalarField::zero(), x0)
    }

    /// Constant drift `mu` and diffusion `sigma`, optionally constrained by
    /// `x²/β`.
    pub fn constant_coefficients(mu: f64, sigma: f64, beta: Option<f64>, x0: f64) -> Self {
        let constraint = match beta {
            Some(beta) => ScalarField::quadratic_constraint(beta),
            None => ScalarField::zero(),
        };
        Self::new(
            ScalarField::constant(mu).with_param("mu", mu),
            ScalarField::constant(sigma).with_param("sigma", sigma),
            constraint,
            x0,
        )
    }

    /// Wiener process scaled by `sigma` (`f = 0`, `g = sigma`).
    pub fn wiener(sigma: f64) -> Self {
        Self::constant_coefficients(0.0, sigma, None, 0.0)
    }

    /// Standard Wiener process (`f = 0`, `g = 1`).
    pub fn standard_wiener() -> Self {
        Self::wiener(1.0)
    }

    pub fn with_constraint(mut self, constraint: ScalarField) -> Self {
        self.constraint = constraint;
        self
    }

    /// The same diffusion with `Ψ ≡ 0`.
    pub fn without_constraint(&self) -> Self {
        self.clone().with_constraint(ScalarField::zero())
    }

    pub fn is_constrained(&self) -> bool {
        !self.constraint.is_identically_zero()
    }

    pub fn is_autonomous(&self) -> bool {
        self.drift.is_autonomous() && self.diffusion.is_autonomous() && self.constraint.is_autonomous()
    }

    pub fn label(&self) -> String {
        format!(
            "f={}, g={}, psi={}, x0={}",
            self.drift.label(),
            self.diffusion.label(),
            self.constraint.label(),
            self.x0
        )
    }

    fn constraint_value(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        let value = self.constraint.try_eval(FieldRole::Constraint, x, t)?;
        if value < 0.0 {
            return Err(ModelError::NegativeConstraint {
                label: self.constraint.label().to_string(),
                value,
                x,
                t,
            });
        }
        Ok(value)
    }

    /// `G(x,t) = g(x,t) - sgn(x) Ψ(x,t)`, used only by the growth checks.
    fn constrained_diffusion(&self, x: f64, t: f64) -> Result<f64, ModelError> {
        let g = self.diffusion.try_eval(FieldRole::Diffusion, x, t)?;
        Ok(g - f64::from(sgn(x)) * self.constraint_value(x, t)?)
    }
}

/// Sign of `x`, with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Constrained drift `f(x,t) - sgn(x) Ψ(x,t)`.
///
/// The constraint term is skipped entirely at the origin so the result is
/// exactly `f(0, t)` there.
pub fn bgc_drift(sde: &BgcSde, x: f64, t: f64) -> Result<f64, ModelError> {
    let f = sde.drift.try_eval(FieldRole::Drift, x, t)?;
    match sgn(x) {
        0 => Ok(f),
        s => Ok(f - f64::from(s) * sde.constraint_value(x, t)?),
    }
}

/// Asymptotic coefficients `L∞ = lim x f(x)` and `σ = lim g(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub l_inf: f64,
    pub sigma_lim: f64,
    /// `L∞ > σ²/2`.
    pub well_posed: bool,
}

impl AsymptoticParams {
    pub fn new(l_inf: f64, sigma_lim: f64) -> Self {
        Self {
            l_inf,
            sigma_lim,
            well_posed: l_inf > sigma_lim * sigma_lim / 2.0,
        }
    }

    /// Reads the limits off the fields at a single large state `x_far`.
    pub fn estimate(drift: &ScalarField, diffusion: &ScalarField, x_far: f64) -> Result<Self, ModelError> {
        let f = drift.try_eval(FieldRole::Drift, x_far, 0.0)?;
        let g = diffusion.try_eval(FieldRole::Diffusion, x_far, 0.0)?;
        Ok(Self::new(x_far * f, g))
    }
}

/// Grid-scan estimates of the Lipschitz and linear-growth constants of the
/// constrained coefficients `(F, G)` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub lambda1_est: f64,
    pub lambda2_est: f64,
    pub domain_radius: f64,
    pub grid_step: f64,
    pub linear_growth_violated: bool,
}

/// Scan settings for [`check_conditions_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionScan {
    pub domain_radius: f64,
    pub grid_step: f64,
    /// Linear growth is flagged when doubling the radius multiplies the
    /// growth estimate by more than this.
    pub growth_factor: f64,
}

impl ConditionScan {
    pub const DEFAULT_GROWTH_FACTOR: f64 = 1.5;

    pub fn new(domain_radius: f64, grid_step: f64) -> Self {
        Self {
            domain_radius,
            grid_step,
            growth_factor: Self::DEFAULT_GROWTH_FACTOR,
        }
    }
}

pub fn check_conditions(sde: &BgcSde, domain_radius: f64, grid_step: f64) -> Result<ConditionReport, ModelError> {
    check_conditions_with(sde, ConditionScan::new(domain_radius, grid_step))
}

pub fn check_conditions_with(sde: &BgcSde, scan: ConditionScan) -> Result<ConditionReport, ModelError> {
    let ConditionScan {
        domain_radius,
        grid_step,
        growth_factor,
    } = scan;
    if !(domain_radius > 0.0 && domain_radius.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "domain radius must be positive, got {domain_radius}"
        )));
    }
    if !(grid_step > 0.0 && grid_step < domain_radius) {
        return Err(ModelError::InvalidArgument(format!(
            "grid step must lie in (0, {domain_radius}), got {grid_step}"
        )));
    }
    if !(growth_factor >= 1.0) {
        return Err(ModelError::InvalidArgument(format!(
            "growth factor must be at least 1, got {growth_factor}"
        )));
    }

    let (lambda1_est, lambda2_est) = scan_constants(sde, domain_radius, grid_step)?;
    let (_, lambda2_wide) = scan_constants(sde, 2.0 * domain_radius, grid_step)?;

    Ok(ConditionReport {
        lambda1_est,
        lambda2_est,
        domain_radius,
        grid_step,
        linear_growth_violated: lambda2_wide > growth_factor * lambda2_est,
    })
}

fn scan_constants(sde: &BgcSde, radius: f64, step: f64) -> Result<(f64, f64), ModelError> {
    let n = (2.0 * radius / step).round() as usize;
    let t = 0.0;
    let mut lambda1 = 0.0_f64;
    let mut lambda2 = 0.0_f64;
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 0..=n {
        let x = (-radius + i as f64 * step).min(radius);
        let big_f = bgc_drift(sde, x, t)?;
        let big_g = sde.constrained_diffusion(x, t)?;
        lambda2 = lambda2.max((big_f * big_f + big_g * big_g) / (1.0 + x * x));
        if let Some((px, pf, pg)) = prev {
            let dx = x - px;
            if dx > 0.0 {
                let slope = ((big_f - pf).abs() / dx).max((big_g - pg).abs() / dx);
                lambda1 = lambda1.max(slope);
            }
        }
        prev = Some((x, big_f, big_g));
    }
    Ok((lambda1, lambda2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic_sde(mu: f64) -> BgcSde {
        BgcSde::constant_coefficients(mu, 1.0, Some(100.0), 0.0)
    }

    #[test]
    fn sgn_values() {
        assert_eq!(sgn(3.2), 1);
        assert_eq!(sgn(0.0), 0);
        assert_eq!(sgn(-0.0), 0);
        assert_eq!(sgn(-1.7), -1);
    }

    #[test]
    fn drift_examples() {
        let sde = BgcSde::new(
            ScalarField::constant(0.05),
            ScalarField::constant(1.0),
            ScalarField::quadratic_constraint(100.0),
            0.0,
        );
        assert_abs_diff_eq!(bgc_drift(&sde, 10.0, 0.0).unwrap(), -0.95, epsilon = 1e-15);
        assert_eq!(bgc_drift(&sde, 0.0, 0.0).unwrap(), 0.05);
        assert_abs_diff_eq!(bgc_drift(&sde, -10.0, 0.0).unwrap(), 1.05, epsilon = 1e-15);
    }

    #[test]
    fn drift_at_origin_ignores_constraint() {
        let sde = BgcSde::new(
            ScalarField::constant(0.05),
            ScalarField::constant(1.0),
            ScalarField::autonomous("nan-at-zero", |x| if x == 0.0 { f64::NAN } else { 1.0 }),
            0.0,
        );
        assert_eq!(bgc_drift(&sde, 0.0, 0.0).unwrap(), 0.05);
    }

    #[test]
    fn non_finite_field_names_role() {
        let sde = BgcSde::new(
            ScalarField::autonomous("1/x", |x| 1.0 / x),
            ScalarField::constant(1.0),
            ScalarField::zero(),
            0.0,
        );
        match bgc_drift(&sde, 0.0, 0.0) {
            Err(ModelError::NonFinite { role, label, .. }) => {
                assert_eq!(role, FieldRole::Drift);
                assert_eq!(label, "1/x");
            }
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn negative_constraint_rejected() {
        let sde = BgcSde::standard_wiener().with_constraint(ScalarField::constant(-1.0));
        assert!(matches!(
            bgc_drift(&sde, 1.0, 0.0),
            Err(ModelError::NegativeConstraint { .. })
        ));
    }

    #[test]
    fn zero_constraint_recovers_plain_drift() {
        let sde = BgcSde::unconstrained(ScalarField::new("x+t", |x, t| x + t), ScalarField::constant(1.0), 0.0);
        for &x in &[-3.0, -0.5, 0.0, 0.5, 3.0] {
            assert_eq!(bgc_drift(&sde, x, 2.0).unwrap(), x + 2.0);
        }
    }

    #[test]
    fn process_classes_are_representable() {
        let standard_ito = BgcSde::unconstrained(
            ScalarField::new("x t", |x, t| x * t),
            ScalarField::new("1+t", |_, t| 1.0 + t),
            0.0,
        );
        let geometric_ito = BgcSde::unconstrained(ScalarField::linear(0.1, 0.0), ScalarField::linear(0.2, 0.0), 1.0);
        let geometric_wiener = BgcSde::wiener(2.0);
        let standard_wiener = BgcSde::standard_wiener();
        assert!(!standard_ito.is_autonomous());
        assert!(geometric_ito.is_autonomous());
        assert_eq!(geometric_wiener.diffusion.eval(5.0, 1.0), 2.0);
        assert_eq!(standard_wiener.drift.eval(5.0, 1.0), 0.0);
        assert!(!standard_wiener.is_constrained());
        assert!(quadratic_sde(0.0).is_constrained());
    }

    #[test]
    fn asymptotic_params_flag() {
        assert!(AsymptoticParams::new(1.0, 1.0).well_posed);
        assert!(!AsymptoticParams::new(0.5, 1.0).well_posed);
        assert!(!AsymptoticParams::new(0.4, 1.0).well_posed);
        let est = AsymptoticParams::estimate(
            &ScalarField::autonomous("2/x", |x| 2.0 / x),
            &ScalarField::constant(1.0),
            1e6,
        )
        .unwrap();
        assert_abs_diff_eq!(est.l_inf, 2.0, epsilon = 1e-12);
        assert!(est.well_posed);
    }

    #[test]
    fn constant_fields_have_zero_lipschitz_constant() {
        let sde = BgcSde::constant_coefficients(0.05, 1.0, None, 0.0);
        let report = check_conditions(&sde, 10.0, 0.1).unwrap();
        assert_eq!(report.lambda1_est, 0.0);
        assert!(!report.linear_growth_violated);
        assert!(report.lambda2_est >= 0.0);
    }

    #[test]
    fn quadratic_constraint_violates_linear_growth() {
        let report = check_conditions(&quadratic_sde(0.05), 100.0, 0.5).unwrap();
        assert!(report.linear_growth_violated);
    }

    #[test]
    fn abs_linear_constraint_slope() {
        // Independent oracle: dense finite-difference scan of F directly.
        let sde = BgcSde::standard_wiener().with_constraint(ScalarField::abs_linear(0.1));
        let big_f = |x: f64| -f64::from(sgn(x)) * x.abs() / 10.0;
        let h = 1e-3;
        let dense = (0..20_000)
            .map(|i| {
                let x = -10.0 + i as f64 * h;
                ((big_f(x + h) - big_f(x)) / h).abs()
            })
            .fold(0.0_f64, f64::max);
        let report = check_conditions(&sde, 10.0, 0.05).unwrap();
        assert_abs_diff_eq!(report.lambda1_est, dense, epsilon = 1e-6);
        assert_abs_diff_eq!(report.lambda1_est, 0.1, epsilon = 1e-6);
    }

    #[test]
    fn linear_drift_slope_within_grid_resolution() {
        let slope = 0.7;
        let sde = BgcSde::unconstrained(ScalarField::linear(slope, 1.0), ScalarField::constant(1.0), 0.0);
        let step = 0.25;
        let report = check_conditions(&sde, 20.0, step).unwrap();
        assert!((report.lambda1_est - slope).abs() <= step);
    }

    #[test]
    fn invalid_scan_rejected() {
        let sde = BgcSde::standard_wiener();
        assert!(check_conditions(&sde, 0.0, 0.1).is_err());
        assert!(check_conditions(&sde, 1.0, 0.0).is_err());
        assert!(check_conditions(&sde, 1.0, 2.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn drift_odd_for_even_constraint(x in -50.0f64..50.0, beta in 1.0f64..500.0) {
                let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(beta), 0.0);
                let a = bgc_drift(&sde, x, 0.0).unwrap();
                let b = bgc_drift(&sde, -x, 0.0).unwrap();
                prop_assert_eq!(a, -b);
            }

            #[test]
            fn constraint_never_pushes_outward(x in -50.0f64..50.0, mu in -1.0f64..1.0, beta in 1.0f64..500.0) {
                prop_assume!(x != 0.0);
                let sde = BgcSde::constant_coefficients(mu, 1.0, Some(beta), 0.0);
                let drift = bgc_drift(&sde, x, 0.0).unwrap();
                let s = f64::from(sgn(x));
                prop_assert!(s * drift <= s * mu);
                prop_assert!(((drift - mu).abs() - x * x / beta).abs() <= 1e-12 * (1.0 + x * x / beta));
            }
        }
    }
}
