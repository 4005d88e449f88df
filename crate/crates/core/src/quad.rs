//! Adaptive Simpson quadrature with a fallible integrand.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature on [{a}, {b}] did not converge within {max_subdivisions} subdivisions")]
    NotConverged { a: f64, b: f64, max_subdivisions: usize },
    #[error("integrand is not finite at {x}")]
    NonFinite { x: f64 },
    #[error("invalid quadrature tolerance: {0}")]
    InvalidTolerance(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_subdivisions: usize) -> Self {
        Self {
            abs,
            rel,
            max_subdivisions,
        }
    }

    /// Tightens both tolerances by `factor`, keeping the subdivision budget.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
            ..self
        }
    }

    fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs > 0.0 && self.rel > 0.0) {
            return Err(QuadError::InvalidTolerance(format!(
                "tolerances must be positive (abs={}, rel={})",
                self.abs, self.rel
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::InvalidTolerance("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-12, 1_000_000)
    }
}

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
}

const MAX_DEPTH: u32 = 60;

/// `∫_a^b f`, oriented: `b < a` returns the negated integral over `[b, a]`.
///
/// Panels are refined until the two-half Simpson estimate differs from the
/// whole-panel one by less than `15 ε`, with the error budget halved at each
/// split. The budget is `max(abs, rel · |coarse estimate|)`.
pub fn integrate<F, E>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadError>,
{
    tol.validate()?;
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }

    let mut eval = |x: f64| -> Result<f64, E> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { x }.into())
        }
    };

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    // Seed the relative budget from a 9-point composite estimate so a lucky
    // coarse value near zero does not force the absolute floor.
    let mut coarse = 0.0;
    {
        let h = (b - a) / 8.0;
        let mut ys = [0.0; 9];
        for (i, y) in ys.iter_mut().enumerate() {
            *y = match i {
                0 => fa,
                4 => fm,
                8 => fb,
                _ => eval(a + i as f64 * h)?,
            };
        }
        for k in 0..4 {
            coarse += h / 3.0 * (ys[2 * k] + 4.0 * ys[2 * k + 1] + ys[2 * k + 2]);
        }
    }
    let eps = tol.abs.max(tol.rel * coarse.abs());

    let mut stack = vec![Panel {
        a,
        m,
        b,
        fa,
        fm,
        fb,
        whole,
        eps,
        depth: 0,
    }];
    let mut total = 0.0;
    let mut compensation = 0.0;
    let mut splits = 0usize;

    while let Some(p) = stack.pop() {
        let lm = 0.5 * (p.a + p.m);
        let rm = 0.5 * (p.m + p.b);
        let (flm, frm) = (eval(lm)?, eval(rm)?);
        let left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let refined = left + right;
        let delta = refined - p.whole;

        if delta.abs() <= 15.0 * p.eps || p.depth >= MAX_DEPTH {
            if p.depth >= MAX_DEPTH && delta.abs() > 15.0 * p.eps {
                return Err(QuadError::NotConverged {
                    a,
                    b,
                    max_subdivisions: tol.max_subdivisions,
                }
                .into());
            }
            // Kahan summation keeps the accumulated panels at full precision.
            let term = refined + delta / 15.0 - compensation;
            let next = total + term;
            compensation = (next - total) - term;
            total = next;
            continue;
        }

        splits += 1;
        if splits > tol.max_subdivisions {
            return Err(QuadError::NotConverged {
                a,
                b,
                max_subdivisions: tol.max_subdivisions,
            }
            .into());
        }
        let eps = 0.5 * p.eps;
        stack.push(Panel {
            a: p.m,
            m: rm,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            eps,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            m: lm,
            b: p.m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            eps,
            depth: p.depth + 1,
        });
    }
    Ok(total)
}

/// Convenience wrapper for infallible integrands.
pub fn integrate_fn<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Ok::<f64, QuadError>(f(x)), a, b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate_fn(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, Tolerance::default()).unwrap();
        assert_relative_eq!(v, 20.0 - 8.0 + 4.0, max_relative = 1e-14);
    }

    #[test]
    fn smooth_integrands() {
        let v = integrate_fn(f64::sin, 0.0, std::f64::consts::PI, Tolerance::default()).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-11);
        let v = integrate_fn(|x: f64| (-x).exp(), 0.0, 20.0, Tolerance::default()).unwrap();
        assert_relative_eq!(v, 1.0 - (-20.0f64).exp(), max_relative = 1e-11);
    }

    #[test]
    fn orientation() {
        let fwd = integrate_fn(f64::exp, 0.0, 1.0, Tolerance::default()).unwrap();
        let back = integrate_fn(f64::exp, 1.0, 0.0, Tolerance::default()).unwrap();
        assert_eq!(fwd, -back);
        assert_eq!(integrate_fn(f64::exp, 2.0, 2.0, Tolerance::default()).unwrap(), 0.0);
    }

    #[test]
    fn subdivision_budget_is_enforced() {
        let tol = Tolerance::new(1e-14, 1e-14, 3);
        let err = integrate_fn(|x: f64| x.sqrt(), 0.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, QuadError::NotConverged { .. }));
    }

    #[test]
    fn non_finite_integrand() {
        let err = integrate_fn(|x: f64| 1.0 / x, 0.0, 1.0, Tolerance::default()).unwrap_err();
        assert!(matches!(err, QuadError::NonFinite { .. }));
    }

    #[test]
    fn invalid_tolerance() {
        assert!(integrate_fn(|x| x, 0.0, 1.0, Tolerance::new(0.0, 1e-8, 10)).is_err());
        assert!(integrate_fn(|x| x, 0.0, 1.0, Tolerance::new(1e-8, 1e-8, 0)).is_err());
    }
}
