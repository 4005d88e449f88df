use super::StatsError;
use crate::simulate::Ensemble;

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn sample_std(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::Degenerate(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    Ok((ss / (samples.len() - 1) as f64).sqrt())
}

/// Linear-interpolation quantile of an already sorted sample.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn quantile(samples: &[f64], q: f64) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Degenerate("empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(StatsError::InvalidArgument(format!(
            "quantile must lie in [0, 1], got {q}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q))
}

/// Adjusted Fisher–Pearson skewness `G1 = √(n(n−1))/(n−2) · m3 / m2^{3/2}`.
pub fn skewness(samples: &[f64]) -> Result<f64, StatsError> {
    let n = samples.len();
    if n < 3 {
        return Err(StatsError::Degenerate(format!(
            "skewness needs at least 3 samples, got {n}"
        )));
    }
    let m = mean(samples);
    let (m2, m3) = samples.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - m;
        (a + d * d, b + d * d * d)
    });
    let (m2, m3) = (m2 / n as f64, m3 / n as f64);
    if !(m2 > 0.0) {
        return Err(StatsError::Degenerate("zero variance".into()));
    }
    let nf = n as f64;
    Ok((nf * (nf - 1.0)).sqrt() / (nf - 2.0) * m3 / m2.powf(1.5))
}

/// Fraction of paths whose excursion `max_t |X(t)|` exceeds `level`.
pub fn escape_fraction(ens: &Ensemble, level: f64) -> Result<f64, StatsError> {
    if !(level > 0.0) {
        return Err(StatsError::InvalidArgument(format!(
            "escape level must be positive, got {level}"
        )));
    }
    if ens.is_empty() {
        return Ok(0.0);
    }
    let escaped = ens.paths.iter().filter(|p| p.max_abs() > level).count();
    Ok(escaped as f64 / ens.len() as f64)
}
