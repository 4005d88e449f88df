use rayon::prelude::*;

use super::moments::{quantile_sorted, sample_std};
use super::StatsError;

pub const KDE_GRID_POINTS: usize = 512;

/// Kernel contributions beyond this many bandwidths are below 1e-13 of the
/// peak and are skipped.
const KERNEL_CUTOFF: f64 = 8.0;
const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule of thumb.
    Auto,
    Fixed(f64),
}

/// Histogram plus Gaussian kernel density of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub kde_grid: Vec<f64>,
    pub kde_values: Vec<f64>,
    pub bandwidth: f64,
    pub n_samples: usize,
}

impl DensityEstimate {
    /// Trapezoid integral of the kernel density over its grid.
    pub fn kde_mass(&self) -> f64 {
        self.kde_grid
            .windows(2)
            .zip(self.kde_values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    pub fn peak_density(&self) -> f64 {
        self.kde_values.iter().copied().fold(0.0, f64::max)
    }
}

/// `h = 0.9 min(sd, IQR/1.34) n^(-1/5)`, falling back to `sd` when the IQR
/// is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64, StatsError> {
    let sd = sample_std(samples)?;
    if !(sd > 0.0) {
        return Err(StatsError::Degenerate("all samples are equal".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (samples.len() as f64).powf(-0.2))
}

pub fn estimate_density(samples: &[f64], bins: usize, bandwidth: Bandwidth) -> Result<DensityEstimate, StatsError> {
    if bins < 2 {
        return Err(StatsError::InvalidArgument(format!("need at least 2 bins, got {bins}")));
    }
    if samples.len() < 2 {
        return Err(StatsError::Degenerate(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::InvalidArgument("samples must be finite".into()));
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if lo == hi {
        return Err(StatsError::Degenerate("all samples are equal".into()));
    }
    let h = match bandwidth {
        Bandwidth::Auto => silverman_bandwidth(samples)?,
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => {
            return Err(StatsError::InvalidArgument(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
    };

    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + i as f64 * width })
        .collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }

    let g0 = lo - 3.0 * h;
    let g1 = hi + 3.0 * h;
    let step = (g1 - g0) / (KDE_GRID_POINTS - 1) as f64;
    let kde_grid: Vec<f64> = (0..KDE_GRID_POINTS).map(|i| g0 + i as f64 * step).collect();

    // Fixed-size chunks summed in order keep the result independent of the
    // worker count.
    let partials: Vec<Vec<f64>> = samples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; KDE_GRID_POINTS];
            for &x in chunk {
                let first = (((x - KERNEL_CUTOFF * h - g0) / step).ceil().max(0.0)) as usize;
                let last = (((x + KERNEL_CUTOFF * h - g0) / step).floor() as usize).min(KDE_GRID_POINTS - 1);
                for (j, slot) in acc.iter_mut().enumerate().take(last + 1).skip(first) {
                    let u = (kde_grid[j] - x) / h;
                    *slot += (-0.5 * u * u).exp();
                }
            }
            acc
        })
        .collect();
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut kde_values = vec![0.0; KDE_GRID_POINTS];
    for part in &partials {
        for (v, p) in kde_values.iter_mut().zip(part) {
            *v += p;
        }
    }
    for v in &mut kde_values {
        *v *= norm;
    }

    Ok(DensityEstimate {
        bin_edges,
        counts,
        kde_grid,
        kde_values,
        bandwidth: h,
        n_samples: samples.len(),
    })
}
