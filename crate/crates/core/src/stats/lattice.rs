use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Distribution of a symmetric ±dx random walk started from a unit mass at 0.
///
/// `probs[j]` is the probability of position `(j − n_steps) · dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDistribution {
    pub dx: f64,
    pub n_steps: usize,
    pub probs: Vec<f64>,
}

impl LatticeDistribution {
    pub fn position(&self, j: usize) -> f64 {
        lattice_point(j as i64 - self.n_steps as i64, self.dx)
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.probs.len()).map(|j| self.position(j)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn lattice_point(k: i64, dx: f64) -> f64 {
    k as f64 * dx
}

/// Evolves `P(x, t + Δt) = ½ P(x − Δx, t) + ½ P(x + Δx, t)` for `n_steps`.
///
/// Probabilities are dyadic rationals, so the recursion is exact in `f64`
/// while `C(n, k)` fits in the mantissa (n ≤ 50 or so).
pub fn lattice_evolve(n_steps: usize, dx: f64) -> LatticeDistribution {
    assert!(dx > 0.0 && dx.is_finite(), "lattice spacing must be positive");
    let width = 2 * n_steps + 1;
    let mut probs = vec![0.0; width];
    probs[n_steps] = 1.0;
    let mut next = vec![0.0; width];
    for _ in 0..n_steps {
        for j in 0..width {
            let from_left = if j > 0 { probs[j - 1] } else { 0.0 };
            let from_right = if j + 1 < width { probs[j + 1] } else { 0.0 };
            next[j] = 0.5 * from_left + 0.5 * from_right;
        }
        std::mem::swap(&mut probs, &mut next);
    }
    LatticeDistribution { dx, n_steps, probs }
}

/// Endpoints of `n_walks` independent fair ±dx walks of `n_steps` steps.
///
/// Walk `i` draws its coin flips from the ChaCha8 stream `i` of the master
/// seed, one bit per step.
pub fn simulate_walk_endpoints(master_seed: u64, n_walks: usize, n_steps: usize, dx: f64) -> Vec<f64> {
    (0..n_walks)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(i as u64);
            let mut k: i64 = 0;
            let mut bits = 0u64;
            for step in 0..n_steps {
                if step % 64 == 0 {
                    bits = rng.next_u64();
                }
                k += if bits & 1 == 1 { 1 } else { -1 };
                bits >>= 1;
            }
            lattice_point(k, dx)
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `empirical` and
/// the lattice CDF.
///
/// Samples within `1e-9 · dx` of a lattice point are snapped onto it.
pub fn ks_distance(empirical: &[f64], lattice: &LatticeDistribution) -> f64 {
    assert!(!empirical.is_empty(), "KS distance needs a non-empty sample");
    let dx = lattice.dx;
    let mut samples: Vec<f64> = empirical
        .iter()
        .map(|&x| {
            let k = (x / dx).round();
            let snapped = lattice_point(k as i64, dx);
            if (x - snapped).abs() <= 1e-9 * dx {
                snapped
            } else {
                x
            }
        })
        .collect();
    samples.sort_by(f64::total_cmp);

    let support: Vec<(f64, f64)> = lattice
        .positions()
        .into_iter()
        .zip(lattice.probs.iter().copied())
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let n = samples.len() as f64;

    let mut candidates: Vec<f64> = samples.clone();
    candidates.extend(support.iter().map(|&(x, _)| x));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let lattice_cdf = |x: f64, inclusive: bool| -> f64 {
        support
            .iter()
            .filter(|&&(pos, _)| if inclusive { pos <= x } else { pos < x })
            .map(|&(_, p)| p)
            .sum()
    };

    let mut worst = 0.0_f64;
    for x in candidates {
        let below = samples.partition_point(|&s| s < x) as f64 / n;
        let at_or_below = samples.partition_point(|&s| s <= x) as f64 / n;
        worst = worst
            .max((at_or_below - lattice_cdf(x, true)).abs())
            .max((below - lattice_cdf(x, false)).abs());
    }
    worst.min(1.0)
}
