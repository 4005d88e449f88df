//! Distributional analysis of simulated ensembles.

mod bands;
mod barrier;
mod density;
mod lattice;
mod moments;

use thiserror::Error;

use crate::model::ModelError;
use crate::simulate::Ensemble;

pub use bands::{detect_bands, relative_threshold, BandReport, DEFAULT_RELATIVE_PROMINENCE};
pub use barrier::{estimate_barrier, BarrierEstimate, BarrierMethod, DEFAULT_BARRIER_QUANTILE, DEFAULT_ROOT_BRACKET};
pub use density::{estimate_density, silverman_bandwidth, Bandwidth, DensityEstimate, KDE_GRID_POINTS};
pub use lattice::{ks_distance, lattice_evolve, simulate_walk_endpoints, LatticeDistribution};
pub use moments::{escape_fraction, mean, quantile, sample_std, skewness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no root of the constrained drift on {side} bracket [{lo}, {hi}]")]
    NoRoot { side: &'static str, lo: f64, hi: f64 },
    #[error("empirical barrier needs an ensemble")]
    MissingEnsemble,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Final state of every path, in path-index order.
pub fn terminal_samples(ens: &Ensemble) -> Vec<f64> {
    ens.paths.iter().map(|p| p.terminal()).collect()
}

/// Every state at grid times `t ≥ t_from`, path by path.
pub fn pooled_samples(ens: &Ensemble, t_from: f64) -> Vec<f64> {
    ens.paths
        .iter()
        .flat_map(|p| p.iter().filter(move |&(t, _)| t >= t_from).map(|(_, x)| x))
        .collect()
}
