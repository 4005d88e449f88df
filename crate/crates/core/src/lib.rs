//! Simulation and analysis of bi-directional grid constrained (BGC) Itô
//! diffusions.
//!
//! A BGC diffusion subtracts `sgn(X) Ψ(X, t)` from the drift of an ordinary
//! Itô diffusion, so the further the state wanders from the origin the harder
//! it is pulled back, from above and below alike. The crate covers:
//!
//! - [`model`]: coefficient fields, the constrained drift and grid-scan
//!   Lipschitz / linear-growth diagnostics.
//! - [`simulate`]: reproducible Euler–Maruyama paths and parallel ensembles.
//! - [`lil`]: iterated-logarithm envelopes, empirical limsup/liminf ratios,
//!   scale function, speed measure and the integral-test classifier.
//! - [`stats`]: densities, band detection, hidden-barrier estimates, skew and
//!   the lattice random-walk oracle.
//! - [`cli`]: the config-driven experiment runner behind the `bgc` binary,
//!   with CSV and SVG output.
//!
//! ```
//! use bgc::model::BgcSde;
//! use bgc::simulate::{run_ensemble, SimConfig};
//!
//! let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
//! let ens = run_ensemble(&sde, &SimConfig::new(1.0, 200, 16, 42)).unwrap();
//! assert_eq!(ens.len(), 16);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod lil;
pub mod model;
pub mod quad;
pub mod simulate;
pub mod stats;

pub use model::{bgc_drift, sgn, BgcSde, ScalarField};
pub use simulate::{run_ensemble, Ensemble, Path, SimConfig};
