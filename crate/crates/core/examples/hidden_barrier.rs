//! Hidden reflecting levels: drift roots and empirical quantiles.
//!
//! `cargo run --release --example hidden_barrier`

use bgc::model::BgcSde;
use bgc::simulate::{run_ensemble, SimConfig};
use bgc::stats::{escape_fraction, estimate_barrier, BarrierMethod, DEFAULT_ROOT_BRACKET};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = BarrierMethod::DeterministicRoot {
        x_max: DEFAULT_ROOT_BRACKET,
    };
    for (beta, mu) in [(25.0, 0.01), (100.0, 0.05), (400.0, 0.05)] {
        let sde = BgcSde::constant_coefficients(mu, 1.0, Some(beta), 0.0);
        let est = estimate_barrier(&sde, root, None)?;
        println!(
            "beta = {beta}, mu = {mu}: x+ = {:.10} (sqrt(beta mu) = {:.10})",
            est.x_plus,
            (beta * mu).sqrt()
        );
    }

    let cfg = SimConfig::experiment_default(42);
    let sde = BgcSde::constant_coefficients(0.0, 1.0, Some(100.0), 0.0);
    let reference = run_ensemble(&sde, &cfg)?;
    let est = estimate_barrier(
        &sde,
        BarrierMethod::EmpiricalQuantile { quantile: 0.995 },
        Some(&reference),
    )?;
    println!("empirical 0.995 barrier: [{:.3}, {:.3}]", est.x_minus, est.x_plus);
    for sigma in [1.0, 3.5] {
        let ens = run_ensemble(&BgcSde::constant_coefficients(0.0, sigma, Some(100.0), 0.0), &cfg)?;
        println!(
            "sigma = {sigma}: escape fraction {:.3}",
            escape_fraction(&ens, est.x_plus)?
        );
    }
    Ok(())
}
