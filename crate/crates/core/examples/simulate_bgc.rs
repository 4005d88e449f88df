//! Paired Euler–Maruyama ensembles with and without the constraint.
//!
//! `cargo run --release --example simulate_bgc`

use bgc::model::BgcSde;
use bgc::simulate::{run_ensemble, SimConfig};
use bgc::stats::{mean, sample_std, terminal_samples};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig::experiment_default(42);
    for (name, beta) in [("with BGC", Some(100.0)), ("without BGC", None)] {
        let sde = BgcSde::constant_coefficients(0.0, 1.0, beta, 0.0);
        let ens = run_ensemble(&sde, &cfg)?;
        let terminal = terminal_samples(&ens);
        println!(
            "{name:>12}: {} paths x {} steps, terminal mean {:+.3}, sd {:.3}, max |X| {:.3}",
            ens.len(),
            cfg.n_steps,
            mean(&terminal),
            sample_std(&terminal)?,
            ens.max_abs()
        );
    }
    Ok(())
}
