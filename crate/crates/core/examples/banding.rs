//! Kernel density and band detection on pooled path states.
//!
//! `cargo run --release --example banding`

use bgc::model::BgcSde;
use bgc::simulate::{run_ensemble, SimConfig};
use bgc::stats::{
    detect_bands, estimate_density, pooled_samples, relative_threshold, Bandwidth, DEFAULT_RELATIVE_PROMINENCE,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig::experiment_default(42);
    for mu in [-0.05, 0.0, 0.05] {
        for (name, beta) in [("BGC", Some(100.0)), ("free", None)] {
            let ens = run_ensemble(&BgcSde::constant_coefficients(mu, 1.0, beta, 0.0), &cfg)?;
            let d = estimate_density(&pooled_samples(&ens, 100.0), 50, Bandwidth::Auto)?;
            let bands = detect_bands(&d, relative_threshold(&d, DEFAULT_RELATIVE_PROMINENCE));
            let modes: Vec<String> = bands.mode_locations.iter().map(|x| format!("{x:.2}")).collect();
            println!(
                "mu = {mu:+.2} {name:>4}: bandwidth {:.3}, {} mode(s) at [{}]",
                d.bandwidth,
                bands.n_modes(),
                modes.join(", ")
            );
        }
    }
    Ok(())
}
