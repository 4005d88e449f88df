//! Iterated-logarithm envelopes and the empirical limsup ratio of Wiener paths.
//!
//! `cargo run --release --example lil_envelopes`

use bgc::lil::{
    adjusted_lil_envelope, empirical_limsup_ratio, envelope_crossover, lil_envelope, sqrt_envelope, DEFAULT_T_MIN,
};
use bgc::model::BgcSde;
use bgc::simulate::{run_ensemble, SimConfig};
use bgc::stats::quantile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("envelopes cross at t = {:.9}", envelope_crossover());
    for t in [3.0, 10.0, 100.0, 1e4] {
        println!(
            "t = {t:>8}: sqrt(t) = {:>8.3}, lil = {:>8.3}, lil - e = {:>8.3}",
            sqrt_envelope(t)?,
            lil_envelope(t)?,
            adjusted_lil_envelope(t)?
        );
    }
    println!("lil_envelope(1) -> {}", lil_envelope(1.0).unwrap_err());

    for sigma in [1.0, 2.0] {
        let ens = run_ensemble(&BgcSde::wiener(sigma), &SimConfig::new(1.0, 10_000, 200, 7))?;
        let ratios = ens
            .paths
            .iter()
            .map(|p| empirical_limsup_ratio(p, DEFAULT_T_MIN))
            .collect::<Result<Vec<_>, _>>()?;
        println!("sigma = {sigma}: median limsup ratio {:.3}", quantile(&ratios, 0.5)?);
    }
    Ok(())
}
