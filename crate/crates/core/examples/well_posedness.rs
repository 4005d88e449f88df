//! Lipschitz and linear-growth estimates of the constrained coefficients.
//!
//! `cargo run --release --example well_posedness`

use bgc::model::{bgc_drift, check_conditions, BgcSde};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, beta) in [("x^2/100", Some(100.0)), ("none", None)] {
        let sde = BgcSde::constant_coefficients(0.05, 1.0, beta, 0.0);
        let r = check_conditions(&sde, 100.0, 0.1)?;
        println!(
            "psi = {name:>7}: lambda1 ~ {:.4}, lambda2 ~ {:.4}, linear growth violated: {}",
            r.lambda1_est, r.lambda2_est, r.linear_growth_violated
        );
        println!(
            "               drift at x = -10, 0, 10: {:+.3} {:+.3} {:+.3}",
            bgc_drift(&sde, -10.0, 0.0)?,
            bgc_drift(&sde, 0.0, 0.0)?,
            bgc_drift(&sde, 10.0, 0.0)?
        );
    }
    Ok(())
}
