//! Scale function, speed measure and the Motoo recurrence classifier.
//!
//! `cargo run --release --example scale_speed`

use bgc::lil::{geometric_horizons, motoo_classify, scale_function, speed_measure_density, LilError, ScaleSpeedSpec};
use bgc::model::ScalarField;
use bgc::quad::Tolerance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ScaleSpeedSpec::new(0.0);
    let (f, g) = (ScalarField::constant(0.05), ScalarField::constant(1.0));
    for x in [-5.0, -1.0, 1.0, 5.0] {
        let exact = 10.0 * (1.0 - (-0.1f64 * x).exp());
        println!(
            "x = {x:>4}: s(x) = {:.10} (closed form {exact:.10}), m(x) = {:.6}",
            scale_function(&f, &g, &spec, x)?,
            speed_measure_density(&f, &g, &spec, x)?
        );
    }

    let horizons = geometric_horizons(1.0, 2.0, 30);
    let tol = Tolerance::default();
    let linear = motoo_classify(Ok::<f64, LilError>, |t| t, 1.0, &horizons, tol)?;
    let square = motoo_classify(|x| Ok::<f64, LilError>(x * x), |t| t, 1.0, &horizons, tol)?;
    let bounded = motoo_classify(|x| scale_function(&f, &g, &spec, x), |t| t, 1.0, &horizons[..12], tol)?;
    println!("motoo, s(x) = x:           {:?}", linear.verdict);
    println!("motoo, s(x) = x^2:         {:?}", square.verdict);
    println!("motoo, s from mu = 0.05:   {:?}", bounded.verdict);
    Ok(())
}
