//! Runs a figure preset in memory and lists the files it would write.
//!
//! `cargo run --release --example figure_presets -- fig7`

use bgc::cli::config::ExperimentConfig;
use bgc::cli::figure::{run_figure, Preset};
use bgc::cli::output::Outputs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let preset: Preset = std::env::args().nth(1).as_deref().unwrap_or("fig5c").parse()?;
    let cfg = ExperimentConfig::parse("command = figure")?;
    let mut out = Outputs::new();
    let runs = run_figure(&cfg, preset, &mut out)?;
    for run in &runs {
        println!(
            "mu = {:+.2}, sigma = {:+.1}: modes with BGC {}, without {}",
            run.mu,
            run.sigma,
            run.bgc.bands.n_modes(),
            run.free.bands.n_modes()
        );
    }
    for (name, bytes) in out.files() {
        println!("{name:<40} {:>10} bytes", bytes.len());
    }
    Ok(())
}
