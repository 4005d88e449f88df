//! Exact lattice random walk against simulated walks.
//!
//! `cargo run --release --example lattice_oracle`

use bgc::stats::{ks_distance, lattice_evolve, simulate_walk_endpoints};

fn main() {
    let dist = lattice_evolve(10, 1.0);
    for (x, p) in dist.positions().into_iter().zip(&dist.probs) {
        if *p > 0.0 {
            println!("P(X_10 = {x:>3}) = {p:.10}");
        }
    }
    let walks = simulate_walk_endpoints(42, 100_000, 10, 1.0);
    println!(
        "total mass {}, KS distance to 1e5 walks {:.5}",
        dist.total_mass(),
        ks_distance(&walks, &dist)
    );
}
