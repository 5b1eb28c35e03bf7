//! Branching Brownian particles with and without local-time coalescence.

use slfv::limit::{simulate_limit_dual, LimitDualConfig};
use slfv::stream_rng;

fn main() -> slfv::Result<()> {
    let base = LimitDualConfig::fixed_radius(1, 1.0, 0.5, 1.0, 0.01, 0.001)?;
    let reps = 2000;
    for (name, cfg) in [("branching only", base.clone().with_coalescence_rate(0.0)), ("with coalescence", base)] {
        let total: usize = (0..reps)
            .map(|i| {
                let t = simulate_limit_dual(&cfg, &[[0.0; 3]], 2.0, &[2.0], &mut stream_rng(6, i)).unwrap();
                t.samples[0].count
            })
            .sum();
        println!("{name}: mean N(2) = {:.3}", total as f64 / reps as f64);
    }
    println!("Yule prediction without coalescence: {:.3}", 2f64.exp());
    Ok(())
}
