//! Deterministic Fisher-KPP in two dimensions and the stochastic equation
//! with Wright-Fisher noise on a line.

use std::f64::consts::PI;

use slfv::limit::{solve_fkpp, solve_fkpp_stochastic_1d, PdeConfig};
use slfv::stream_rng;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> slfv::Result<()> {
    let cells = 40;
    let times: Vec<f64> = (1..=4).map(|i| i as f64 * 0.25).collect();
    let cfg = PdeConfig::fixed_radius(2, 1.0, 0.5, 1.0, 4.0, cells, 0.002, 1.0)?.with_sample_times(times.clone());
    let w0: Vec<f64> = (0..cells * cells)
        .map(|i| 0.5 + 0.4 * (2.0 * PI * ((i % cells) as f64 + 0.5) / cells as f64).cos())
        .collect();
    let det = solve_fkpp(&cfg, &w0)?;
    for (t, f) in det.times.iter().zip(&det.fields) {
        println!("deterministic d=2  t={t:.2} mean {:.4}", mean(f));
    }
    let line = PdeConfig::fixed_radius(1, 1.0, 0.5, 1.0, 10.0, 200, 0.0005, 1.0)?.with_sample_times(times);
    let start = vec![0.5; 200];
    let sto = solve_fkpp_stochastic_1d(&line, &start, &mut stream_rng(5, 0))?;
    for (t, f) in sto.times.iter().zip(&sto.fields) {
        let spread = f.iter().map(|v| (v - mean(f)).abs()).sum::<f64>() / f.len() as f64;
        println!("stochastic d=1     t={t:.2} mean {:.4} spread {spread:.4}", mean(f));
    }
    println!("cell updates clamped to [0,1]: {}", sto.clamped);
    Ok(())
}
