//! The fractional generator: kernel table, symbol on a periodic grid and
//! its action on a cosine.

use std::f64::consts::PI;

use slfv::scaling::{apply_fractional_generator, KernelSpec};

fn main() -> slfv::Result<()> {
    let spec = KernelSpec::new(1, 1.5, 0.5)?;
    println!("stable constant c = {:.6}", spec.stable_constant());
    let (cells, side) = (128, 16.0);
    let f: Vec<f64> = (0..cells)
        .map(|i| (2.0 * PI * 2.0 * (i as f64 + 0.5) * side / cells as f64 / side).cos())
        .collect();
    let g = apply_fractional_generator(&f, cells, side, &spec)?;
    let k = 2.0 * PI * 2.0 / side;
    println!("D^α cos(kx) / cos(kx) at x=h/2: {:.6}", g[0] / f[0]);
    println!("generator symbol at k:          {:.6}", spec.generator_symbol(k));
    let mut out = std::io::stdout().lock();
    spec.write_csv(&mut out)?;
    Ok(())
}
