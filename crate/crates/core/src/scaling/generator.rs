//! The fractional generator `D^α f(y) = u ∫ Φ(|z-y|) (f(z) - f(y)) dz`.

use rustfft::num_complex::Complex64;

use crate::error::{input_err, Result};
use crate::quadrature::{integrate, integrate_pieces};

use super::kernel::{phi_kernel_d1_closed, KernelSpec};
use super::spectral::GridFft;

/// Spectral energy fraction above which the top modes count as resolved
/// badly.
const NYQUIST_ENERGY: f64 = 1e-8;

/// False when the outer quarter of the spectrum of `f` carries a
/// non-negligible share of its energy.
pub fn resolution_ok(f: &[f64], d: usize, cells: usize) -> bool {
    let mut fft = GridFft::new(d, cells);
    let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    let (mut total, mut high) = (0.0, 0.0);
    for (idx, c) in buf.iter().enumerate().skip(1) {
        let e = c.norm_sqr();
        total += e;
        let mut rest = idx;
        let mut top = false;
        for _ in 0..d {
            let m = super::spectral::signed_mode(rest % cells, cells).unsigned_abs() as usize;
            rest /= cells;
            top |= 4 * m > cells;
        }
        if top {
            high += e;
        }
    }
    total == 0.0 || high <= NYQUIST_ENERGY * total
}

/// `D^α f` on a periodic grid of `cells^d` points and side `side`, by the
/// spectral multiplier `u ψ(θ_k)`.
pub fn apply_fractional_generator(f: &[f64], cells: usize, side: f64, spec: &KernelSpec) -> Result<Vec<f64>> {
    if f.len() != cells.pow(spec.d as u32) {
        return Err(input_err(format!(
            "field has {} values, grid needs {}^{}",
            f.len(),
            cells,
            spec.d
        )));
    }
    if !resolution_ok(f, spec.d, cells) {
        log::warn!(
            "field has energy near the Nyquist mode; D^alpha on a {cells}-point grid may be under-resolved"
        );
    }
    let table = spec.symbol_grid(cells, side, 0.0);
    let mut fft = GridFft::new(spec.d, cells);
    Ok(fft.apply_multiplier(f, &table.values))
}

/// `D^α f(y)` in `d = 1` by real-space quadrature against the closed-form
/// kernel, for `f` periodic with period `period`:
///
/// `u ∫_0^∞ Φ(x) [f(y+x) + f(y-x) - 2 f(y)] dx`.
pub fn direct_generator_1d<F: Fn(f64) -> f64>(f: F, y: f64, period: f64, spec: &KernelSpec) -> Result<f64> {
    if spec.d != 1 {
        return Err(input_err("direct generator quadrature is implemented for d = 1"));
    }
    let alpha = spec.alpha;
    let c = phi_kernel_d1_closed(alpha, 1.0);
    let fy = f(y);
    let second = |x: f64| f(y + x) + f(y - x) - 2.0 * fy;

    // [0, δ]: second difference ≈ f''(y) x^2, so ∫ c x^{1-α} f'' dx
    let delta = 1e-3 * period;
    let f2 = second(delta) / (delta * delta);
    let head = f2 * c * delta.powf(2.0 - alpha) / (2.0 - alpha);

    let mut breaks = vec![delta];
    let quarter = 0.25 * period;
    let mut b = delta;
    while b < quarter {
        b = (b * 4.0).min(quarter);
        breaks.push(b);
    }
    let far = 100.0 * period;
    let mut next = quarter;
    while next < far {
        next += quarter;
        breaks.push(next);
    }
    let kernel = |x: f64| c * x.powf(-(1.0 + alpha));
    let body = integrate_pieces(|x| kernel(x) * second(x), &breaks, 1e-14, 1e-12).value;

    // beyond `far` only the constant part -2 (f(y) - mean f) survives averaging
    let mean = integrate(&f, 0.0, period, 1e-14, 1e-13).value / period;
    let tail = -2.0 * (fy - mean) * c * far.powf(-alpha) / alpha;
    Ok(spec.u * (head + body + tail))
}
