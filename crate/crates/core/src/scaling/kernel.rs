//! Jump kernel `Φ` and the characteristic exponent `ψ` of the stable limit.
//!
//! Jumps of a rescaled lineage are sums of two independent uniform points
//! of a ball whose radius has density `V_r r^{-(d+1+α)}` on `r >= ρ`
//! (`ρ = n^{-β}`, or `0` in the limit). Their Lévy density is `Φ(|x|)` and
//!
//! `ψ^n(θ) = ∫_ρ^∞ V_r r^{-(d+1+α)} (φ_d(r|θ|)^2 - 1) dr`
//!
//! with `φ_d` the characteristic function of the uniform law on the unit ball.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};
use crate::geometry::{check_dim, lens_fraction, unit_ball_volume};
use crate::quadrature::{integrate, integrate_pieces};

use super::spectral::signed_mode;

/// Oscillatory integrals run out to `s = SYMBOL_CUTOFF` before switching to
/// the averaged tail.
const SYMBOL_CUTOFF: f64 = 1000.0;
const SERIES_BELOW: f64 = 0.5;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(config_err(format!("alpha must be in (1,2), got {alpha}")))
    }
}

/// Power series of `1 - φ_d(s)` summed until the terms vanish.
fn one_minus_phi_series(d: usize, s: f64) -> f64 {
    let s2 = s * s;
    let mut total = 0.0f64;
    match d {
        1 => {
            // 1 - sin(s)/s = Σ_{k>=1} (-1)^{k+1} s^{2k} / (2k+1)!
            let mut term = s2 / 6.0;
            let mut k = 1.0;
            while term.abs() > 1e-18 * total.abs().max(1e-300) {
                total += term;
                term *= -s2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
                k += 1.0;
            }
        }
        2 => {
            // 1 - 2 J1(s)/s = Σ_{k>=1} (-1)^{k+1} (s/2)^{2k} / (k! (k+1)!)
            let q = s2 / 4.0;
            let mut term = q / 2.0;
            let mut k = 1.0;
            while term.abs() > 1e-18 * total.abs().max(1e-300) {
                total += term;
                term *= -q / ((k + 1.0) * (k + 2.0));
                k += 1.0;
            }
        }
        _ => {
            // 1 - 3(sin s - s cos s)/s^3 = 3 Σ_{k>=2} (-1)^k 2k s^{2k-2} / (2k+1)!
            let mut fact = 120.0; // (2k+1)! at k = 2
            let mut pow = s2;
            let mut k = 2.0;
            loop {
                let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
                let term = 3.0 * sign * 2.0 * k * pow / fact;
                total += term;
                if term.abs() <= 1e-18 * total.abs().max(1e-300) {
                    break;
                }
                fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
                pow *= s2;
                k += 1.0;
            }
        }
    }
    total
}

/// Characteristic function of the uniform law on the unit `d`-ball at `|θ| = s`.
pub fn ball_char_function(d: usize, s: f64) -> f64 {
    let s = s.abs();
    if s < SERIES_BELOW {
        return 1.0 - one_minus_phi_series(d, s);
    }
    match d {
        1 => s.sin() / s,
        2 => 2.0 * libm::j1(s) / s,
        _ => 3.0 * (s.sin() - s * s.cos()) / (s * s * s),
    }
}

/// `(1 - φ_d(s)^2) / s^2`, smooth at `s = 0` where it equals `1/(d+2)`.
fn damped_ratio(d: usize, s: f64) -> f64 {
    let s = s.abs();
    if s < SERIES_BELOW {
        if s < 1e-8 {
            return 1.0 / (d as f64 + 2.0);
        }
        let a = one_minus_phi_series(d, s);
        return a * (2.0 - a) / (s * s);
    }
    let p = ball_char_function(d, s);
    (1.0 - p * p) / (s * s)
}

/// `∫_S^∞ s^{-(1+α)} φ_d(s)^2 ds` using the cycle-averaged envelope of `φ_d^2`.
fn phi_sq_tail(d: usize, alpha: f64, s: f64) -> f64 {
    match d {
        // sin^2 s / s^2 averages to 1 / (2 s^2)
        1 => s.powf(-(2.0 + alpha)) / (2.0 * (2.0 + alpha)),
        // (2 J1(s)/s)^2 averages to 4 / (π s^3)
        2 => 4.0 * s.powf(-(3.0 + alpha)) / (PI * (3.0 + alpha)),
        // 9 cos^2 s / s^4 averages to 9 / (2 s^4)
        _ => 9.0 * s.powf(-(4.0 + alpha)) / (2.0 * (4.0 + alpha)),
    }
}

/// `∫_a^b s^{-(1+α)} φ_d(s)^2 ds` for `1 <= a < b`, broken at multiples of π.
fn phi_sq_integral(d: usize, alpha: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut breaks = vec![a];
    let mut next = (a / PI).floor() * PI + PI;
    while next < b {
        breaks.push(next);
        next += PI;
    }
    breaks.push(b);
    let f = |s: f64| {
        let p = ball_char_function(d, s);
        s.powf(-(1.0 + alpha)) * p * p
    };
    integrate_pieces(f, &breaks, 1e-15, 1e-13).value
}

/// `∫_ρ^a r^{-(1+α)} (1 - φ_d(rk)^2) dr` for `ρ < a <= 1/k`, via
/// `t = r^{2-α}` which removes the `r^{1-α}` singularity at the origin.
fn near_part(d: usize, alpha: f64, k: f64, rho: f64, a: f64) -> f64 {
    let e = 2.0 - alpha;
    let inv = 1.0 / e;
    let lo = rho.powf(e);
    let hi = a.powf(e);
    let val = integrate(|t: f64| damped_ratio(d, t.powf(inv) * k), lo, hi, 1e-16, 1e-13).value;
    k * k * val / e
}

/// `ψ^n(θ)` for `|θ| = k`, with minimum radius `rho` (`0` for the limit).
pub fn levy_symbol_radial(k: f64, d: usize, alpha: f64, rho: f64) -> f64 {
    let k = k.abs();
    if k == 0.0 {
        return 0.0;
    }
    let v1 = unit_ball_volume(d);
    let a = 1.0 / k;
    let far = SYMBOL_CUTOFF * a;
    // ∫ r^{-(1+α)} (1 - φ^2) dr split into [ρ, a], [a, far] and [far, ∞)
    let mut positive = 0.0;
    if rho < a {
        positive += near_part(d, alpha, k, rho, a);
    }
    let start = rho.max(a);
    if start < far {
        positive += (start.powf(-alpha) - far.powf(-alpha)) / alpha;
        positive -= k.powf(alpha) * phi_sq_integral(d, alpha, start * k, SYMBOL_CUTOFF);
    }
    let tail_from = start.max(far);
    positive += tail_from.powf(-alpha) / alpha - k.powf(alpha) * phi_sq_tail(d, alpha, tail_from * k);
    -v1 * positive
}

/// `ψ^n(θ)`; `n = None` gives the limit symbol `ψ`.
pub fn levy_symbol(theta: &[f64], d: usize, alpha: f64, n: Option<u64>) -> Result<f64> {
    check_dim(d)?;
    check_alpha(alpha)?;
    if theta.len() != d || theta.iter().any(|t| !t.is_finite()) {
        return Err(input_err(format!("theta must be a finite {d}-vector")));
    }
    let k = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    let rho = match n {
        None => 0.0,
        Some(0) => return Err(input_err("n must be >= 1")),
        Some(n) => (n as f64).powf(-1.0 / (2.0 * alpha - 1.0)),
    };
    Ok(levy_symbol_radial(k, d, alpha, rho))
}

/// `ψ^n(θ) - ψ(θ) = V_1 ∫_0^ρ r^{-(1+α)} (1 - φ_d(r|θ|)^2) dr`, evaluated
/// directly rather than as a difference of two symbols.
pub fn symbol_truncation_gap(k: f64, d: usize, alpha: f64, rho: f64) -> f64 {
    let k = k.abs();
    if k == 0.0 || rho <= 0.0 {
        return 0.0;
    }
    let v1 = unit_ball_volume(d);
    let a = 1.0 / k;
    let mut total = near_part(d, alpha, k, 0.0, rho.min(a));
    if rho > a {
        total += (a.powf(-alpha) - rho.powf(-alpha)) / alpha;
        total -= k.powf(alpha) * phi_sq_integral(d, alpha, 1.0, rho * k);
    }
    v1 * total
}

/// `Φ(m)` for `d = 1` in closed form: `(m/2)^{-(1+α)} / ((1+α)(2+α))`.
pub fn phi_kernel_d1_closed(alpha: f64, m: f64) -> f64 {
    (0.5 * m).powf(-(1.0 + alpha)) / ((1.0 + alpha) * (2.0 + alpha))
}

/// Series coefficients of the lens fraction `h_d(a)` at `a = 0`.
fn lens_series(d: usize) -> &'static [f64] {
    const D1: [f64; 2] = [1.0, -1.0];
    const D2: [f64; 8] = [
        1.0,
        -4.0 / PI,
        0.0,
        2.0 / (3.0 * PI),
        0.0,
        1.0 / (10.0 * PI),
        0.0,
        1.0 / (28.0 * PI),
    ];
    const D3: [f64; 4] = [1.0, -1.5, 0.0, 0.5];
    match d {
        1 => &D1,
        2 => &D2,
        _ => &D3,
    }
}

/// `Φ(m) = ∫_{m/2}^∞ r^{-(d+1+α)} V_r(m) / V_r dr` by quadrature up to
/// `r = 50 m` and a series tail beyond.
pub fn phi_kernel(d: usize, alpha: f64, m: f64) -> Result<f64> {
    check_dim(d)?;
    check_alpha(alpha)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(input_err(format!("phi_kernel needs m > 0, got {m}")));
    }
    let p = d as f64 + 1.0 + alpha;
    let half = 0.5 * m;
    let cut = 50.0 * m;
    let breaks: Vec<f64> = [1.0, 1.25, 2.0, 4.0, 10.0, 30.0, 100.0].iter().map(|f| f * half).collect();
    let f = |r: f64| r.powf(-p) * lens_fraction(d, half / r);
    let body = integrate_pieces(f, &breaks, 0.0, 1e-13).value;
    let tail: f64 = lens_series(d)
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let q = p + j as f64 - 1.0;
            c * half.powi(j as i32) * cut.powf(-q) / q
        })
        .sum();
    Ok(body + tail)
}

/// Kernel of the fractional generator `D^α f = u ∫ Φ(|z-y|)(f(z)-f(y)) dz`
/// with its tabulated `Φ` and `ψ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSpec {
    pub d: usize,
    pub alpha: f64,
    pub u: f64,
    /// `c` in `ψ(θ) = -c |θ|^α`.
    stable_constant: f64,
    /// `(m, Φ(m))` on a log grid.
    pub phi_table: Vec<(f64, f64)>,
    /// `(|θ|, ψ(θ))` on a log grid.
    pub symbol_table: Vec<(f64, f64)>,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

impl KernelSpec {
    pub fn new(d: usize, alpha: f64, u: f64) -> Result<Self> {
        check_dim(d)?;
        check_alpha(alpha)?;
        if !(u > 0.0 && u <= 1.0) {
            return Err(config_err(format!("impact u must be in (0,1], got {u}")));
        }
        let stable_constant = -levy_symbol_radial(1.0, d, alpha, 0.0);
        let phi_table = log_grid(0.1, 10.0, 41)
            .into_iter()
            .map(|m| Ok((m, phi_kernel(d, alpha, m)?)))
            .collect::<Result<Vec<_>>>()?;
        let symbol_table = log_grid(0.01, 100.0, 41)
            .into_iter()
            .map(|k| (k, levy_symbol_radial(k, d, alpha, 0.0)))
            .collect();
        Ok(Self {
            d,
            alpha,
            u,
            stable_constant,
            phi_table,
            symbol_table,
        })
    }

    pub fn stable_constant(&self) -> f64 {
        self.stable_constant
    }

    /// Limit symbol `ψ(θ) = -c |θ|^α`.
    pub fn symbol(&self, k: f64) -> f64 {
        -self.stable_constant * k.abs().powf(self.alpha)
    }

    /// Fourier multiplier of `D^α`: `u ψ(θ)`.
    pub fn generator_symbol(&self, k: f64) -> f64 {
        self.u * self.symbol(k)
    }

    pub fn phi(&self, m: f64) -> Result<f64> {
        phi_kernel(self.d, self.alpha, m)
    }

    /// Multipliers `u ψ^n(θ_k)` for every mode of a periodic grid of
    /// `cells^d` points and side `side`; `rho = 0` gives the limit.
    pub fn symbol_grid(&self, cells: usize, side: f64, rho: f64) -> SymbolTable {
        let base = 2.0 * PI / side;
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let total = cells.pow(self.d as u32);
        let mut values = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx;
            let mut k2: u64 = 0;
            for _ in 0..self.d {
                let m = signed_mode(rest % cells, cells);
                rest /= cells;
                k2 += (m * m) as u64;
            }
            let v = *cache.entry(k2).or_insert_with(|| {
                let k = base * (k2 as f64).sqrt();
                if rho == 0.0 {
                    self.generator_symbol(k)
                } else {
                    self.u * levy_symbol_radial(k, self.d, self.alpha, rho)
                }
            });
            values.push(v);
        }
        SymbolTable {
            d: self.d,
            cells,
            side,
            rho,
            values,
        }
    }

    /// CSV dump of the tabulated `Φ` and `ψ`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "table,d,alpha,x,value")?;
        for (m, v) in &self.phi_table {
            writeln!(out, "phi,{},{},{m},{v}", self.d, self.alpha)?;
        }
        for (k, v) in &self.symbol_table {
            writeln!(out, "psi,{},{},{k},{v}", self.d, self.alpha)?;
        }
        Ok(())
    }
}

/// Fourier multipliers on a specific periodic grid, in FFT index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    pub d: usize,
    pub cells: usize,
    pub side: f64,
    pub rho: f64,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn char_function_is_continuous_at_series_switch() {
        for d in 1..=3 {
            let below = ball_char_function(d, SERIES_BELOW - 1e-12);
            let above = ball_char_function(d, SERIES_BELOW + 1e-12);
            assert!((below - above).abs() < 1e-11, "d={d}");
            assert_eq!(ball_char_function(d, 0.0), 1.0);
            let r = damped_ratio(d, SERIES_BELOW - 1e-12) - damped_ratio(d, SERIES_BELOW + 1e-12);
            assert!(r.abs() < 1e-10);
        }
        assert_relative_eq!(damped_ratio(1, 1e-6), 1.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(damped_ratio(3, 1e-4), 1.0 / 5.0, epsilon = 1e-8);
    }

    #[test]
    fn phi_d1_matches_closed_form() {
        for &alpha in &[1.2, 1.5, 1.8] {
            for i in 0..=40 {
                let m = 0.1 * 100f64.powf(i as f64 / 40.0);
                let q = phi_kernel(1, alpha, m).unwrap();
                let c = phi_kernel_d1_closed(alpha, m);
                assert!(((q - c) / c).abs() <= 1e-8, "alpha={alpha} m={m} q={q} c={c}");
            }
        }
        assert_relative_eq!(phi_kernel(1, 1.5, 2.0).unwrap(), 1.0 / (2.5 * 3.5), epsilon = 1e-10);
        assert!(phi_kernel(1, 1.5, 0.0).is_err());
    }

    #[test]
    fn phi_homogeneous_and_decreasing() {
        for d in 1..=3 {
            for &alpha in &[1.2, 1.5, 1.8] {
                // constant form: Φ(m) = (m/2)^{-(d+α)} ∫_0^1 t^{d+α-1} h_d(t) dt
                let c = integrate(
                    |t: f64| t.powf(d as f64 + alpha - 1.0) * lens_fraction(d, t),
                    0.0,
                    1.0,
                    1e-15,
                    1e-14,
                )
                .value;
                let mut prev = f64::INFINITY;
                for m in [0.2, 0.5, 1.0, 3.0, 7.0] {
                    let phi = phi_kernel(d, alpha, m).unwrap();
                    assert!(phi > 0.0 && phi < prev);
                    prev = phi;
                    let expect = (0.5 * m).powf(-(d as f64 + alpha)) * c;
                    assert_relative_eq!(phi, expect, max_relative = 1e-9);
                    let ratio = phi_kernel(d, alpha, 2.0 * m).unwrap() / phi;
                    assert_relative_eq!(ratio, 2f64.powf(-(d as f64 + alpha)), max_relative = 1e-9);
                }
            }
        }
    }

    /// `c = -ψ(1)` for `d = 1` from the Mellin transform of `cos x - 1 + x^2/2`:
    /// `c = 2 · (-2^{1+α} Γ(-2-α) cos(πα/2))`.
    fn d1_constant(alpha: f64) -> f64 {
        -2.0 * 2f64.powf(1.0 + alpha) * libm::tgamma(-2.0 - alpha) * (PI * alpha / 2.0).cos()
    }

    #[test]
    fn limit_symbol_d1_closed_form() {
        for &alpha in &[1.2, 1.5, 1.8] {
            let c = d1_constant(alpha);
            for k in [0.01, 0.3, 1.0, 4.0, 50.0] {
                let psi = levy_symbol(&[k], 1, alpha, None).unwrap();
                assert_relative_eq!(psi, -c * k.powf(alpha), max_relative = 1e-9);
            }
        }
    }

    /// `ψ` as `∫ Φ(|x|) (cos θx - 1) dx` with the closed-form `d = 1` kernel.
    #[test]
    fn limit_symbol_d1_matches_kernel_integral() {
        let alpha = 1.4;
        let k = 1.7;
        // -2 sin^2(kx/2) avoids the cancellation in cos(kx) - 1
        let near = integrate_pieces(
            |x: f64| -2.0 * phi_kernel_d1_closed(alpha, x) * (0.5 * k * x).sin().powi(2),
            &[1e-12, 1e-9, 1e-6, 1e-3, 1.0],
            1e-14,
            1e-12,
        )
        .value;
        let breaks: Vec<f64> = (0..=2000).map(|i| 1.0 + i as f64 * PI / k).collect();
        let mid = integrate_pieces(
            |x: f64| phi_kernel_d1_closed(alpha, x) * ((k * x).cos() - 1.0),
            &breaks,
            1e-14,
            1e-12,
        )
        .value;
        let last = *breaks.last().unwrap();
        let c1 = phi_kernel_d1_closed(alpha, 1.0);
        let tail = -c1 * last.powf(-alpha) / alpha;
        let expect = 2.0 * (near + mid + tail);
        let psi = levy_symbol(&[k], 1, alpha, None).unwrap();
        assert_relative_eq!(psi, expect, max_relative = 1e-5);
    }

    #[test]
    fn symbol_basic_properties() {
        for d in 1..=3 {
            let spec = KernelSpec::new(d, 1.5, 0.5).unwrap();
            assert_eq!(levy_symbol_radial(0.0, d, 1.5, 0.0), 0.0);
            for &(_, v) in &spec.symbol_table {
                assert!(v < 0.0);
            }
            for w in spec.phi_table.windows(2) {
                assert!(w[1].1 < w[0].1 && w[1].1 > 0.0);
            }
            for k in [0.05, 0.5, 5.0] {
                let r = levy_symbol_radial(2.0 * k, d, 1.5, 0.0) / levy_symbol_radial(k, d, 1.5, 0.0);
                assert!((r - 2f64.powf(1.5)).abs() < 1e-8, "d={d} k={k} r={r}");
                assert_relative_eq!(spec.symbol(k), levy_symbol_radial(k, d, 1.5, 0.0), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn truncated_symbol_gap_two_ways() {
        for d in 1..=2 {
            for &alpha in &[1.2, 1.5, 1.8] {
                for &rho in &[1e-3, 0.1, 2.0] {
                    for k in [0.01, 1.0, 30.0] {
                        let diff = levy_symbol_radial(k, d, alpha, rho) - levy_symbol_radial(k, d, alpha, 0.0);
                        let gap = symbol_truncation_gap(k, d, alpha, rho);
                        assert!(gap >= 0.0);
                        assert!(
                            (diff - gap).abs() <= 1e-9 * levy_symbol_radial(k, d, alpha, 0.0).abs() + 1e-14,
                            "d={d} alpha={alpha} rho={rho} k={k} diff={diff} gap={gap}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_symbol_lower_bound_positive() {
        // -ψ^n(θ) / |θ|^α stays away from zero for |θ| <= n^β
        for &alpha in &[1.2, 1.5, 1.8] {
            let n = 100u64;
            let beta = 1.0 / (2.0 * alpha - 1.0);
            let kmax = (n as f64).powf(beta);
            let mut inf = f64::INFINITY;
            for i in 0..30 {
                let k = kmax * 10f64.powf(-3.0 * i as f64 / 29.0);
                let v = -levy_symbol(&[k], 1, alpha, Some(n)).unwrap() / k.powf(alpha);
                inf = inf.min(v);
            }
            assert!(inf > 0.1, "alpha={alpha} inf={inf}");
        }
    }

    #[test]
    fn symbol_grid_matches_pointwise() {
        let spec = KernelSpec::new(2, 1.6, 0.5).unwrap();
        let table = spec.symbol_grid(8, 10.0, 0.0);
        // mode (1, -2) sits at flat index 1 + 8 * 6
        let k = 2.0 * PI / 10.0 * 5f64.sqrt();
        assert_relative_eq!(table.values[1 + 8 * 6], 0.5 * spec.symbol(k), max_relative = 1e-12);
        let trunc = spec.symbol_grid(8, 10.0, 0.05);
        assert_relative_eq!(
            trunc.values[1 + 8 * 6],
            0.5 * levy_symbol_radial(k, 2, 1.6, 0.05),
            max_relative = 1e-12
        );
        assert_eq!(table.values[0], 0.0);
    }
}
