//! Symmetric α-stable increments.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Standard symmetric α-stable variate, `E exp(iθX) = exp(-|θ|^α)`, by the
/// Chambers-Mallows-Stuck transform.
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Positive stable variate with `E exp(-sA) = exp(-s^a)`, `0 < a < 1`
/// (Kanter's representation).
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = Exp1.sample(rng);
    let k = (a * PI * u).sin().powf(a / (1.0 - a)) * ((1.0 - a) * PI * u).sin()
        / (PI * u).sin().powf(1.0 / (1.0 - a));
    (k / e).powf((1.0 - a) / a)
}

/// Isotropic α-stable vector `X` in `R^d` with `E exp(iθ·X) = exp(-(scale|θ|)^α)`.
/// In `d >= 2` this is the sub-Gaussian law `sqrt(A) G`, `G ~ N(0, 2 scale^2 I)`.
pub fn isotropic_stable<R: Rng + ?Sized>(alpha: f64, d: usize, scale: f64, rng: &mut R) -> [f64; 3] {
    let mut out = [0.0; 3];
    if d == 1 {
        out[0] = scale * symmetric_stable(alpha, rng);
        return out;
    }
    let a = positive_stable(0.5 * alpha, rng).sqrt();
    let sd = std::f64::consts::SQRT_2 * scale * a;
    for c in out.iter_mut().take(d) {
        let z: f64 = StandardNormal.sample(rng);
        *c = sd * z;
    }
    out
}
