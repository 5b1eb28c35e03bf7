//! Balls, lens volumes and the periodic torus `[0, L)^d`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result, SlfvError};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A point in `R^d` for `d <= 3`; unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point(pub [f64; MAX_DIM]);

impl Point {
    pub const ORIGIN: Point = Point([0.0; MAX_DIM]);

    pub fn new(coords: &[f64]) -> Self {
        let mut p = [0.0; MAX_DIM];
        p[..coords.len()].copy_from_slice(coords);
        Point(p)
    }

    pub fn on_line(x: f64) -> Self {
        Point([x, 0.0, 0.0])
    }

    pub fn coords(&self, dim: usize) -> &[f64] {
        &self.0[..dim]
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point([self.0[0] + other.0[0], self.0[1] + other.0[1], self.0[2] + other.0[2]])
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point([self.0[0] - other.0[0], self.0[1] - other.0[1], self.0[2] - other.0[2]])
    }

    pub fn scale(&self, k: f64) -> Point {
        Point([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(config_err(format!("unsupported dimension {d}; only d = 1, 2, 3")))
    }
}

/// Volume of a `d`-ball of radius `r`: `pi^{d/2} r^d / Gamma(d/2 + 1)`.
pub fn ball_volume(d: usize, r: f64) -> Result<f64> {
    check_dim(d)?;
    if !(r > 0.0) {
        return Err(input_err(format!("ball radius must be positive, got {r}")));
    }
    Ok(unit_ball_volume(d) * r.powi(d as i32))
}

pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

/// Fraction `V_r(x,y) / V_r` of a ball covered by a second ball of equal
/// radius whose centre is `2 r a` away, for `a = |x - y| / (2r)`.
pub(crate) fn lens_fraction(d: usize, a: f64) -> f64 {
    if a >= 1.0 {
        return 0.0;
    }
    let a = a.max(0.0);
    match d {
        1 => 1.0 - a,
        2 => (2.0 / PI) * (a.acos() - a * (1.0 - a * a).sqrt()),
        3 => (1.0 + 0.5 * a) * (1.0 - a) * (1.0 - a),
        _ => f64::NAN,
    }
}

/// Volume of `B(x, r) ∩ B(y, r)` with `m = |x - y|`.
pub fn ball_intersection_volume(d: usize, r: f64, m: f64) -> Result<f64> {
    let full = ball_volume(d, r)?;
    if !(m >= 0.0) {
        return Err(input_err(format!("centre separation must be >= 0, got {m}")));
    }
    Ok(full * lens_fraction(d, m / (2.0 * r)))
}

/// Uniform sample from `B(center, r)` in `R^d` (not wrapped).
pub fn sample_in_ball<R: Rng + ?Sized>(d: usize, center: &Point, r: f64, rng: &mut R) -> Point {
    let mut offset = [0.0; MAX_DIM];
    if d == 1 {
        offset[0] = r * (2.0 * rng.random::<f64>() - 1.0);
    } else {
        loop {
            let mut norm_sq = 0.0;
            for c in offset.iter_mut().take(d) {
                *c = 2.0 * rng.random::<f64>() - 1.0;
                norm_sq += *c * *c;
            }
            if norm_sq <= 1.0 {
                break;
            }
        }
        for c in offset.iter_mut().take(d) {
            *c *= r;
        }
    }
    center.add(&Point(offset))
}

/// The periodic box `[0, L)^d` standing in for `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusDomain {
    dim: usize,
    side: f64,
}

impl TorusDomain {
    pub fn new(dim: usize, side: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(side > 0.0) || !side.is_finite() {
            return Err(config_err(format!("torus side must be positive and finite, got {side}")));
        }
        Ok(Self { dim, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0[..self.dim].iter().all(|&c| (0.0..self.side).contains(&c))
            && p.0[self.dim..].iter().all(|&c| c == 0.0)
    }

    pub fn wrap(&self, p: &Point) -> Point {
        let mut out = Point::ORIGIN;
        for i in 0..self.dim {
            let mut c = p.0[i].rem_euclid(self.side);
            // rem_euclid can round up to exactly `side`
            if c >= self.side {
                c = 0.0;
            }
            out.0[i] = c;
        }
        out
    }

    /// Minimum-image displacement `to - from`.
    pub fn displacement(&self, from: &Point, to: &Point) -> Point {
        let mut out = Point::ORIGIN;
        let half = 0.5 * self.side;
        for i in 0..self.dim {
            let mut delta = (to.0[i] - from.0[i]).rem_euclid(self.side);
            if delta > half {
                delta -= self.side;
            }
            out.0[i] = delta;
        }
        out
    }

    pub(crate) fn distance_sq(&self, x: &Point, y: &Point) -> f64 {
        self.displacement(x, y).norm_sq()
    }

    /// Minimum-image Euclidean distance; both points must lie in the box.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        for p in [x, y] {
            if !self.contains(p) {
                return Err(input_err(format!(
                    "point {:?} outside torus [0, {})^{}",
                    p.coords(self.dim),
                    self.side,
                    self.dim
                )));
            }
        }
        Ok(self.distance_sq(x, y).sqrt())
    }

    /// Enforces `L > 4 r` so that no event ball meets its own periodic image.
    pub fn check_radius(&self, r: f64) -> Result<()> {
        if 4.0 * r < self.side {
            Ok(())
        } else {
            Err(SlfvError::DomainViolation {
                radius: r,
                side: self.side,
            })
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut p = Point::ORIGIN;
        for c in p.0.iter_mut().take(self.dim) {
            *c = self.side * rng.random::<f64>();
        }
        p
    }
}

/// Minimum-image distance between `x` and `y` on `domain`.
pub fn torus_distance(x: &Point, y: &Point, domain: &TorusDomain) -> Result<f64> {
    domain.distance(x, y)
}
