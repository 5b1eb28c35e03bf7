//! Test functions `f` and the pairing `⟨w, f⟩`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::geometry::{sample_in_ball, Point, TorusDomain};

use super::ForwardState;

/// Gaussian bumps are cut off at this many widths.
pub const GAUSSIAN_CUTOFF: f64 = 5.0;

/// Analytic families of test functions, in the coordinates of the torus
/// they are evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// `a exp(-|x-c|^2 / (2 w^2))` truncated at `|x-c| = 5w`.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `1{|x-c| <= r}`.
    BallIndicator { center: Vec<f64>, radius: f64 },
    /// `cos(2π k·x / L)` for an integer wave vector `k`.
    CosineMode { wavenumbers: Vec<i32> },
}

fn one() -> f64 {
    1.0
}

impl ObservableSpec {
    pub fn gaussian(center: &[f64], width: f64) -> Self {
        ObservableSpec::GaussianBump {
            center: center.to_vec(),
            width,
            amplitude: 1.0,
        }
    }

    pub fn ball(center: &[f64], radius: f64) -> Self {
        ObservableSpec::BallIndicator {
            center: center.to_vec(),
            radius,
        }
    }

    /// Radius of the support, or `None` for periodic modes.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            ObservableSpec::GaussianBump { width, .. } => Some(GAUSSIAN_CUTOFF * width),
            ObservableSpec::BallIndicator { radius, .. } => Some(*radius),
            ObservableSpec::CosineMode { .. } => None,
        }
    }

    pub fn validate(&self, domain: &TorusDomain) -> Result<()> {
        let d = domain.dim();
        let check_center = |c: &[f64]| -> Result<()> {
            if c.len() != d {
                return Err(config_err(format!("observable centre has {} coordinates, domain has {d}", c.len())));
            }
            if !domain.contains(&Point::new(c)) {
                return Err(config_err(format!("observable centre {c:?} outside the domain")));
            }
            Ok(())
        };
        match self {
            ObservableSpec::GaussianBump { center, width, amplitude } => {
                check_center(center)?;
                if !(*width > 0.0) || !amplitude.is_finite() {
                    return Err(config_err("gaussian bump needs width > 0 and finite amplitude"));
                }
            }
            ObservableSpec::BallIndicator { center, radius } => {
                check_center(center)?;
                if !(*radius > 0.0) {
                    return Err(config_err("ball indicator needs radius > 0"));
                }
            }
            ObservableSpec::CosineMode { wavenumbers } => {
                if wavenumbers.len() != d {
                    return Err(config_err(format!("cosine mode needs {d} wavenumbers")));
                }
            }
        }
        if let Some(r) = self.support_radius() {
            if 2.0 * r >= domain.side() {
                return Err(config_err(format!(
                    "observable support radius {r} does not fit in side {}",
                    domain.side()
                )));
            }
        }
        Ok(())
    }

    /// `f(x)` for `x` on `domain`.
    pub fn eval(&self, x: &Point, domain: &TorusDomain) -> f64 {
        match self {
            ObservableSpec::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let r2 = domain.displacement(&Point::new(center), x).norm_sq();
                if r2 > (GAUSSIAN_CUTOFF * width).powi(2) {
                    0.0
                } else {
                    amplitude * (-r2 / (2.0 * width * width)).exp()
                }
            }
            ObservableSpec::BallIndicator { center, radius } => {
                let r2 = domain.displacement(&Point::new(center), x).norm_sq();
                if r2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            ObservableSpec::CosineMode { wavenumbers } => {
                let k = 2.0 * std::f64::consts::PI / domain.side();
                let phase: f64 = wavenumbers.iter().zip(x.0.iter()).map(|(&n, &c)| n as f64 * c).sum();
                (k * phase).cos()
            }
        }
    }

    /// Sample from the normalised density `|f| / ∫|f|` (bump and ball only).
    pub fn sample_density<R: Rng + ?Sized>(&self, domain: &TorusDomain, rng: &mut R) -> Result<Point> {
        let d = domain.dim();
        match self {
            ObservableSpec::GaussianBump { center, width, .. } => {
                let c = Point::new(center);
                loop {
                    let mut off = Point::ORIGIN;
                    for v in off.0.iter_mut().take(d) {
                        let z: f64 = StandardNormal.sample(rng);
                        *v = width * z;
                    }
                    if off.norm() <= GAUSSIAN_CUTOFF * width {
                        return Ok(domain.wrap(&c.add(&off)));
                    }
                }
            }
            ObservableSpec::BallIndicator { center, radius } => {
                Ok(domain.wrap(&sample_in_ball(d, &Point::new(center), *radius, rng)))
            }
            ObservableSpec::CosineMode { .. } => Err(config_err("cosine modes are not densities")),
        }
    }
}

/// An observable with its midpoint-rule weights on a particular grid.
#[derive(Debug, Clone)]
pub struct Observer {
    pub spec: ObservableSpec,
    weights: Vec<f64>,
}

impl Observer {
    /// Weights for `⟨w, f⟩` where `f` lives on the torus scaled by
    /// `space_scale`: `⟨w, f⟩ = Σ_i f(s c_i) w_i (s h)^d`.
    pub fn new(spec: ObservableSpec, state: &ForwardState, space_scale: f64) -> Result<Self> {
        let domain = TorusDomain::new(state.domain().dim(), state.domain().side() * space_scale)?;
        spec.validate(&domain)?;
        let cell_vol = (state.cell_width() * space_scale).powi(domain.dim() as i32);
        let weights = (0..state.len())
            .map(|i| spec.eval(&state.cell_center(i).scale(space_scale), &domain) * cell_vol)
            .collect();
        Ok(Self { spec, weights })
    }

    /// Same observable normalised so its weights sum to one.
    pub fn normalised(mut self) -> Result<Self> {
        let total: f64 = self.weights.iter().sum();
        if !(total.abs() > 0.0) {
            return Err(config_err("observable integrates to zero on this grid"));
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        Ok(self)
    }

    /// Pairing against the field averaged over balls of `radius` (in
    /// simulation units): `⟨w̄, f⟩ = ⟨w, f̄⟩` since ball averaging is symmetric.
    pub fn smoothed(&self, state: &ForwardState, radius: f64) -> Result<Self> {
        let weights = state.ball_average_field(&self.weights, radius)?;
        Ok(Self {
            spec: self.spec.clone(),
            weights,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn observe(&self, state: &ForwardState) -> f64 {
        self.pair(state.values())
    }

    pub fn pair(&self, field: &[f64]) -> f64 {
        self.weights.iter().zip(field).map(|(a, b)| a * b).sum()
    }
}
