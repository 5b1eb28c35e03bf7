//! Poisson streams of reproduction events.
//!
//! Neutral and selective events share a single exponential clock; each
//! event flips a coin with odds `1 : s` for its kind.

use rand::distr::OpenClosed01;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result, SlfvError};
use crate::geometry::{check_dim, unit_ball_volume, Point, TorusDomain};

/// Law `μ` of event radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusLaw {
    /// `μ = δ_R`.
    Fixed { radius: f64 },
    /// `μ(dr) = 1{r >= 1} r^{-(d+α+1)} dr`, optionally cut at `max_radius`
    /// so that events fit on a finite torus.
    Stable {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_radius: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Neutral,
    Selective,
}

/// Event intensities: radius law `μ`, selective law `s μ`, impact `δ_u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventModel {
    pub dim: usize,
    pub radius: RadiusLaw,
    pub impact: f64,
    pub selection: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproductionEvent {
    pub time: f64,
    pub center: Point,
    pub radius: f64,
    pub impact: f64,
    pub kind: EventKind,
}

impl EventModel {
    pub fn new(dim: usize, radius: RadiusLaw, impact: f64, selection: f64) -> Result<Self> {
        let model = Self {
            dim,
            radius,
            impact,
            selection,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn fixed(dim: usize, radius: f64, impact: f64, selection: f64) -> Result<Self> {
        Self::new(dim, RadiusLaw::Fixed { radius }, impact, selection)
    }

    pub fn stable(dim: usize, alpha: f64, max_radius: Option<f64>, impact: f64, selection: f64) -> Result<Self> {
        Self::new(dim, RadiusLaw::Stable { alpha, max_radius }, impact, selection)
    }

    /// Parameter checks, including finiteness of `∫ r^d u μ(dr)`.
    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if !(self.impact > 0.0 && self.impact <= 1.0) {
            return Err(config_err(format!("impact u must be in (0,1], got {}", self.impact)));
        }
        if !(self.selection >= 0.0) || !self.selection.is_finite() {
            return Err(config_err(format!("selection s must be >= 0, got {}", self.selection)));
        }
        match self.radius {
            RadiusLaw::Fixed { radius } => {
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(config_err(format!("radius must be positive, got {radius}")));
                }
            }
            RadiusLaw::Stable { alpha, max_radius } => {
                // ∫_1^∞ r^d r^{-(d+α+1)} dr = 1/α is finite for every α > 0;
                // the scaling results need α in (1,2).
                if !(alpha > 1.0 && alpha < 2.0) {
                    return Err(config_err(format!("alpha must be in (1,2), got {alpha}")));
                }
                if let Some(m) = max_radius {
                    if !(m > 1.0) || !m.is_finite() {
                        return Err(config_err(format!("max_radius must be > 1, got {m}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest radius any event can have, if bounded.
    pub fn max_radius(&self) -> Option<f64> {
        match self.radius {
            RadiusLaw::Fixed { radius } => Some(radius),
            RadiusLaw::Stable { max_radius, .. } => max_radius,
        }
    }

    /// Checks that every event fits on `domain` without self-overlap.
    pub fn check_domain(&self, domain: &TorusDomain) -> Result<()> {
        if domain.dim() != self.dim {
            return Err(config_err(format!(
                "model dimension {} does not match domain dimension {}",
                self.dim,
                domain.dim()
            )));
        }
        match self.max_radius() {
            Some(r) => domain.check_radius(r),
            None => Err(SlfvError::DomainViolation {
                radius: f64::INFINITY,
                side: domain.side(),
            }),
        }
    }

    fn stable_tail(k: f64, max_radius: Option<f64>) -> f64 {
        max_radius.map_or(0.0, |m| m.powf(-k))
    }

    /// Total mass `∫ μ(dr)`.
    pub fn radius_mass(&self) -> f64 {
        match self.radius {
            RadiusLaw::Fixed { .. } => 1.0,
            RadiusLaw::Stable { alpha, max_radius } => {
                let k = self.dim as f64 + alpha;
                (1.0 - Self::stable_tail(k, max_radius)) / k
            }
        }
    }

    /// `∫ V_r μ(dr)`: rate at which a fixed point is covered by neutral events.
    pub fn covering_mass(&self) -> f64 {
        let v1 = unit_ball_volume(self.dim);
        match self.radius {
            RadiusLaw::Fixed { radius } => v1 * radius.powi(self.dim as i32),
            RadiusLaw::Stable { alpha, max_radius } => {
                v1 * (1.0 - Self::stable_tail(alpha, max_radius)) / alpha
            }
        }
    }

    /// Covering rate of a single point by events of either kind, `(1+s) ∫ V_r μ(dr)`.
    pub fn covering_rate(&self) -> f64 {
        (1.0 + self.selection) * self.covering_mass()
    }

    pub fn selective_probability(&self) -> f64 {
        self.selection / (1.0 + self.selection)
    }

    /// Radius drawn from `μ` normalised.
    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.radius {
            RadiusLaw::Fixed { radius } => radius,
            RadiusLaw::Stable { alpha, max_radius } => {
                let k = self.dim as f64 + alpha;
                truncated_pareto(k, max_radius, rng.sample(OpenClosed01))
            }
        }
    }

    /// Radius drawn from the size-biased law `V_r μ(dr) / ∫ V_r μ(dr)`.
    pub fn sample_covering_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.radius {
            RadiusLaw::Fixed { radius } => radius,
            RadiusLaw::Stable { alpha, max_radius } => {
                truncated_pareto(alpha, max_radius, rng.sample(OpenClosed01))
            }
        }
    }

    pub fn sample_kind<R: Rng + ?Sized>(&self, rng: &mut R) -> EventKind {
        if self.selection > 0.0 && rng.random_bool(self.selective_probability()) {
            EventKind::Selective
        } else {
            EventKind::Neutral
        }
    }
}

/// Inverse survival function of a Pareto law with index `k` on `[1, max]`;
/// `survival = 1` gives radius 1.
fn truncated_pareto(k: f64, max_radius: Option<f64>, survival: f64) -> f64 {
    match max_radius {
        None => survival.powf(-1.0 / k),
        Some(m) => {
            let floor = m.powf(-k);
            (floor + survival * (1.0 - floor)).powf(-1.0 / k).min(m)
        }
    }
}

/// `U^{-1/(d+α)}`: inverse CDF of the untruncated stable radius law.
pub fn sample_stable_radius(alpha: f64, d: usize, u: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(config_err(format!("alpha must be in (1,2), got {alpha}")));
    }
    check_dim(d)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(input_err(format!("U must lie in (0,1), got {u}")));
    }
    Ok(truncated_pareto(d as f64 + alpha, None, u))
}

/// Rate of all events on the torus, `L^d (1+s) ∫ μ(dr)`.
pub fn total_event_rate(model: &EventModel, domain: &TorusDomain) -> f64 {
    domain.volume() * (1.0 + model.selection) * model.radius_mass()
}

/// Marks of a single event at time `t`: uniform centre, radius from `μ`.
pub fn sample_event<R: Rng + ?Sized>(
    model: &EventModel,
    domain: &TorusDomain,
    t: f64,
    rng: &mut R,
) -> ReproductionEvent {
    let center = domain.sample_uniform(rng);
    let radius = model.sample_radius(rng);
    let kind = model.sample_kind(rng);
    ReproductionEvent {
        time: t,
        center,
        radius,
        impact: model.impact,
        kind,
    }
}

/// Lazily generated, time-ordered event stream on a torus.
#[derive(Debug, Clone)]
pub struct EventStream {
    model: EventModel,
    domain: TorusDomain,
    clock: Exp<f64>,
    time: f64,
}

impl EventStream {
    pub fn new(model: EventModel, domain: TorusDomain, start: f64) -> Result<Self> {
        model.validate()?;
        model.check_domain(&domain)?;
        let rate = total_event_rate(&model, &domain);
        let clock = Exp::new(rate).map_err(|e| config_err(format!("event rate {rate}: {e}")))?;
        Ok(Self {
            model,
            domain,
            clock,
            time: start,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn model(&self) -> &EventModel {
        &self.model
    }

    pub fn domain(&self) -> &TorusDomain {
        &self.domain
    }

    pub fn next_event<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ReproductionEvent {
        self.time += self.clock.sample(rng);
        sample_event(&self.model, &self.domain, self.time, rng)
    }

    /// Next event if it occurs no later than `horizon`; otherwise the clock
    /// is parked at `horizon`.
    pub fn next_before<R: Rng + ?Sized>(&mut self, horizon: f64, rng: &mut R) -> Option<ReproductionEvent> {
        let t = self.time + self.clock.sample(rng);
        if t > horizon {
            self.time = horizon;
            return None;
        }
        self.time = t;
        Some(sample_event(&self.model, &self.domain, t, rng))
    }
}
