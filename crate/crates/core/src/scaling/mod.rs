//! Scaling exponents and limit constants.
//!
//! * [`scaling_params`]: exponents `(β, γ, δ)` and the rescaled impact and
//!   selection `u_n = u / n^γ`, `s_n = σ / n^δ`.
//! * [`gamma_r`]: diffusion constant `Γ_R` of the fixed-radius limit.
//! * [`phi_kernel`], [`levy_symbol`], [`KernelSpec`]: jump kernel and
//!   characteristic exponent of the stable-radius limit.
//! * [`apply_fractional_generator`]: `D^α f` on a periodic grid.

mod generator;
mod kernel;
pub(crate) mod spectral;

pub use generator::{apply_fractional_generator, direct_generator_1d, resolution_ok};
pub use kernel::{
    ball_char_function, phi_kernel, phi_kernel_d1_closed, symbol_truncation_gap, levy_symbol, levy_symbol_radial,
    KernelSpec, SymbolTable,
};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::event_stream::{EventModel, RadiusLaw};
use crate::geometry::{check_dim, unit_ball_volume, Point, TorusDomain};
use crate::quadrature::integrate;

/// Which rescaling regime applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ScalingCase {
    FixedRadius,
    StableRadii { alpha: f64 },
}

impl ScalingCase {
    pub fn of(model: &EventModel) -> Self {
        match model.radius {
            RadiusLaw::Fixed { .. } => ScalingCase::FixedRadius,
            RadiusLaw::Stable { alpha, .. } => ScalingCase::StableRadii { alpha },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub n: u64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub u_n: f64,
    pub s_n: f64,
    pub case: ScalingCase,
}

impl ScalingParams {
    /// Factor `n^{-β}` taking simulation lengths to rescaled lengths.
    pub fn space_factor(&self) -> f64 {
        (self.n as f64).powf(-self.beta)
    }

    /// Factor `n` taking rescaled times to simulation times.
    pub fn time_factor(&self) -> f64 {
        self.n as f64
    }
}

/// `(β, γ, δ) = (1, α-1, α) / (2α-1)` without range checks; `α = 2`
/// gives the fixed-radius exponents.
pub fn stable_exponents(alpha: f64) -> (f64, f64, f64) {
    let denom = 2.0 * alpha - 1.0;
    (1.0 / denom, (alpha - 1.0) / denom, alpha / denom)
}

pub const FIXED_RADIUS_EXPONENTS: (f64, f64, f64) = (1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0);

/// Exponents and rescaled parameters for impact `u` and selection `σ`.
pub fn scaling_params(n: u64, case: ScalingCase, u: f64, sigma: f64) -> Result<ScalingParams> {
    if n < 1 {
        return Err(config_err("n must be >= 1"));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(config_err(format!("impact u must be in (0,1], got {u}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(config_err(format!("selection sigma must be >= 0, got {sigma}")));
    }
    let (beta, gamma, delta) = match case {
        ScalingCase::FixedRadius => FIXED_RADIUS_EXPONENTS,
        ScalingCase::StableRadii { alpha } => {
            if !(alpha > 1.0 && alpha < 2.0) {
                return Err(config_err(format!("alpha must be in (1,2), got {alpha}")));
            }
            stable_exponents(alpha)
        }
    };
    let nf = n as f64;
    Ok(ScalingParams {
        n,
        beta,
        gamma,
        delta,
        u_n: u / nf.powf(gamma),
        s_n: sigma / nf.powf(delta),
        case,
    })
}

/// Plan for simulating a rescaled process with the unscaled simulators:
/// run with `u_n, s_n` on a torus of side `n^β L` up to time `n T`, then
/// multiply lengths by `n^{-β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledPlan {
    pub params: ScalingParams,
    /// Event model in simulation units.
    pub model: EventModel,
    /// Torus in simulation units.
    pub domain: TorusDomain,
    pub rescaled_side: f64,
}

impl RescaledPlan {
    pub fn space_factor(&self) -> f64 {
        self.params.space_factor()
    }

    pub fn time_factor(&self) -> f64 {
        self.params.time_factor()
    }

    pub fn sim_time(&self, rescaled_t: f64) -> f64 {
        rescaled_t * self.time_factor()
    }

    pub fn to_rescaled(&self, p: &Point) -> Point {
        p.scale(self.space_factor())
    }

    pub fn to_sim(&self, p: &Point) -> Point {
        p.scale(1.0 / self.space_factor())
    }

    /// Radius, in simulation units, of the ball defining the local average
    /// `w̄^n`: `R` for fixed radii and `1` for stable radii.
    pub fn averaging_radius(&self) -> f64 {
        match self.model.radius {
            RadiusLaw::Fixed { radius } => radius,
            RadiusLaw::Stable { .. } => 1.0,
        }
    }

    /// Cell width in simulation units closest to `target` that divides the
    /// simulation torus evenly.
    pub fn cell_width(&self, target: f64) -> f64 {
        let cells = (self.domain.side() / target).ceil().max(1.0);
        self.domain.side() / cells
    }
}

/// See [`RescaledPlan`]. `base` carries `u` and `σ` as its impact and
/// selection. Unbounded stable radii are cut at a fifth of the simulation
/// torus side.
pub fn rescaled_plan(base: &EventModel, n: u64, rescaled_side: f64) -> Result<RescaledPlan> {
    base.validate()?;
    let case = ScalingCase::of(base);
    let params = scaling_params(n, case, base.impact, base.selection)?;
    let side = rescaled_side / params.space_factor();
    let domain = TorusDomain::new(base.dim, side)?;
    let radius = match base.radius {
        RadiusLaw::Stable { alpha, max_radius: None } => RadiusLaw::Stable {
            alpha,
            max_radius: Some(side / 5.0),
        },
        other => other,
    };
    let model = EventModel::new(base.dim, radius, params.u_n, params.s_n)?;
    model.check_domain(&domain)?;
    Ok(RescaledPlan {
        params,
        model,
        domain,
        rescaled_side,
    })
}

/// `(d-1)`-volume of the slice of `B(0, R)` at height `t`.
fn slice_measure(d: usize, r: f64, t: f64) -> f64 {
    let rem = (r * r - t * t).max(0.0);
    match d {
        1 => 1.0,
        2 => 2.0 * rem.sqrt(),
        _ => std::f64::consts::PI * rem,
    }
}

/// `∫_{-R}^{R} g(t) slice(t) dt` with `t = R sin φ` to smooth the edges.
fn integrate_over_ball<F: Fn(f64) -> f64>(d: usize, r: f64, g: F) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if d == 1 {
        return integrate(&g, -r, r, 1e-14 * r.max(1.0), 1e-13).value;
    }
    integrate(
        |phi: f64| {
            let t = r * phi.sin();
            g(t) * slice_measure(d, r, t) * r * phi.cos()
        },
        -half_pi,
        half_pi,
        1e-14,
        1e-13,
    )
    .value
}

/// `Γ_R = (1/V_R) ∫_{B(0,R)} ∫_{B(x,R)} z_1^2 dz dx` by nested quadrature.
pub fn gamma_r(d: usize, r: f64) -> Result<f64> {
    check_dim(d)?;
    if !(r > 0.0) {
        return Err(config_err(format!("radius must be positive, got {r}")));
    }
    let v_r = unit_ball_volume(d) * r.powi(d as i32);
    // the inner integral depends on x only through x_1
    let inner = |x1: f64| integrate_over_ball(d, r, |t| (x1 + t) * (x1 + t));
    Ok(integrate_over_ball(d, r, inner) / v_r)
}
