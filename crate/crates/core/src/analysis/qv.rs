//! Realised quadratic variation of `⟨w̄^n_t, f⟩` against its predicted
//! compensator `c ∫ ⟨w̄^n(1-w̄^n), f²⟩ ds`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::event_stream::RadiusLaw;
use crate::forward::{run_forward, ForwardState, InitialField, ObservableSpec, Observer};
use crate::scaling::RescaledPlan;

/// Sampled path of `⟨w̄, f⟩` and of `⟨w̄(1-w̄), f²⟩` on rescaled times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QvSeries {
    pub times: Vec<f64>,
    pub pairing: Vec<f64>,
    pub drift_density: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QvEstimate {
    pub realized: f64,
    pub plug_in: f64,
    pub ratio: f64,
    pub increments: usize,
}

/// The constant `c` of the `d = 1` limit: `4R²u²` for fixed radii,
/// `4u²/(α-1)` for stable radii.
pub fn qv_coefficient(plan: &RescaledPlan, u: f64) -> Result<f64> {
    if plan.model.dim != 1 {
        return Err(config_err("the quadratic-variation constant is defined in d = 1"));
    }
    Ok(match plan.model.radius {
        RadiusLaw::Fixed { radius } => 4.0 * radius * radius * u * u,
        RadiusLaw::Stable { alpha, .. } => 4.0 * u * u / (alpha - 1.0),
    })
}

/// Sum of squared increments of `pairing`, and `c` times the left Riemann
/// sum of `drift_density`.
pub fn qv_estimate(series: &QvSeries, coefficient: f64) -> QvEstimate {
    let increments = series.times.len().saturating_sub(1);
    if increments < 100 {
        log::warn!("only {increments} increments; the realised quadratic variation is unreliable");
    }
    let mut realized = 0.0;
    let mut plug_in = 0.0;
    for i in 0..increments {
        realized += (series.pairing[i + 1] - series.pairing[i]).powi(2);
        plug_in += series.drift_density[i] * (series.times[i + 1] - series.times[i]);
    }
    plug_in *= coefficient;
    QvEstimate {
        realized,
        plug_in,
        ratio: realized / plug_in,
        increments,
    }
}

/// One rescaled forward run sampled at `increments + 1` evenly spaced
/// times in `[0, horizon]`. `f` lives on the rescaled torus.
pub fn qv_series<R: Rng + ?Sized>(
    plan: &RescaledPlan,
    h: f64,
    w0: &InitialField,
    f: &ObservableSpec,
    horizon: f64,
    increments: usize,
    rng: &mut R,
) -> Result<QvSeries> {
    let s = plan.space_factor();
    let radius = plan.averaging_radius();
    let mut state = ForwardState::new(plan.domain, h, 0.0)?;
    state.set_values(w0.on_grid(&state, s)?)?;
    let raw = Observer::new(f.clone(), &state, s)?;
    let smoothed = raw.smoothed(&state, radius)?;
    let cell_vol = (state.cell_width() * s).powi(plan.domain.dim() as i32);
    let f_sq: Vec<f64> = raw.weights().iter().map(|w| w * w / cell_vol).collect();

    let times: Vec<f64> = (0..=increments).map(|i| horizon * i as f64 / increments.max(1) as f64).collect();
    let sim_times: Vec<f64> = times.iter().map(|&t| plan.sim_time(t)).collect();
    let traj = run_forward(
        &mut state,
        &plan.model,
        plan.sim_time(horizon),
        std::slice::from_ref(&smoothed),
        &sim_times,
        true,
        rng,
    )?;
    let pairing = traj.values.iter().map(|v| v[0]).collect();
    let drift_density = traj
        .snapshots
        .iter()
        .map(|field| {
            let bar = state.ball_average_field(field, radius)?;
            Ok(bar.iter().zip(&f_sq).map(|(b, g)| b * (1.0 - b) * g).sum())
        })
        .collect::<Result<_>>()?;
    Ok(QvSeries {
        times,
        pairing,
        drift_density,
    })
}
