//! Distance between ball averages of `w^n` at radius `r` and the local
//! average `w̄^n` at radius `n^{-β}`.

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Result, SlfvError};
use crate::forward::{run_forward, ForwardState, InitialField};
use crate::geometry::Point;
use crate::rng::stream_rng;
use crate::scaling::RescaledPlan;

use super::McReport;

/// `|avg_{B(x,r)} w - w̄^n(x)|` for each rescaled radius `r`, with `x` in
/// rescaled coordinates.
pub fn averaging_gap(plan: &RescaledPlan, state: &ForwardState, x: &Point, radii: &[f64]) -> Result<Vec<f64>> {
    let s = plan.space_factor();
    let base_radius = plan.averaging_radius();
    let x_sim = plan.to_sim(x);
    let reference = state.local_average(&x_sim, base_radius)?;
    radii
        .iter()
        .map(|&r| {
            let mut r_sim = r / s;
            if (r_sim - base_radius).abs() <= 1e-9 * base_radius {
                r_sim = base_radius;
            }
            let side = state.domain().side();
            if r_sim < state.cell_width() || r_sim > side / 4.0 {
                return Err(SlfvError::Resolution(format!(
                    "radius {r} is outside [h, L/4] = [{}, {}] in rescaled units",
                    state.cell_width() * s,
                    side * s / 4.0
                )));
            }
            Ok((state.local_average(&x_sim, r_sim)? - reference).abs())
        })
        .collect()
}

/// Monte Carlo mean of [`averaging_gap`] at rescaled time `horizon`.
pub fn averaging_gap_mc(
    plan: &RescaledPlan,
    h: f64,
    w0: &InitialField,
    x: &Point,
    radii: &[f64],
    horizon: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<McReport>> {
    let mut initial = ForwardState::new(plan.domain, h, 0.0)?;
    initial.set_values(w0.on_grid(&initial, plan.space_factor())?)?;
    let sim_horizon = plan.sim_time(horizon);
    let gaps = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut state = initial.clone();
            run_forward(&mut state, &plan.model, sim_horizon, &[], &[], false, &mut rng)?;
            averaging_gap(plan, &state, x, radii)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let samples: Vec<f64> = gaps.iter().map(|g| g[k]).collect();
            McReport::from_samples(
                &samples,
                seed,
                json!({"experiment": "averaging_gap", "n": plan.params.n, "radius": r, "horizon": horizon}),
            )
        })
        .collect())
}
