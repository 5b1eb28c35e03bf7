//! Both sides of the moment duality
//! `E[∫ψ ∏ w_T(x_j)] = ∫ψ E_x[∏ w_0(ξ_T^j)]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dual::{run_dual, DualState};
use crate::error::{config_err, Result};
use crate::event_stream::EventModel;
use crate::forward::{run_forward, ForwardState, InitialField, ObservableSpec, Observer};
use crate::geometry::TorusDomain;
use crate::rng::{derive_seed, stream_rng};

use super::McReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualitySetup {
    pub domain: TorusDomain,
    /// Cell width of the forward grid.
    pub h: f64,
    pub w0: InitialField,
    /// Product density `ψ = ∏ ψ_j`, one factor per point.
    pub densities: Vec<ObservableSpec>,
    pub horizon: f64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub forward: McReport,
    pub dual: McReport,
    pub z: f64,
}

/// Forward Monte Carlo of `∏_j ⟨w_T, ψ_j⟩` against the dual Monte Carlo of
/// `∏_j w_0(ξ_T^j)` with `x_j ~ ψ_j`. `w_0` is read from the same grid on
/// both sides.
pub fn duality_check(forward_model: &EventModel, dual_model: &EventModel, setup: &DualitySetup) -> Result<DualityReport> {
    if forward_model != dual_model {
        return Err(config_err("forward and dual event models differ"));
    }
    let model = forward_model;
    model.validate()?;
    model.check_domain(&setup.domain)?;
    if setup.densities.is_empty() {
        return Err(config_err("at least one density is needed"));
    }
    let mut initial = ForwardState::new(setup.domain, setup.h, 0.0)?;
    initial.set_values(setup.w0.on_grid(&initial, 1.0)?)?;
    let observers = setup
        .densities
        .iter()
        .map(|spec| Observer::new(spec.clone(), &initial, 1.0)?.normalised())
        .collect::<Result<Vec<_>>>()?;
    let bucket = model.max_radius().unwrap_or(1.0);
    let forward_seed = derive_seed(setup.seed, 0);
    let dual_seed = derive_seed(setup.seed, 1);

    let forward: Vec<f64> = (0..setup.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(forward_seed, i as u64);
            let mut state = initial.clone();
            let traj = run_forward(&mut state, model, setup.horizon, &observers, &[setup.horizon], false, &mut rng)?;
            Ok(traj.values[0].iter().product())
        })
        .collect::<Result<_>>()?;

    let dual: Vec<f64> = (0..setup.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(dual_seed, i as u64);
            let points = setup
                .densities
                .iter()
                .map(|spec| spec.sample_density(&setup.domain, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let mut dual = DualState::new(setup.domain, &points)?.with_bucket_radius(bucket);
            run_dual(&mut dual, model, setup.horizon, &[], false, &mut rng)?;
            Ok(dual.particles().iter().map(|p| initial.value_at(p)).product())
        })
        .collect::<Result<_>>()?;

    let meta = json!({
        "experiment": "duality",
        "model": model,
        "setup": setup,
    });
    let forward = McReport::from_samples(&forward, forward_seed, json!({"side": "forward", "setup": meta}));
    let dual = McReport::from_samples(&dual, dual_seed, json!({"side": "dual", "setup": meta}));
    let z = forward.z_against(&dual);
    Ok(DualityReport { forward, dual, z })
}
