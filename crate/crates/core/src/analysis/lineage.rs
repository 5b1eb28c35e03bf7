//! Moments of single rescaled ancestral lineages.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{run_lineage, LineagePath};
use crate::error::Result;
use crate::geometry::Point;
use crate::rng::stream_rng;
use crate::scaling::RescaledPlan;

use super::stats::{ks_test, mean_se};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsdPoint {
    pub t: f64,
    pub variance: f64,
    pub std_error: f64,
}

/// Independent lineages of a rescaled dual, all started at the centre of
/// the torus. Times are rescaled; paths keep simulation units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageStudy {
    pub plan: RescaledPlan,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub seed: u64,
    pub paths: Vec<LineagePath>,
}

impl LineageStudy {
    pub fn msd(&self) -> Vec<MsdPoint> {
        lineage_msd(&self.paths, &self.times, self.plan.space_factor())
    }

    pub fn branch_rate(&self) -> (f64, f64) {
        branch_rate(&self.paths, self.horizon, self.plan.time_factor())
    }

    pub fn first_branch_ks(&self, rate: f64) -> (f64, f64, usize) {
        first_branch_ks(&self.paths, self.horizon, self.plan.time_factor(), rate)
    }

    pub fn jump_magnitudes(&self) -> Vec<f64> {
        jump_magnitudes(&self.paths, self.plan.space_factor())
    }
}

pub fn run_lineages(
    plan: &RescaledPlan,
    horizon: f64,
    times: &[f64],
    paths: usize,
    record_jumps: bool,
    seed: u64,
) -> Result<LineageStudy> {
    let start = Point([0.5 * plan.domain.side(); 3]);
    let sim_times: Vec<f64> = times.iter().map(|&t| plan.sim_time(t)).collect();
    let sim_horizon = plan.sim_time(horizon);
    let out = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            run_lineage(
                &plan.model,
                &plan.domain,
                &start,
                sim_horizon,
                &sim_times,
                record_jumps,
                false,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LineageStudy {
        plan: *plan,
        horizon,
        times: times.to_vec(),
        seed,
        paths: out,
    })
}

/// Sample variance of the first displacement coordinate at each time, in
/// units scaled by `space_factor`, with the standard error of the variance.
pub fn lineage_msd(paths: &[LineagePath], times: &[f64], space_factor: f64) -> Vec<MsdPoint> {
    times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let xs: Vec<f64> = paths.iter().map(|p| p.displacements[k].0[0] * space_factor).collect();
            let m = mean_se(&xs);
            let centred: Vec<f64> = xs.iter().map(|x| (x - m.mean).powi(2)).collect();
            let v = mean_se(&centred);
            let n = xs.len() as f64;
            MsdPoint {
                t,
                variance: v.mean * n / (n - 1.0),
                std_error: if v.std_error.is_nan() { 0.0 } else { v.std_error },
            }
        })
        .collect()
}

/// Branch events per lineage per unit rescaled time over `[0, horizon]`,
/// with its Poisson standard error.
pub fn branch_rate(paths: &[LineagePath], horizon: f64, time_factor: f64) -> (f64, f64) {
    let sim_horizon = horizon * time_factor;
    let count = paths
        .iter()
        .map(|p| p.branch_times.iter().filter(|&&t| t <= sim_horizon).count())
        .sum::<usize>() as f64;
    let exposure = paths.len() as f64 * horizon;
    (count / exposure, count.sqrt() / exposure)
}

/// KS test of the first branch times against `Exp(rate)` conditioned on
/// falling in `[0, horizon]`. Returns the statistic, the p-value and the
/// number of uncensored paths.
pub fn first_branch_ks(paths: &[LineagePath], horizon: f64, time_factor: f64, rate: f64) -> (f64, f64, usize) {
    let firsts: Vec<f64> = paths
        .iter()
        .filter_map(|p| p.branch_times.first().map(|t| t / time_factor))
        .filter(|&t| t <= horizon)
        .collect();
    let norm = 1.0 - (-rate * horizon).exp();
    let (stat, p) = ks_test(&firsts, |t| ((1.0 - (-rate * t).exp()) / norm).clamp(0.0, 1.0));
    (stat, p, firsts.len())
}

/// Lengths of all recorded jumps, scaled by `space_factor`.
pub fn jump_magnitudes(paths: &[LineagePath], space_factor: f64) -> Vec<f64> {
    paths
        .iter()
        .flat_map(|p| p.jumps.iter().map(move |j| j.norm() * space_factor))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::stats::sign_test;
    use crate::event_stream::EventModel;
    use crate::geometry::sample_in_ball;
    use crate::scaling::rescaled_plan;

    #[test]
    fn per_jump_variance_is_two_thirds_r_squared() {
        // a jump is the sum of two independent uniforms on B(0,R)
        let mut rng = stream_rng(4, 0);
        let r = 1.5;
        let n = 200_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let c = sample_in_ball(1, &Point::ORIGIN, r, &mut rng);
                sample_in_ball(1, &c, r, &mut rng).0[0]
            })
            .collect();
        let v = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((v / (2.0 * r * r / 3.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn short_rescaled_study() {
        let base = EventModel::fixed(1, 1.0, 0.5, 1.0).unwrap();
        let plan = rescaled_plan(&base, 100, 10.0).unwrap();
        let times = [0.0, 0.5, 1.0];
        let study = run_lineages(&plan, 1.0, &times, 2000, false, 3).unwrap();
        let msd = study.msd();
        assert_eq!(msd[0].variance, 0.0);
        let target = 0.5 * 4.0 / 3.0 * (1.0 + plan.params.s_n);
        assert!((msd[2].variance - target).abs() < 4.0 * msd[2].std_error, "{msd:?}");
        let finals: Vec<f64> = study.paths.iter().map(|p| p.displacements[2].0[0]).collect();
        assert!(sign_test(&finals) > 0.01);
        let (rate, se) = study.branch_rate();
        assert!((rate - 2.0 * 0.5).abs() < 4.0 * se, "{rate} {se}");
        let again = run_lineages(&plan, 1.0, &times, 2000, false, 3).unwrap();
        assert_eq!(study, again);
    }
}
