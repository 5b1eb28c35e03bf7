//! One function per experiment kind. Each computes its replicates in
//! parallel, then writes them in replicate order.

use rayon::prelude::*;
use serde_json::json;

use crate::analysis::stats::{hill_estimator, slope_through_origin};
use crate::analysis::{
    averaging_gap_mc, duality_check, qv_coefficient, qv_estimate, qv_series, run_lineages, write_report_csv,
    DualitySetup, ReportRow,
};
use crate::dual::{run_dual, write_jsonl, DualState};
use crate::error::{config_err, Result};
use crate::event_stream::RadiusLaw;
use crate::forward::snapshot::{write_binary, SnapshotHeader, FORMAT};
use crate::forward::{run_forward, ForwardState, Observer};
use crate::geometry::{unit_ball_volume, Point, TorusDomain};
use crate::limit::{
    simulate_limit_dual, solve_fkpp, solve_fkpp_stochastic_1d, solve_fractional_fkpp, Diffusion, LimitDualConfig,
    PdeConfig, PdeTrajectory,
};
use crate::rng::{stream_rng, SimRng};
use crate::scaling::{gamma_r, scaling_params, KernelSpec, ScalingCase};

use super::config::{
    at, DiagnosticsExperiment, DualExperiment, DualityExperiment, Experiment, ForwardExperiment, KernelExperiment,
    LimitCase, LimitDualExperiment, PdeExperiment, RunConfig, ScalingTableExperiment,
};
use super::{CheckResult, OutputDir};

pub(super) fn run(config: &RunConfig, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    match &config.experiment {
        Experiment::Forward(x) => forward(config, x, out),
        Experiment::Dual(x) => dual(config, x, out),
        Experiment::Duality(x) => duality(config, x, out),
        Experiment::ScalingTable(x) => scaling_table(x, out),
        Experiment::Kernel(x) => kernel(x, out),
        Experiment::Pde(x) => pde(config, x, out, false),
        Experiment::Spde(x) => pde(config, x, out, true),
        Experiment::LimitDual(x) => limit_dual(config, x, out),
        Experiment::Diagnostics(x) => diagnostics(config, x, out),
    }
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn snapshot_header(d: usize, side: f64, cells: usize, t: f64, seed: u64) -> SnapshotHeader {
    SnapshotHeader {
        format: FORMAT.to_string(),
        d,
        side,
        h: side / cells as f64,
        cells_per_side: cells,
        t,
        seed,
    }
}

fn forward(config: &RunConfig, x: &ForwardExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let r = x.model.resolve()?;
    let s = r.space_factor();
    let h = r.grid_width(x.h);
    let mut initial = ForwardState::new(r.domain, h, 0.0)?;
    initial.set_values(x.initial.on_grid(&initial, s)?)?;
    let observers = x
        .observables
        .iter()
        .map(|spec| Observer::new(spec.clone(), &initial, s))
        .collect::<Result<Vec<_>>>()?;
    let times = x.sample_times.clone().unwrap_or_default();
    let sim_times: Vec<f64> = times.iter().map(|&t| r.sim_time(t)).collect();
    let horizon = r.sim_time(x.horizon);
    let runs = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, i as u64);
            let mut state = initial.clone();
            run_forward(&mut state, &r.model, horizon, &observers, &sim_times, x.snapshots, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    out.write_with("observables.csv", |w| {
        write!(w, "replicate,t,events")?;
        for j in 0..observers.len() {
            write!(w, ",f{j}")?;
        }
        writeln!(w)?;
        for (i, run) in runs.iter().enumerate() {
            for (k, &t) in times.iter().enumerate() {
                write!(w, "{i},{t},{}", run.events)?;
                for v in &run.values[k] {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    })?;
    if x.snapshots {
        let cells = initial.cells_per_side();
        for (i, run) in runs.iter().enumerate() {
            let seed = crate::rng::derive_seed(config.seed, i as u64);
            for (k, field) in run.snapshots.iter().enumerate() {
                let header = snapshot_header(r.domain.dim(), r.domain.side() * s, cells, times[k], seed);
                out.write_with(&format!("field_r{i:04}_s{k:03}.bin"), |mut w| write_binary(&mut w, &header, field))?;
            }
        }
    }
    Ok(Vec::new())
}

fn to_points(positions: &[Vec<f64>], scale: f64) -> Vec<Point> {
    positions.iter().map(|p| Point::new(p).scale(scale)).collect()
}

fn dual(config: &RunConfig, x: &DualExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let r = x.model.resolve()?;
    let s = r.space_factor();
    let start = to_points(&x.initial_positions, 1.0 / s);
    let times = x.sample_times.clone().unwrap_or_default();
    let sim_times: Vec<f64> = times.iter().map(|&t| r.sim_time(t)).collect();
    let bucket = r.model.max_radius().unwrap_or(1.0);
    let runs = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, i as u64);
            let mut state = DualState::new(r.domain, &start)?.with_bucket_radius(bucket);
            let mut records = run_dual(&mut state, &r.model, r.sim_time(x.horizon), &sim_times, x.positions, &mut rng)?;
            for (rec, &t) in records.iter_mut().zip(&times) {
                rec.t = t;
                if let Some(ps) = rec.positions.as_mut() {
                    ps.iter_mut().flatten().for_each(|c| *c *= s);
                }
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;
    out.write_with("counts.csv", |w| {
        writeln!(w, "replicate,t,N,branches,coalescences")?;
        for (i, recs) in runs.iter().enumerate() {
            for rec in recs {
                writeln!(w, "{i},{},{},{},{}", rec.t, rec.n, rec.branches, rec.coalescences)?;
            }
        }
        Ok(())
    })?;
    if x.positions {
        for (i, recs) in runs.iter().enumerate() {
            out.write_with(&format!("dual_r{i:04}.jsonl"), |mut w| write_jsonl(&mut w, recs))?;
        }
    }
    Ok(Vec::new())
}

fn duality(config: &RunConfig, x: &DualityExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    if x.model.n.is_some() {
        return Err(config_err("experiment.model.n: duality checks run in unscaled units"));
    }
    let r = x.model.resolve()?;
    let setup = DualitySetup {
        domain: r.domain,
        h: r.grid_width(x.h),
        w0: x.initial.clone(),
        densities: x.densities.clone(),
        horizon: x.horizon,
        replicates: config.replicates,
        seed: config.seed,
    };
    let report = duality_check(&r.model, &r.model, &setup).map_err(|e| at("experiment", e))?;
    out.write_result_json("duality.json", &report)?;
    let rows = [
        ReportRow {
            experiment: "duality-forward".into(),
            estimate: report.forward.estimate,
            std_error: report.forward.std_error,
            z: Some(report.z),
        },
        ReportRow {
            experiment: "duality-dual".into(),
            estimate: report.dual.estimate,
            std_error: report.dual.std_error,
            z: Some(report.z),
        },
    ];
    out.write_with("duality.csv", |mut w| write_report_csv(&mut w, &rows))?;
    Ok(vec![check(
        "duality",
        report.z.abs() <= x.z_threshold,
        format!("|z| = {:.3}, threshold {}", report.z.abs(), x.z_threshold),
    )])
}

fn scaling_table(x: &ScalingTableExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let mut cases = Vec::new();
    if x.fixed_radius {
        cases.push(ScalingCase::FixedRadius);
    }
    cases.extend(x.alphas.iter().map(|&alpha| ScalingCase::StableRadii { alpha }));
    let mut rows = Vec::new();
    for case in &cases {
        for &n in &x.n {
            rows.push(scaling_params(n, *case, x.u, x.sigma)?);
        }
    }
    out.write_with("scaling.csv", |w| {
        writeln!(w, "case,alpha,n,beta,gamma,delta,u_n,s_n")?;
        for p in &rows {
            let (name, alpha) = match p.case {
                ScalingCase::FixedRadius => ("fixed_radius", String::new()),
                ScalingCase::StableRadii { alpha } => ("stable_radii", alpha.to_string()),
            };
            writeln!(
                w,
                "{name},{alpha},{},{},{},{},{},{}",
                p.n, p.beta, p.gamma, p.delta, p.u_n, p.s_n
            )?;
        }
        Ok(())
    })?;
    Ok(Vec::new())
}

fn kernel(x: &KernelExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let spec = KernelSpec::new(x.d, x.alpha, x.u).map_err(|e| at("experiment", e))?;
    out.write_with("kernel.csv", |mut w| spec.write_csv(&mut w))?;
    if let (Some(cells), Some(side)) = (x.cells, x.side) {
        let table = spec.symbol_grid(cells, side, 0.0);
        out.write_with("symbol_grid.csv", |w| {
            writeln!(w, "index,multiplier")?;
            for (i, v) in table.values.iter().enumerate() {
                writeln!(w, "{i},{v}")?;
            }
            Ok(())
        })?;
    }
    Ok(Vec::new())
}

fn pde_config(x: &PdeExperiment) -> Result<PdeConfig> {
    let base = match x.case {
        LimitCase::FixedRadius { radius } => {
            PdeConfig::fixed_radius(x.d, radius, x.u, x.sigma, x.side, x.cells, x.dt, x.horizon)
        }
        LimitCase::StableRadii { alpha } => PdeConfig::stable(x.d, alpha, x.u, x.sigma, x.side, x.cells, x.dt, x.horizon),
    }
    .map_err(|e| at("experiment", e))?;
    let mut config = base.with_sample_times(x.sample_times.clone().unwrap_or_default());
    if let Some(noise) = x.noise {
        config = config.with_noise(noise);
    }
    config.validate().map_err(|e| at("experiment", e))?;
    Ok(config)
}

fn initial_grid(x: &PdeExperiment) -> Result<Vec<f64>> {
    let domain = TorusDomain::new(x.d, x.side)?;
    let grid = ForwardState::new(domain, x.side / x.cells as f64, 0.0)?;
    x.initial.on_grid(&grid, 1.0)
}

fn write_pde(
    out: &mut OutputDir,
    config: &PdeConfig,
    runs: &[PdeTrajectory],
    stochastic: bool,
    seed: u64,
) -> Result<()> {
    let name = if stochastic { "spde" } else { "pde" };
    out.write_with(&format!("{name}.csv"), |w| {
        writeln!(w, "replicate,t,mean,min,max,clamped")?;
        for (i, run) in runs.iter().enumerate() {
            for (t, f) in run.times.iter().zip(&run.fields) {
                let mean = f.iter().sum::<f64>() / f.len() as f64;
                let min = f.iter().copied().fold(f64::INFINITY, f64::min);
                let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                writeln!(w, "{i},{t},{mean},{min},{max},{}", run.clamped)?;
            }
        }
        Ok(())
    })?;
    for (i, run) in runs.iter().enumerate() {
        let rep_seed = if stochastic { crate::rng::derive_seed(seed, i as u64) } else { 0 };
        for (k, (t, f)) in run.times.iter().zip(&run.fields).enumerate() {
            let header = snapshot_header(config.d, config.side, config.cells, *t, rep_seed);
            let file = if stochastic {
                format!("{name}_r{i:04}_s{k:03}.bin")
            } else {
                format!("{name}_s{k:03}.bin")
            };
            out.write_with(&file, |mut w| write_binary(&mut w, &header, f))?;
        }
    }
    Ok(())
}

fn pde(run_config: &RunConfig, x: &PdeExperiment, out: &mut OutputDir, stochastic: bool) -> Result<Vec<CheckResult>> {
    let config = pde_config(x)?;
    let w0 = initial_grid(x)?;
    let fractional = matches!(config.diffusion, Diffusion::Fractional { .. });
    let runs = if stochastic {
        if config.d != 1 {
            return Err(config_err("experiment.d: the stochastic equation is solved in d = 1"));
        }
        (0..run_config.replicates)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(run_config.seed, i as u64);
                if fractional {
                    solve_fractional_fkpp(&config, &w0, Some(&mut rng))
                } else {
                    solve_fkpp_stochastic_1d(&config, &w0, &mut rng)
                }
            })
            .collect::<Result<Vec<_>>>()?
    } else if fractional {
        vec![solve_fractional_fkpp::<SimRng>(&config, &w0, None)?]
    } else {
        vec![solve_fkpp(&config, &w0)?]
    };
    write_pde(out, &config, &runs, stochastic, run_config.seed)?;
    let clamped: u64 = runs.iter().map(|r| r.clamped).sum();
    Ok(if stochastic {
        Vec::new()
    } else {
        vec![check("max-principle", clamped == 0, format!("{clamped} clamped cell updates"))]
    })
}

fn limit_dual(config: &RunConfig, x: &LimitDualExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    let mut cfg = match x.case {
        LimitCase::FixedRadius { radius } => LimitDualConfig::fixed_radius(x.d, radius, x.u, x.sigma, x.epsilon, x.dt),
        LimitCase::StableRadii { alpha } => LimitDualConfig::stable(x.d, alpha, x.u, x.sigma, x.epsilon, x.dt),
    }
    .map_err(|e| at("experiment", e))?;
    if x.coalescence == Some(false) {
        cfg = cfg.with_coalescence_rate(0.0);
    }
    let start: Vec<[f64; 3]> = x
        .initial_positions
        .iter()
        .map(|p| {
            let mut q = [0.0; 3];
            q[..p.len()].copy_from_slice(p);
            q
        })
        .collect();
    let times = x.sample_times.clone().unwrap_or_default();
    let runs = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, i as u64);
            simulate_limit_dual(&cfg, &start, x.horizon, &times, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    out.write_with("counts.csv", |w| {
        writeln!(w, "replicate,t,N,total_branches,total_coalescences")?;
        for (i, run) in runs.iter().enumerate() {
            for s in &run.samples {
                writeln!(w, "{i},{},{},{},{}", s.t, s.count, run.branches, run.coalescences)?;
            }
        }
        Ok(())
    })?;
    for (i, run) in runs.iter().enumerate() {
        out.write_with(&format!("limit_dual_r{i:04}.jsonl"), |w| {
            for s in &run.samples {
                serde_json::to_writer(&mut *w, s)?;
                writeln!(w)?;
            }
            Ok(())
        })?;
    }
    Ok(Vec::new())
}

fn diagnostics(config: &RunConfig, x: &DiagnosticsExperiment, out: &mut OutputDir) -> Result<Vec<CheckResult>> {
    match x {
        DiagnosticsExperiment::Lineage {
            model,
            horizon,
            sample_times,
        } => {
            let r = model.resolve()?;
            let plan = r.plan.expect("validated: rescaled model");
            let times = sample_times.clone().unwrap_or_default();
            let stable = matches!(r.model.radius, RadiusLaw::Stable { .. });
            let study = run_lineages(&plan, *horizon, &times, config.replicates, stable, config.seed)?;
            let msd = study.msd();
            out.write_with("lineage.csv", |w| {
                writeln!(w, "t,variance,std_error")?;
                for m in &msd {
                    writeln!(w, "{},{},{}", m.t, m.variance, m.std_error)?;
                }
                Ok(())
            })?;
            let (rate, rate_se) = study.branch_rate();
            let mut checks = Vec::new();
            let mut summary = json!({"branch_rate": rate, "branch_rate_se": rate_se});
            match model.radius {
                RadiusLaw::Fixed { radius } => {
                    let vars: Vec<f64> = msd.iter().map(|m| m.variance).collect();
                    let (slope, slope_se) = slope_through_origin(&times, &vars);
                    let target = model.u * gamma_r(model.d, radius)? * (1.0 + plan.params.s_n);
                    let rate_target = model.u * model.sigma * unit_ball_volume(model.d) * radius.powi(model.d as i32);
                    let (_, ks_p, _) = study.first_branch_ks(rate_target);
                    checks.push(check(
                        "variance-slope",
                        within(slope, target, 0.05),
                        format!("slope {slope:.5} target {target:.5}"),
                    ));
                    checks.push(check(
                        "branch-rate",
                        within(rate, rate_target, 0.05) && ks_p > 0.01,
                        format!("rate {rate:.5} target {rate_target:.5}, KS p {ks_p:.3}"),
                    ));
                    summary["variance_slope"] = json!(slope);
                    summary["variance_slope_se"] = json!(slope_se);
                    summary["variance_slope_target"] = json!(target);
                    summary["branch_rate_target"] = json!(rate_target);
                    summary["first_branch_ks_p"] = json!(ks_p);
                }
                RadiusLaw::Stable { alpha, .. } => {
                    let rate_target = model.u * model.sigma * unit_ball_volume(model.d) / alpha;
                    let (hill, k) = hill_estimator(&study.jump_magnitudes(), 2.0 * plan.space_factor());
                    checks.push(check(
                        "tail-index",
                        (hill - alpha).abs() <= 0.15,
                        format!("Hill {hill:.4} from {k} jumps, alpha {alpha}"),
                    ));
                    checks.push(check(
                        "branch-rate",
                        within(rate, rate_target, 0.05),
                        format!("rate {rate:.5} target {rate_target:.5}"),
                    ));
                    summary["hill"] = json!(hill);
                    summary["hill_exceedances"] = json!(k);
                    summary["branch_rate_target"] = json!(rate_target);
                }
            }
            out.write_result_json("lineage_summary.json", &summary)?;
            Ok(checks)
        }
        DiagnosticsExperiment::Qv {
            model,
            initial,
            observable,
            horizon,
            increments,
            h,
        } => {
            let r = model.resolve()?;
            let plan = r.plan.expect("validated: rescaled model");
            let h = r.grid_width(*h);
            let c = qv_coefficient(&plan, model.u)?;
            let estimates = (0..config.replicates)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(config.seed, i as u64);
                    let series = qv_series(&plan, h, initial, observable, *horizon, *increments, &mut rng)?;
                    Ok(qv_estimate(&series, c))
                })
                .collect::<Result<Vec<_>>>()?;
            out.write_with("qv.csv", |w| {
                writeln!(w, "replicate,realized,plug_in,ratio")?;
                for (i, e) in estimates.iter().enumerate() {
                    writeln!(w, "{i},{},{},{}", e.realized, e.plug_in, e.ratio)?;
                }
                Ok(())
            })?;
            let mean_ratio = estimates.iter().map(|e| e.ratio).sum::<f64>() / estimates.len().max(1) as f64;
            Ok(vec![check(
                "qv-ratio",
                (0.8..=1.2).contains(&mean_ratio),
                format!("mean realised/plug-in ratio {mean_ratio:.4}"),
            )])
        }
        DiagnosticsExperiment::AveragingGap {
            model,
            initial,
            x: point,
            radii,
            horizon,
            h,
        } => {
            let r = model.resolve()?;
            let plan = r.plan.expect("validated: rescaled model");
            let h = r.grid_width(*h);
            let reports = averaging_gap_mc(
                &plan,
                h,
                initial,
                &Point::new(point),
                radii,
                *horizon,
                config.replicates,
                config.seed,
            )
            .map_err(|e| at("experiment", e))?;
            out.write_with("averaging_gap.csv", |w| {
                writeln!(w, "radius,estimate,std_error")?;
                for (rad, rep) in radii.iter().zip(&reports) {
                    writeln!(w, "{rad},{},{}", rep.estimate, rep.std_error)?;
                }
                Ok(())
            })?;
            Ok(Vec::new())
        }
    }
}
