//! Acceptance criteria. Runs as a plain binary (`harness = false`) so that
//! every criterion prints one PASS/FAIL line even when all of them pass.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use slfv::analysis::stats::{hill_estimator, mean_se, slope_through_origin};
use slfv::analysis::{duality_check, qv_coefficient, qv_estimate, qv_series, run_lineages, DualitySetup};
use slfv::event_stream::{EventStream, RadiusLaw};
use slfv::forward::{run_forward, ForwardState, InitialField, ObservableSpec};
use slfv::geometry::ball_volume;
use slfv::limit::{logistic_solution, simulate_limit_dual, solve_fkpp, LimitDualConfig, PdeConfig};
use slfv::runner::{parse_config, run_experiment};
use slfv::scaling::{
    gamma_r, levy_symbol, phi_kernel, phi_kernel_d1_closed, rescaled_plan, symbol_truncation_gap,
};
use slfv::{stream_rng, EventModel, TorusDomain};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

fn duality_identity() -> Outcome {
    let domain = TorusDomain::new(1, 10.0).unwrap();
    let models = [
        ("fixed", EventModel::fixed(1, 1.0, 0.3, 0.1).unwrap()),
        ("stable 1.5", EventModel::stable(1, 1.5, Some(2.4), 0.3, 0.1).unwrap()),
    ];
    let centers = [4.5, 5.5];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, model) in models {
        for k in 1..=2 {
            let setup = DualitySetup {
                domain,
                h: 0.01,
                w0: InitialField::HalfTorus,
                densities: (0..k).map(|j| ObservableSpec::gaussian(&[centers[j]], 0.3)).collect(),
                horizon: 2.0,
                replicates: 10_000,
                seed: 2024,
            };
            let r = duality_check(&model, &model, &setup).unwrap();
            passed &= r.z.abs() <= 3.0;
            parts.push(format!("{name} k={k} z={:+.2}", r.z));
        }
    }
    outcome(passed, parts.join(", "))
}

fn gamma_constant() -> Outcome {
    // independent route: Γ_R = V_R E[z_1^2] with z = x + y, x, y uniform on
    // B(0,R); in d=1 this is (1/2)∫_{-1}^{1} ∫_{x-1}^{x+1} z^2 dz dx by Simpson
    let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, m: usize| {
        let h = (b - a) / m as f64;
        let s: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * f(a + i as f64 * h)
            })
            .sum();
        s * h / 3.0
    };
    let inner = |x: f64| simpson(&|z: f64| z * z, x - 1.0, x + 1.0, 2);
    let oracle = 0.5 * simpson(&inner, -1.0, 1.0, 2);
    let g11 = gamma_r(1, 1.0).unwrap();
    let mut passed = (g11 - 4.0 / 3.0).abs() <= 1e-6 && (g11 - oracle).abs() <= 1e-6;
    let mut worst: f64 = 0.0;
    for d in 1..=2 {
        let scaled = 2f64.powi(d as i32 + 2) * gamma_r(d, 1.0).unwrap();
        let err = (gamma_r(d, 2.0).unwrap() - scaled).abs();
        worst = worst.max(err);
        passed &= err <= 1e-6;
    }
    outcome(
        passed,
        format!("Γ_1(d=1) = {g11:.12}, Simpson oracle {oracle:.12}, worst scaling-law error {worst:.2e}"),
    )
}

fn phi_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [1.2, 1.5, 1.8] {
        for m in log_spaced(0.1, 10.0, 25) {
            let q = phi_kernel(1, alpha, m).unwrap();
            let c = phi_kernel_d1_closed(alpha, m);
            worst = worst.max((q / c - 1.0).abs());
        }
    }
    outcome(worst <= 1e-8, format!("worst relative error {worst:.2e}"))
}

fn stable_homogeneity() -> Outcome {
    let mut worst_psi: f64 = 0.0;
    let mut worst_phi: f64 = 0.0;
    for alpha in [1.2, 1.5, 1.8] {
        for theta in log_spaced(0.05, 20.0, 20) {
            let a = levy_symbol(&[theta], 1, alpha, None).unwrap();
            let b = levy_symbol(&[2.0 * theta], 1, alpha, None).unwrap();
            worst_psi = worst_psi.max((b / a - 2f64.powf(alpha)).abs());
        }
        for d in 1..=2 {
            for m in [0.3, 1.0, 3.0] {
                let ratio = phi_kernel(d, alpha, 2.0 * m).unwrap() / phi_kernel(d, alpha, m).unwrap();
                worst_phi = worst_phi.max((ratio - 2f64.powf(-(d as f64 + alpha))).abs());
            }
        }
    }
    outcome(
        worst_psi <= 1e-2 && worst_phi <= 1e-6,
        format!("ψ ratio error {worst_psi:.2e}, Φ ratio error {worst_phi:.2e}"),
    )
}

/// Largest `|ψ^n - ψ| / (c ρ^{2-α} θ^2)` over a θ grid, with the gap taken
/// both as a difference of symbols and by direct integration.
fn truncation_ratio(alpha: f64, n: u64, constant: f64) -> (f64, f64) {
    let rho = (n as f64).powf(-1.0 / (2.0 * alpha - 1.0));
    let mut worst: f64 = 0.0;
    let mut route_gap: f64 = 0.0;
    for theta in log_spaced(1e-2, 1e2, 40) {
        let diff = levy_symbol(&[theta], 1, alpha, Some(n)).unwrap() - levy_symbol(&[theta], 1, alpha, None).unwrap();
        let direct = symbol_truncation_gap(theta, 1, alpha, rho);
        let bound = constant * rho.powf(2.0 - alpha) * theta * theta;
        route_gap = route_gap.max((diff - direct).abs() / bound);
        worst = worst.max(diff.abs() / bound);
    }
    (worst, route_gap)
}

fn symbol_approximation() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for alpha in [1.2, 1.4] {
        for n in [100u64, 10_000] {
            let (ratio, route) = truncation_ratio(alpha, n, 4.0 / 3.0);
            passed &= ratio <= 1.0 && route <= 1e-6;
            parts.push(format!("α={alpha} n={n}: gap/bound {ratio:.3}"));
        }
    }
    outcome(passed, parts.join(", "))
}

/// The constant `4^d/3` is too small once `α > 3/2`; `2·4^d/(3(2-α))` holds
/// for every α.
fn symbol_approximation_all_alpha() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for alpha in [1.2, 1.5, 1.7, 1.9] {
        let stated = truncation_ratio(alpha, 10_000, 4.0 / 3.0).0;
        let (ratio, route) = truncation_ratio(alpha, 10_000, 8.0 / (3.0 * (2.0 - alpha)));
        passed &= ratio <= 1.0 && route <= 1e-6;
        parts.push(format!("α={alpha}: {ratio:.3} (4/3 constant: {stated:.3})"));
    }
    outcome(passed, parts.join(", "))
}

fn fixed_lineage() -> Outcome {
    let (u, sigma) = (0.5, 1.0);
    let plan = rescaled_plan(&EventModel::fixed(1, 1.0, u, sigma).unwrap(), 10_000, 10.0).unwrap();
    let times: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let study = run_lineages(&plan, 1.0, &times, 10_000, false, 5).unwrap();
    let vars: Vec<f64> = study.msd().iter().map(|m| m.variance).collect();
    let (slope, _) = slope_through_origin(&times, &vars);
    let target = u * gamma_r(1, 1.0).unwrap() * (1.0 + plan.params.s_n);
    let (rate, _) = study.branch_rate();
    let rate_target = u * sigma * ball_volume(1, 1.0).unwrap();
    let (_, p, _) = study.first_branch_ks(rate_target);
    outcome(
        (slope / target - 1.0).abs() <= 0.05 && (rate / rate_target - 1.0).abs() <= 0.05 && p > 0.01,
        format!("slope {slope:.4} vs {target:.4}, branch rate {rate:.4} vs {rate_target:.4}, KS p {p:.3}"),
    )
}

fn stable_lineage() -> Outcome {
    let (alpha, u, sigma) = (1.5, 0.5, 1.0);
    let plan = rescaled_plan(&EventModel::stable(1, alpha, None, u, sigma).unwrap(), 10_000, 10.0).unwrap();
    let study = run_lineages(&plan, 1.0, &[1.0], 10_000, true, 6).unwrap();
    let (hill, k) = hill_estimator(&study.jump_magnitudes(), 2.0 * plan.space_factor());
    let (rate, _) = study.branch_rate();
    let rate_target = u * sigma * ball_volume(1, 1.0).unwrap() / alpha;
    outcome(
        (hill - alpha).abs() <= 0.15 && (rate / rate_target - 1.0).abs() <= 0.05,
        format!("Hill {hill:.4} from {k} jumps, branch rate {rate:.4} vs {rate_target:.4}"),
    )
}

fn fuzzed_model<R: Rng>(rng: &mut R) -> (EventModel, TorusDomain, f64) {
    let d = rng.random_range(1..=2);
    let u = rng.random_range(0.05..=1.0);
    let sigma = rng.random_range(0.0..1.0);
    let (radius, reach) = if rng.random_bool(0.5) {
        let r = rng.random_range(0.5..1.5);
        (RadiusLaw::Fixed { radius: r }, r)
    } else {
        let alpha = rng.random_range(1.1..1.9);
        (RadiusLaw::Stable { alpha, max_radius: Some(2.0) }, 2.0)
    };
    let model = EventModel::new(d, radius, u, sigma).unwrap();
    let side = if d == 1 { 10.0 } else { 4.0 * reach + 1.0 };
    let h = if d == 1 { 0.1 } else { side / 24.0 };
    (model, TorusDomain::new(d, side).unwrap(), h)
}

fn forward_invariants() -> Outcome {
    let mut rng = stream_rng(8, 0);
    let mut events = 0u64;
    let mut left_range = 0u64;
    let mut absorbing_broken = 0u64;
    for config in 0..40 {
        let (model, domain, h) = fuzzed_model(&mut rng);
        let mut state = ForwardState::new(domain, h, 0.0).unwrap();
        let values: Vec<f64> = (0..state.len()).map(|_| rng.random::<f64>()).collect();
        state.set_values(values).unwrap();
        let mut stream = EventStream::new(model, domain, 0.0).unwrap();
        let mut run_rng = stream_rng(8, config + 1);
        for _ in 0..25_000 {
            let e = stream.next_event(&mut run_rng);
            state.apply_event(&e, &mut run_rng).unwrap();
            events += 1;
            if !state.in_unit_range() {
                left_range += 1;
            }
        }
        for fill in [0.0, 1.0] {
            let mut pure = ForwardState::new(domain, h, fill).unwrap();
            let mut stream = EventStream::new(model, domain, 0.0).unwrap();
            for _ in 0..1_000 {
                let e = stream.next_event(&mut run_rng);
                pure.apply_event(&e, &mut run_rng).unwrap();
            }
            if pure.values().iter().any(|&v| v != fill) {
                absorbing_broken += 1;
            }
        }
    }
    // neutral drift: E[mean of w_T] = c
    let c = 0.3;
    let domain = TorusDomain::new(1, 10.0).unwrap();
    let model = EventModel::fixed(1, 1.0, 0.5, 0.0).unwrap();
    let initial = ForwardState::new(domain, 0.1, c).unwrap();
    let means: Vec<f64> = (0..4_000u64)
        .into_par_iter()
        .map(|i| {
            let mut s = initial.clone();
            run_forward(&mut s, &model, 20.0, &[], &[], false, &mut stream_rng(80, i)).unwrap();
            s.values().iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let m = mean_se(&means);
    let z = (m.mean - c) / m.std_error;
    outcome(
        events >= 1_000_000 && left_range == 0 && absorbing_broken == 0 && z.abs() <= 4.0,
        format!(
            "{events} events, {left_range} out-of-range states, {absorbing_broken} broken absorbing runs, neutral mean {:.5} ± {:.5} (z {z:+.2})",
            m.mean, m.std_error
        ),
    )
}

/// Mean absolute difference per PDE cell between the replicate average of
/// the ball-averaged field and the PDE solution at `t_end`.
fn limit_distance(n: u64, target: &[f64], pde_grid: &ForwardState, w0: &InitialField, t_end: f64) -> f64 {
    let plan = rescaled_plan(&EventModel::fixed(2, 1.0, 0.5, 1.0).unwrap(), n, 4.0).unwrap();
    let mut state = ForwardState::new(plan.domain, plan.cell_width(0.25), 0.0).unwrap();
    state.set_values(w0.on_grid(&state, plan.space_factor()).unwrap()).unwrap();
    let reps = 200;
    let fields: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut s = state.clone();
            run_forward(&mut s, &plan.model, plan.sim_time(t_end), &[], &[], false, &mut stream_rng(9, i)).unwrap();
            let mut bar = s.clone();
            bar.set_values(s.ball_average_field(s.values(), 1.0).unwrap()).unwrap();
            (0..pde_grid.len())
                .map(|j| bar.value_at(&plan.to_sim(&pde_grid.cell_center(j))))
                .collect()
        })
        .collect();
    (0..target.len())
        .map(|j| {
            let mean = fields.iter().map(|f| f[j]).sum::<f64>() / reps as f64;
            (mean - target[j]).abs()
        })
        .sum::<f64>()
        / target.len() as f64
}

fn deterministic_limit() -> Outcome {
    let (side, cells, t_end) = (4.0, 40, 1.0);
    let w0 = InitialField::Cosine {
        mean: 0.5,
        amplitude: 0.4,
        wavenumber: 1,
    };
    let cfg = PdeConfig::fixed_radius(2, 1.0, 0.5, 1.0, side, cells, 0.002, t_end).unwrap();
    let pde_grid = ForwardState::new(TorusDomain::new(2, side).unwrap(), side / cells as f64, 0.0).unwrap();
    let init = w0.on_grid(&pde_grid, 1.0).unwrap();
    let target = solve_fkpp(&cfg, &init).unwrap().fields.pop().unwrap();
    let small = limit_distance(20, &target, &pde_grid, &w0, t_end);
    let large = limit_distance(200, &target, &pde_grid, &w0, t_end);
    outcome(
        large <= 0.05 && large < small,
        format!("L1 per unit area: n=20 {small:.4}, n=200 {large:.4}"),
    )
}

fn quadratic_variation() -> Outcome {
    let u = 0.5;
    let plan = rescaled_plan(&EventModel::fixed(1, 1.0, u, 1.0).unwrap(), 1000, 4.0).unwrap();
    let f = ObservableSpec::gaussian(&[2.0], 0.3);
    let c = qv_coefficient(&plan, u).unwrap();
    let h = plan.cell_width(0.25);
    let w0 = InitialField::Constant { value: 0.5 };
    let ratios: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let series = qv_series(&plan, h, &w0, &f, 1.0, 1000, &mut stream_rng(7, i)).unwrap();
            qv_estimate(&series, c).ratio
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    outcome((0.8..=1.2).contains(&mean), format!("mean realised/plug-in ratio {mean:.4}"))
}

fn yule_growth() -> Outcome {
    let (u, sigma, horizon) = (0.5, 1.0, 2.0);
    let cfg = LimitDualConfig::fixed_radius(1, 1.0, u, sigma, 0.01, 5e-4)
        .unwrap()
        .with_coalescence_rate(0.0);
    let counts: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let traj = simulate_limit_dual(&cfg, &[[0.0; 3]], horizon, &[horizon], &mut stream_rng(11, i)).unwrap();
            traj.samples[0].count as f64
        })
        .collect();
    let m = mean_se(&counts);
    let target = (u * sigma * 2.0 * horizon).exp();
    let z = (m.mean - target) / m.std_error;
    outcome(
        z.abs() <= 4.0,
        format!("E[N_T] {:.4} ± {:.4} vs {target:.4} (z {z:+.2})", m.mean, m.std_error),
    )
}

fn logistic_oracle() -> Outcome {
    let c = 0.3;
    let times: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    let cfg = PdeConfig::fixed_radius(1, 1.0, 0.5, 1.0, 8.0, 8, 1e-6, 1.0)
        .unwrap()
        .with_sample_times(times.clone());
    let a = cfg.reaction;
    let traj = solve_fkpp(&cfg, &[c; 8]).unwrap();
    let mut worst: f64 = 0.0;
    for (t, field) in traj.times.iter().zip(&traj.fields) {
        let exact = logistic_solution(c, a, *t);
        for v in field {
            worst = worst.max((v - exact).abs());
        }
    }
    outcome(
        worst <= 1e-6 && traj.times.len() == times.len(),
        format!("worst error {worst:.2e} at {} times", traj.times.len()),
    )
}

fn result_files(dir: &Path, names: &[String]) -> Vec<(String, Vec<u8>)> {
    let mut all: Vec<String> = names.to_vec();
    all.push("config.json".into());
    all.into_iter()
        .map(|n| {
            let bytes = std::fs::read(dir.join(&n)).unwrap();
            (n, bytes)
        })
        .collect()
}

fn reproducibility() -> Outcome {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&configs)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let tmp = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let mut files = 0;
    for path in &paths {
        let mut config = parse_config(path).unwrap();
        config.replicates = config.replicates.min(6);
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        config.output = tmp.path().join(&stem);
        let mut runs = Vec::new();
        for jobs in [1, 1, 8] {
            let outcome = run_experiment(&config, jobs).unwrap();
            runs.push(result_files(&outcome.dir, &outcome.manifest.files));
        }
        files += runs[0].len();
        if runs[1] != runs[0] || runs[2] != runs[0] {
            mismatched.push(stem);
        }
    }
    outcome(
        mismatched.is_empty() && !paths.is_empty(),
        format!(
            "{} configs, {files} files compared across two 1-job runs and one 8-job run; mismatched: {mismatched:?}",
            paths.len()
        ),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 duality identity", duality_identity),
        ("2 Γ_R constant", gamma_constant),
        ("3 Φ closed form", phi_closed_form),
        ("4 stable homogeneity", stable_homogeneity),
        ("5 symbol approximation", symbol_approximation),
        ("5b symbol approximation, α up to 1.9", symbol_approximation_all_alpha),
        ("6 fixed-radius lineage", fixed_lineage),
        ("7 stable lineage", stable_lineage),
        ("8 forward invariants", forward_invariants),
        ("9 deterministic limit", deterministic_limit),
        ("10 quadratic variation", quadratic_variation),
        ("11 limit-dual Yule growth", yule_growth),
        ("12 logistic oracle", logistic_oracle),
        ("13 reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("{verdict} [{name}] {} ({:.1?})", o.detail, start.elapsed());
        if !o.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
