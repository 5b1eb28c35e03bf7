//! Explicit solvers for `∂w/∂t = L w - a w(1-w) (+ c sqrt(w(1-w)) Ẇ)` on a
//! periodic grid, where `L` is `D Δ` or the fractional generator `D^α`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};
use crate::geometry::{check_dim, unit_ball_volume};
use crate::scaling::spectral::GridFft;
use crate::scaling::{gamma_r, resolution_ok, KernelSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diffusion {
    /// `coefficient · Δ`.
    Laplacian { coefficient: f64 },
    /// `D^α` with kernel `u Φ`.
    Fractional { kernel: KernelSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdeConfig {
    pub d: usize,
    pub side: f64,
    pub cells: usize,
    pub diffusion: Diffusion,
    /// `a` in `- a w(1-w)`.
    pub reaction: f64,
    /// `c` in `c sqrt(w(1-w)) Ẇ`; only used in `d = 1`.
    pub noise: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Times at which the field is recorded; snapped to the step grid.
    pub sample_times: Vec<f64>,
}

impl PdeConfig {
    /// Coefficients of the fixed-radius limit: diffusion `uΓ_R/2`, reaction
    /// `uσV_R` and, in `d = 1`, noise `2Ru`.
    pub fn fixed_radius(d: usize, radius: f64, u: f64, sigma: f64, side: f64, cells: usize, dt: f64, horizon: f64) -> Result<Self> {
        check_dim(d)?;
        let v_r = unit_ball_volume(d) * radius.powi(d as i32);
        let config = Self {
            d,
            side,
            cells,
            diffusion: Diffusion::Laplacian {
                coefficient: 0.5 * u * gamma_r(d, radius)?,
            },
            reaction: u * sigma * v_r,
            noise: if d == 1 { 2.0 * radius * u } else { 0.0 },
            dt,
            horizon,
            sample_times: vec![horizon],
        };
        config.validate()?;
        Ok(config)
    }

    /// Coefficients of the stable-radius limit: `D^α`, reaction `uσV_1/α`
    /// (`2uσ/α` in `d = 1`) and, in `d = 1`, noise `2u/sqrt(α-1)`.
    pub fn stable(d: usize, alpha: f64, u: f64, sigma: f64, side: f64, cells: usize, dt: f64, horizon: f64) -> Result<Self> {
        let kernel = KernelSpec::new(d, alpha, u)?;
        let config = Self {
            d,
            side,
            cells,
            diffusion: Diffusion::Fractional { kernel },
            reaction: u * sigma * unit_ball_volume(d) / alpha,
            noise: if d == 1 { 2.0 * u / (alpha - 1.0).sqrt() } else { 0.0 },
            dt,
            horizon,
            sample_times: vec![horizon],
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_reaction(mut self, reaction: f64) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn with_sample_times(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }

    pub fn dx(&self) -> f64 {
        self.side / self.cells as f64
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if self.cells < 2 || !(self.side > 0.0) {
            return Err(config_err("grid needs at least 2 cells per side and a positive side"));
        }
        if !(self.dt > 0.0) || !(self.horizon >= 0.0) {
            return Err(config_err("dt must be positive and the horizon non-negative"));
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(config_err(format!("horizon {} is not a whole number of steps {}", self.horizon, self.dt)));
        }
        if !(self.reaction >= 0.0) || !(self.noise >= 0.0) {
            return Err(config_err("reaction and noise coefficients must be >= 0"));
        }
        if self.noise > 0.0 && self.d != 1 {
            return Err(config_err("noise is only defined in d = 1"));
        }
        if let Diffusion::Laplacian { coefficient } = self.diffusion {
            if !(coefficient >= 0.0) {
                return Err(config_err("diffusion coefficient must be >= 0"));
            }
            let dx = self.dx();
            let bound = dx * dx / (2.0 * self.d as f64 * coefficient);
            if self.dt > bound {
                return Err(config_err(format!("dt = {} violates the CFL bound {bound}", self.dt)));
            }
        }
        if let Diffusion::Fractional { kernel } = &self.diffusion {
            if kernel.d != self.d {
                return Err(config_err("kernel dimension does not match the grid"));
            }
        }
        if self.sample_times.iter().any(|&t| t < 0.0 || t > self.horizon + 1e-12) {
            return Err(config_err("sample times must lie in [0, horizon]"));
        }
        Ok(())
    }

    fn sample_steps(&self) -> Vec<usize> {
        self.sample_times.iter().map(|t| (t / self.dt).round() as usize).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    /// Cell updates that left `[0,1]` and were clamped back.
    pub clamped: u64,
}

fn check_initial(config: &PdeConfig, w0: &[f64]) -> Result<()> {
    config.validate()?;
    if w0.len() != config.cells.pow(config.d as u32) {
        return Err(input_err("initial field does not match the grid"));
    }
    if w0.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(input_err("initial field must lie in [0,1]"));
    }
    Ok(())
}

/// Periodic 2d+1-point Laplacian.
fn laplacian(w: &[f64], d: usize, n: usize, dx: f64, out: &mut [f64]) {
    let inv = 1.0 / (dx * dx);
    let mut stride = 1;
    out.iter_mut().for_each(|v| *v = 0.0);
    for _ in 0..d {
        for (idx, o) in out.iter_mut().enumerate() {
            let i = (idx / stride) % n;
            let up = if i + 1 == n { idx + stride - n * stride } else { idx + stride };
            let down = if i == 0 { idx + (n - 1) * stride } else { idx - stride };
            *o += (w[up] + w[down] - 2.0 * w[idx]) * inv;
        }
        stride *= n;
    }
}

fn clamp_count(w: &mut [f64]) -> u64 {
    let mut count = 0;
    for v in w.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            count += 1;
        } else if *v > 1.0 {
            *v = 1.0;
            count += 1;
        }
    }
    count
}

fn run<R: Rng + ?Sized, S: FnMut(&mut Vec<f64>, &mut Vec<f64>)>(
    config: &PdeConfig,
    w0: &[f64],
    mut diffuse: S,
    mut rng: Option<&mut R>,
) -> PdeTrajectory {
    let steps = config.steps();
    let sample_steps = config.sample_steps();
    let mut traj = PdeTrajectory {
        times: Vec::new(),
        fields: Vec::new(),
        clamped: 0,
    };
    let mut w = w0.to_vec();
    let mut work = vec![0.0; w.len()];
    let dt = config.dt;
    let noise_scale = config.noise * (dt / config.dx()).sqrt();
    let record = |step: usize, w: &[f64], traj: &mut PdeTrajectory| {
        for (k, &s) in sample_steps.iter().enumerate() {
            if s == step {
                traj.times.push(config.sample_times[k]);
                traj.fields.push(w.to_vec());
            }
        }
    };
    record(0, &w, &mut traj);
    for step in 1..=steps {
        // `work` holds the diffusion increment rate, or the diffused field
        diffuse(&mut w, &mut work);
        for i in 0..w.len() {
            let v = w[i];
            let mut next = work[i] - dt * config.reaction * v * (1.0 - v);
            if noise_scale > 0.0 {
                if let Some(r) = rng.as_deref_mut() {
                    let z: f64 = StandardNormal.sample(r);
                    next += noise_scale * (v * (1.0 - v)).max(0.0).sqrt() * z;
                }
            }
            work[i] = next;
        }
        std::mem::swap(&mut w, &mut work);
        traj.clamped += clamp_count(&mut w);
        record(step, &w, &mut traj);
    }
    traj
}

fn laplacian_stepper(config: &PdeConfig) -> impl FnMut(&mut Vec<f64>, &mut Vec<f64>) + '_ {
    let coefficient = match config.diffusion {
        Diffusion::Laplacian { coefficient } => coefficient,
        Diffusion::Fractional { .. } => unreachable!("checked by caller"),
    };
    let (d, n, dx, dt) = (config.d, config.cells, config.dx(), config.dt);
    let mut lap = vec![0.0; n.pow(d as u32)];
    move |w: &mut Vec<f64>, out: &mut Vec<f64>| {
        laplacian(w, d, n, dx, &mut lap);
        for i in 0..w.len() {
            out[i] = w[i] + dt * coefficient * lap[i];
        }
    }
}

fn require_laplacian(config: &PdeConfig) -> Result<()> {
    match config.diffusion {
        Diffusion::Laplacian { .. } => Ok(()),
        Diffusion::Fractional { .. } => Err(config_err("use solve_fractional_fkpp for fractional diffusion")),
    }
}

/// Deterministic Fisher-KPP by explicit Euler, clamped to `[0,1]`.
pub fn solve_fkpp(config: &PdeConfig, w0: &[f64]) -> Result<PdeTrajectory> {
    check_initial(config, w0)?;
    require_laplacian(config)?;
    let quiet = PdeConfig {
        noise: 0.0,
        ..config.clone()
    };
    Ok(run::<crate::rng::SimRng, _>(&quiet, w0, laplacian_stepper(&quiet), None))
}

/// One Euler-Maruyama realisation of the `d = 1` stochastic Fisher-KPP
/// equation with Wright-Fisher noise.
pub fn solve_fkpp_stochastic_1d<R: Rng + ?Sized>(config: &PdeConfig, w0: &[f64], rng: &mut R) -> Result<PdeTrajectory> {
    if config.d != 1 {
        return Err(config_err("the stochastic solver is defined in d = 1"));
    }
    check_initial(config, w0)?;
    require_laplacian(config)?;
    Ok(run(config, w0, laplacian_stepper(config), Some(rng)))
}

/// Fractional Fisher-KPP: exact spectral step for `D^α`, then explicit
/// reaction and (in `d = 1`, when `rng` is given) noise.
pub fn solve_fractional_fkpp<R: Rng + ?Sized>(
    config: &PdeConfig,
    w0: &[f64],
    rng: Option<&mut R>,
) -> Result<PdeTrajectory> {
    check_initial(config, w0)?;
    let kernel = match &config.diffusion {
        Diffusion::Fractional { kernel } => kernel,
        Diffusion::Laplacian { .. } => return Err(config_err("use solve_fkpp for Laplacian diffusion")),
    };
    if !resolution_ok(w0, config.d, config.cells) {
        log::warn!("initial field has energy near the Nyquist mode; the fractional solve may be under-resolved");
    }
    let table = kernel.symbol_grid(config.cells, config.side, 0.0);
    let propagator: Vec<f64> = table.values.iter().map(|m| (config.dt * m).exp()).collect();
    let mut fft = GridFft::new(config.d, config.cells);
    let stepper = move |w: &mut Vec<f64>, out: &mut Vec<f64>| {
        let next = fft.apply_multiplier(w, &propagator);
        out.copy_from_slice(&next);
    };
    let config = if rng.is_none() {
        PdeConfig {
            noise: 0.0,
            ..config.clone()
        }
    } else {
        config.clone()
    };
    Ok(run(&config, w0, stepper, rng))
}

/// `w(t)` of `ẇ = -a w(1-w)` from `w(0) = c`.
pub fn logistic_solution(c: f64, a: f64, t: f64) -> f64 {
    let e = (-a * t).exp();
    c * e / (1.0 - c + c * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use std::f64::consts::PI;

    fn line_config(noise: f64) -> PdeConfig {
        PdeConfig::fixed_radius(1, 1.0, 0.5, 1.0, 10.0, 50, 0.01, 1.0)
            .unwrap()
            .with_noise(noise)
    }

    #[test]
    fn equilibria_are_fixed() {
        let cfg = line_config(0.0);
        for c in [0.0, 1.0] {
            let t = solve_fkpp(&cfg, &vec![c; 50]).unwrap();
            assert!(t.fields.last().unwrap().iter().all(|&v| v == c));
            let mut rng = stream_rng(1, 0);
            let t = solve_fkpp_stochastic_1d(&line_config(1.0), &vec![c; 50], &mut rng).unwrap();
            assert!(t.fields.last().unwrap().iter().all(|&v| v == c));
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        assert!(PdeConfig::fixed_radius(1, 1.0, 0.5, 1.0, 10.0, 500, 0.01, 1.0).is_err());
    }

    #[test]
    fn logistic_half_start() {
        let cfg = PdeConfig::fixed_radius(2, 1.0, 0.5, 1.0, 4.0, 4, 1e-4, 1.0)
            .unwrap()
            .with_reaction(1.0);
        let t = solve_fkpp(&cfg, &[0.5; 16]).unwrap();
        let v = t.fields.last().unwrap()[0];
        assert!((v - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-4, "{v}");
        assert!((logistic_solution(0.5, 1.0, 1.0) - 0.268_941_4).abs() < 1e-7);
    }

    #[test]
    fn noise_free_stochastic_equals_deterministic() {
        let cfg = line_config(0.0);
        let w0: Vec<f64> = (0..50).map(|i| 0.5 + 0.4 * (2.0 * PI * i as f64 / 50.0).sin()).collect();
        let det = solve_fkpp(&cfg, &w0).unwrap();
        let mut rng = stream_rng(2, 0);
        let sto = solve_fkpp_stochastic_1d(&cfg, &w0, &mut rng).unwrap();
        assert_eq!(det, sto);
        assert_eq!(det.clamped, 0);
    }

    #[test]
    fn mass_decreases_under_reaction() {
        let cfg = line_config(0.0).with_sample_times((0..=10).map(|i| i as f64 / 10.0).collect());
        let w0: Vec<f64> = (0..50)
            .map(|i| (-(i as f64 * 0.2 - 5.0).powi(2)).exp())
            .collect();
        let t = solve_fkpp(&cfg, &w0).unwrap();
        let masses: Vec<f64> = t.fields.iter().map(|f| f.iter().sum()).collect();
        assert!(masses.windows(2).all(|m| m[1] < m[0]));
        assert_eq!(t.clamped, 0);
    }

    #[test]
    fn fractional_mode_decay_and_constant_logistic() {
        let n = 32;
        let side = 10.0;
        let cfg = PdeConfig::stable(1, 1.5, 0.5, 1.0, side, n, 0.01, 1.0)
            .unwrap()
            .with_reaction(0.0);
        let k = 2.0 * PI * 2.0 / side;
        let w0: Vec<f64> = (0..n).map(|i| 0.5 + 0.2 * (k * i as f64 * side / n as f64).cos()).collect();
        let t = solve_fractional_fkpp::<crate::rng::SimRng>(&cfg, &w0, None).unwrap();
        let Diffusion::Fractional { kernel } = &cfg.diffusion else { unreachable!() };
        let rate = kernel.generator_symbol(k);
        let end = t.fields.last().unwrap();
        for i in 0..n {
            let expect = 0.5 + 0.2 * (rate * 1.0).exp() * (k * i as f64 * side / n as f64).cos();
            assert!((end[i] - expect).abs() < 1e-10);
        }

        let cfg = PdeConfig::stable(2, 1.5, 0.5, 1.0, side, 8, 1e-4, 1.0).unwrap();
        let t = solve_fractional_fkpp::<crate::rng::SimRng>(&cfg, &vec![0.3; 64], None).unwrap();
        let a = 0.5 * 1.0 * PI / 1.5;
        assert!((cfg.reaction - a).abs() < 1e-12);
        for v in t.fields.last().unwrap() {
            assert!((v - logistic_solution(0.3, a, 1.0)).abs() < 1e-4);
        }
    }

    #[test]
    fn near_two_fractional_matches_laplacian_on_low_modes() {
        // fit D from the lowest mode, then compare the next two
        let alpha = 1.99;
        let spec = KernelSpec::new(1, alpha, 0.5).unwrap();
        let side = 20.0;
        let rates: Vec<f64> = (1..=3).map(|m| -spec.generator_symbol(2.0 * PI * m as f64 / side)).collect();
        let k1 = 2.0 * PI / side;
        let diff = rates[0] / (k1 * k1);
        for (m, r) in rates.iter().enumerate() {
            let k = 2.0 * PI * (m + 1) as f64 / side;
            assert!((r / (diff * k * k) - 1.0).abs() < 0.02, "{m} {r} {} {}", diff * k * k, spec.stable_constant());
        }
    }

    #[test]
    fn stochastic_mean_follows_heat_flow() {
        // σ = 0: the noise is a martingale term, so E⟨w_T, f⟩ solves the heat equation
        let n = 40;
        let cfg = PdeConfig::fixed_radius(1, 1.0, 0.5, 0.0, 10.0, n, 0.01, 0.5).unwrap().with_noise(0.2);
        let w0: Vec<f64> = (0..n).map(|i| 0.5 + 0.3 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
        let f: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).cos()).collect();
        let dx = 10.0 / n as f64;
        let pair = |w: &[f64]| w.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() * dx;
        let heat = pair(solve_fkpp(&cfg, &w0).unwrap().fields.last().unwrap());
        let reps = 10_000;
        let vals: Vec<f64> = (0..reps)
            .map(|i| {
                let mut rng = stream_rng(9, i);
                pair(solve_fkpp_stochastic_1d(&cfg, &w0, &mut rng).unwrap().fields.last().unwrap())
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        assert!((mean - heat).abs() < 4.0 * sd / (reps as f64).sqrt(), "{mean} vs {heat}");
    }
}
