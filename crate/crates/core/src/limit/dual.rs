//! Branching (and in `d = 1` coalescing) Brownian or stable particles on `R^d`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::geometry::{check_dim, unit_ball_volume};
use crate::scaling::{gamma_r, KernelSpec};

use super::stable::isotropic_stable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    /// Brownian motion with per-coordinate variance `variance · t`.
    Brownian { variance: f64 },
    /// Symmetric stable motion with `E exp(iθ·X_t) = exp(-t scale |θ|^α)`.
    Stable { alpha: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDualConfig {
    pub d: usize,
    pub motion: Motion,
    pub branch_rate: f64,
    /// Pair coalescence rate per unit local time; ignored unless `d = 1`.
    pub coalescence_rate: f64,
    /// Half-width of the band used to approximate local time.
    pub epsilon: f64,
    pub dt: f64,
}

impl LimitDualConfig {
    /// Brownian variance `uΓ_R`, branching `uσV_R`, coalescence `4R²u²`.
    pub fn fixed_radius(d: usize, radius: f64, u: f64, sigma: f64, epsilon: f64, dt: f64) -> Result<Self> {
        check_dim(d)?;
        let config = Self {
            d,
            motion: Motion::Brownian {
                variance: u * gamma_r(d, radius)?,
            },
            branch_rate: u * sigma * unit_ball_volume(d) * radius.powi(d as i32),
            coalescence_rate: if d == 1 { 4.0 * radius * radius * u * u } else { 0.0 },
            epsilon,
            dt,
        };
        config.validate()?;
        Ok(config)
    }

    /// Stable motion with generator `D^α`, branching `uσV_1/α`, coalescence
    /// `4u²/(α-1)`.
    pub fn stable(d: usize, alpha: f64, u: f64, sigma: f64, epsilon: f64, dt: f64) -> Result<Self> {
        let kernel = KernelSpec::new(d, alpha, u)?;
        let config = Self {
            d,
            motion: Motion::Stable {
                alpha,
                scale: u * kernel.stable_constant(),
            },
            branch_rate: u * sigma * unit_ball_volume(d) / alpha,
            coalescence_rate: if d == 1 { 4.0 * u * u / (alpha - 1.0) } else { 0.0 },
            epsilon,
            dt,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_branch_rate(mut self, rate: f64) -> Self {
        self.branch_rate = rate;
        self
    }

    pub fn with_coalescence_rate(mut self, rate: f64) -> Self {
        self.coalescence_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if !(self.branch_rate >= 0.0) || !(self.coalescence_rate >= 0.0) {
            return Err(config_err("limit-dual rates must be >= 0"));
        }
        if !(self.dt > 0.0) {
            return Err(config_err("dt must be positive"));
        }
        if self.d == 1 && !(self.epsilon > 0.0) {
            return Err(config_err("local-time band epsilon must be positive in d = 1"));
        }
        match self.motion {
            Motion::Brownian { variance } if !(variance >= 0.0) => Err(config_err("variance must be >= 0")),
            Motion::Stable { alpha, scale } if !(alpha > 1.0 && alpha < 2.0) || !(scale >= 0.0) => {
                Err(config_err("alpha must be in (1,2) and the stable scale >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Probability that a pair inside the band merges during one step.
    fn merge_probability(&self) -> f64 {
        if self.d == 1 {
            (self.coalescence_rate * self.dt / (2.0 * self.epsilon)).min(1.0)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDualSample {
    pub t: f64,
    #[serde(rename = "N")]
    pub count: usize,
    pub positions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitDualTrajectory {
    pub samples: Vec<LimitDualSample>,
    pub branches: u64,
    pub coalescences: u64,
}

/// Time-stepped limit dual: move every particle, then branch (offspring
/// starts at the parent), then in `d = 1` merge pairs closer than `ε`,
/// keeping the lower index.
pub fn simulate_limit_dual<R: Rng + ?Sized>(
    config: &LimitDualConfig,
    initial: &[[f64; 3]],
    horizon: f64,
    sample_times: &[f64],
    rng: &mut R,
) -> Result<LimitDualTrajectory> {
    config.validate()?;
    if sample_times.iter().any(|&t| t < 0.0 || t > horizon + 1e-12) {
        return Err(config_err("sample times must lie in [0, horizon]"));
    }
    let d = config.d;
    let dt = config.dt;
    let steps = (horizon / dt).round() as usize;
    let sample_steps: Vec<usize> = sample_times.iter().map(|t| (t / dt).round() as usize).collect();
    let branch_p = (config.branch_rate * dt).min(1.0);
    let merge_p = config.merge_probability();
    let step_sd = match config.motion {
        Motion::Brownian { variance } => (variance * dt).sqrt(),
        Motion::Stable { .. } => 0.0,
    };
    let stable_scale = match config.motion {
        Motion::Stable { alpha, scale } => (scale * dt).powf(1.0 / alpha),
        Motion::Brownian { .. } => 0.0,
    };

    let mut xs: Vec<[f64; 3]> = initial.to_vec();
    let mut traj = LimitDualTrajectory::default();
    let record = |step: usize, xs: &[[f64; 3]], traj: &mut LimitDualTrajectory| {
        for (k, &s) in sample_steps.iter().enumerate() {
            if s == step {
                traj.samples.push(LimitDualSample {
                    t: sample_times[k],
                    count: xs.len(),
                    positions: xs.iter().map(|p| p[..d].to_vec()).collect(),
                });
            }
        }
    };
    record(0, &xs, &mut traj);
    for step in 1..=steps {
        for p in xs.iter_mut() {
            match config.motion {
                Motion::Brownian { .. } => {
                    for c in p.iter_mut().take(d) {
                        let z: f64 = StandardNormal.sample(rng);
                        *c += step_sd * z;
                    }
                }
                Motion::Stable { alpha, .. } => {
                    let jump = isotropic_stable(alpha, d, stable_scale, rng);
                    for k in 0..d {
                        p[k] += jump[k];
                    }
                }
            }
        }
        if branch_p > 0.0 {
            let n = xs.len();
            for i in 0..n {
                if rng.random::<f64>() < branch_p {
                    xs.push(xs[i]);
                    traj.branches += 1;
                }
            }
        }
        if merge_p > 0.0 && xs.len() > 1 {
            let mut i = 0;
            while i < xs.len() {
                let mut j = i + 1;
                while j < xs.len() {
                    if (xs[i][0] - xs[j][0]).abs() < config.epsilon && rng.random::<f64>() < merge_p {
                        xs.remove(j);
                        traj.coalescences += 1;
                    } else {
                        j += 1;
                    }
                }
                i += 1;
            }
        }
        record(step, &xs, &mut traj);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn brownian_variance() {
        let cfg = LimitDualConfig::fixed_radius(1, 1.0, 0.5, 0.0, 0.05, 0.01).unwrap();
        let var = match cfg.motion {
            Motion::Brownian { variance } => variance,
            _ => unreachable!(),
        };
        assert!((var - 0.5 * 4.0 / 3.0).abs() < 1e-9);
        let t = 1.0;
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream_rng(5, i);
                let tr = simulate_limit_dual(&cfg, &[[0.0; 3]], t, &[t], &mut rng).unwrap();
                tr.samples[0].positions[0][0]
            })
            .collect();
        let m2: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let mean = m2.iter().sum::<f64>() / n as f64;
        let sd = (m2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((mean - var * t).abs() < 4.0 * sd / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn stable_scale_matches_symbol() {
        let cfg = LimitDualConfig::stable(1, 1.5, 0.5, 0.0, 0.05, 0.05).unwrap();
        let Motion::Stable { scale, .. } = cfg.motion else { unreachable!() };
        let spec = KernelSpec::new(1, 1.5, 0.5).unwrap();
        assert!((scale * 0.7f64.powf(1.5) + spec.generator_symbol(0.7)).abs() < 1e-12);
        let n = 20_000;
        let t = 1.0;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream_rng(6, i);
                simulate_limit_dual(&cfg, &[[0.0; 3]], t, &[t], &mut rng).unwrap().samples[0].positions[0][0]
            })
            .collect();
        let theta = 1.0;
        let emp = xs.iter().map(|x| (theta * x).cos()).sum::<f64>() / n as f64;
        let exact = (t * spec.generator_symbol(theta)).exp();
        assert!((emp - exact).abs() < 4.0 / (n as f64).sqrt(), "{emp} {exact}");
    }

    #[test]
    fn no_coalescence_in_two_dimensions() {
        let cfg = LimitDualConfig::fixed_radius(2, 1.0, 0.5, 1.0, 0.05, 0.01).unwrap();
        assert_eq!(cfg.coalescence_rate, 0.0);
        let forced = cfg.with_coalescence_rate(100.0);
        let mut rng = stream_rng(7, 0);
        let tr = simulate_limit_dual(&forced, &[[0.0; 3]; 4], 1.0, &[1.0], &mut rng).unwrap();
        assert_eq!(tr.coalescences, 0);
    }

    #[test]
    fn coalescence_decreases_with_separation() {
        let cfg = LimitDualConfig::fixed_radius(1, 1.0, 0.5, 0.0, 0.05, 0.002)
            .unwrap()
            .with_coalescence_rate(2.0);
        let n = 4000;
        let probs: Vec<f64> = [0.0, 0.5, 1.5]
            .iter()
            .map(|&gap| {
                let hits = (0..n)
                    .filter(|&i| {
                        let mut rng = stream_rng(8, i);
                        let tr = simulate_limit_dual(&cfg, &[[0.0; 3], [gap, 0.0, 0.0]], 1.0, &[1.0], &mut rng).unwrap();
                        tr.coalescences > 0
                    })
                    .count();
                hits as f64 / n as f64
            })
            .collect();
        for w in probs.windows(2) {
            let se = ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / n as f64).sqrt();
            assert!(w[1] <= w[0] + 4.0 * se, "{probs:?}");
        }
        assert!(probs[0] > probs[2]);
    }
}
