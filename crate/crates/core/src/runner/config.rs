//! JSON schema of experiment files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result, SlfvError};
use crate::event_stream::{EventModel, RadiusLaw};
use crate::forward::{InitialField, ObservableSpec};
use crate::geometry::TorusDomain;
use crate::scaling::{rescaled_plan, RescaledPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    /// Output directory; `--out` overrides it.
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub experiment: Experiment,
}

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Forward(ForwardExperiment),
    Dual(DualExperiment),
    Duality(DualityExperiment),
    ScalingTable(ScalingTableExperiment),
    Kernel(KernelExperiment),
    Pde(PdeExperiment),
    Spde(PdeExperiment),
    LimitDual(LimitDualExperiment),
    Diagnostics(DiagnosticsExperiment),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Forward(_) => "forward",
            Experiment::Dual(_) => "dual",
            Experiment::Duality(_) => "duality",
            Experiment::ScalingTable(_) => "scaling-table",
            Experiment::Kernel(_) => "kernel",
            Experiment::Pde(_) => "pde",
            Experiment::Spde(_) => "spde",
            Experiment::LimitDual(_) => "limit-dual",
            Experiment::Diagnostics(_) => "diagnostics",
        }
    }
}

/// Event model and torus. With `n` set, `side`, positions and times are in
/// rescaled units and the run uses `u_n = u n^{-γ}`, `s_n = σ n^{-δ}` on a
/// torus `n^β` times larger; otherwise `u` and `sigma` are used as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub d: usize,
    pub radius: RadiusLaw,
    pub u: f64,
    pub sigma: f64,
    #[serde(default)]
    pub n: Option<u64>,
    pub side: f64,
}

/// A model resolved into simulation units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub model: EventModel,
    pub domain: TorusDomain,
    pub plan: Option<RescaledPlan>,
}

impl Resolved {
    pub fn space_factor(&self) -> f64 {
        self.plan.map_or(1.0, |p| p.space_factor())
    }

    pub fn sim_time(&self, t: f64) -> f64 {
        self.plan.map_or(t, |p| p.sim_time(t))
    }

    /// Local averaging radius (simulation units).
    pub fn averaging_radius(&self) -> f64 {
        match self.model.radius {
            RadiusLaw::Fixed { radius } => radius,
            RadiusLaw::Stable { .. } => 1.0,
        }
    }

    /// Cell width (simulation units) dividing the torus evenly, near `target`.
    pub fn cell_width(&self, target: f64) -> f64 {
        let cells = (self.domain.side() / target).ceil().max(1.0);
        self.domain.side() / cells
    }

    /// `h` given in rescaled units, or `R/4` (`1/4` for stable radii) in
    /// simulation units.
    pub fn grid_width(&self, h: Option<f64>) -> f64 {
        let target = match h {
            Some(h) => h / self.space_factor(),
            None => self.averaging_radius() / 4.0,
        };
        self.cell_width(target)
    }
}

impl ModelSpec {
    pub fn resolve(&self) -> Result<Resolved> {
        let base = EventModel::new(self.d, self.radius, self.u, self.sigma).map_err(|e| at("model", e))?;
        match self.n {
            Some(n) => {
                let plan = rescaled_plan(&base, n, self.side).map_err(|e| at("model", e))?;
                Ok(Resolved {
                    model: plan.model,
                    domain: plan.domain,
                    plan: Some(plan),
                })
            }
            None => {
                let domain = TorusDomain::new(self.d, self.side).map_err(|e| at("model.side", e))?;
                base.check_domain(&domain).map_err(|e| at("model", e))?;
                Ok(Resolved {
                    model: base,
                    domain,
                    plan: None,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardExperiment {
    pub model: ModelSpec,
    pub initial: InitialField,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    pub horizon: f64,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    /// Write a field snapshot at every sample time.
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualExperiment {
    pub model: ModelSpec,
    pub initial_positions: Vec<Vec<f64>>,
    pub horizon: f64,
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default)]
    pub positions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityExperiment {
    pub model: ModelSpec,
    pub initial: InitialField,
    pub densities: Vec<ObservableSpec>,
    pub horizon: f64,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default = "three")]
    pub z_threshold: f64,
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingTableExperiment {
    #[serde(default)]
    pub fixed_radius: bool,
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub n: Vec<u64>,
    pub u: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelExperiment {
    pub d: usize,
    pub alpha: f64,
    pub u: f64,
    /// Optional periodic grid for a symbol table.
    #[serde(default)]
    pub cells: Option<usize>,
    #[serde(default)]
    pub side: Option<f64>,
}

/// Limit coefficients derived from the event model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum LimitCase {
    FixedRadius { radius: f64 },
    StableRadii { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeExperiment {
    pub d: usize,
    pub case: LimitCase,
    pub u: f64,
    pub sigma: f64,
    pub side: f64,
    pub cells: usize,
    pub dt: f64,
    pub horizon: f64,
    pub initial: InitialField,
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    /// Overrides the derived noise coefficient (`d = 1` only).
    #[serde(default)]
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitDualExperiment {
    pub d: usize,
    pub case: LimitCase,
    pub u: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub horizon: f64,
    pub initial_positions: Vec<Vec<f64>>,
    #[serde(default)]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default)]
    pub coalescence: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "diagnostic", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiagnosticsExperiment {
    /// Single-lineage variance and branch rate of a rescaled dual.
    Lineage {
        model: ModelSpec,
        horizon: f64,
        #[serde(default)]
        sample_times: Option<Vec<f64>>,
    },
    /// Realised against predicted quadratic variation in `d = 1`.
    Qv {
        model: ModelSpec,
        initial: InitialField,
        observable: ObservableSpec,
        horizon: f64,
        increments: usize,
        #[serde(default)]
        h: Option<f64>,
    },
    /// Local-averaging gaps at a point.
    AveragingGap {
        model: ModelSpec,
        initial: InitialField,
        x: Vec<f64>,
        radii: Vec<f64>,
        horizon: f64,
        #[serde(default)]
        h: Option<f64>,
    },
}

/// Prefixes an error with the config field it came from.
pub(crate) fn at(path: &str, e: SlfvError) -> SlfvError {
    match e {
        SlfvError::Config(m) | SlfvError::Input(m) | SlfvError::Resolution(m) => config_err(format!("{path}: {m}")),
        SlfvError::DomainViolation { .. } => config_err(format!("{path}: {e}")),
        other => other,
    }
}

/// `count` evenly spaced times ending at `horizon`.
pub fn uniform_times(horizon: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| horizon * i as f64 / count as f64).collect()
}

fn check_times(path: &str, times: &Option<Vec<f64>>, horizon: f64) -> Result<()> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(config_err(format!("{path}.horizon: must be finite and >= 0")));
    }
    if let Some(ts) = times {
        if ts.windows(2).any(|w| w[1] < w[0]) || ts.iter().any(|&t| t < 0.0 || t > horizon) {
            return Err(config_err(format!(
                "{path}.sample_times: must be non-decreasing and lie in [0, horizon]"
            )));
        }
    }
    Ok(())
}

fn check_observables(path: &str, specs: &[ObservableSpec], r: &Resolved) -> Result<()> {
    let own = TorusDomain::new(r.domain.dim(), r.domain.side() * r.space_factor())?;
    for (i, s) in specs.iter().enumerate() {
        s.validate(&own).map_err(|e| at(&format!("{path}[{i}]"), e))?;
    }
    Ok(())
}

fn check_positions(path: &str, ps: &[Vec<f64>], d: usize) -> Result<()> {
    if ps.is_empty() {
        return Err(config_err(format!("{path}: at least one position is needed")));
    }
    if let Some(i) = ps.iter().position(|p| p.len() != d || p.iter().any(|c| !c.is_finite())) {
        return Err(config_err(format!("{path}[{i}]: expected {d} finite coordinates")));
    }
    Ok(())
}

impl RunConfig {
    /// Checks every invariant that parsing cannot, with the failing field's
    /// path in the message.
    pub fn validate(&self) -> Result<()> {
        let e = "experiment";
        match &self.experiment {
            Experiment::Forward(x) => {
                let r = x.model.resolve().map_err(|err| at(e, err))?;
                x.initial.validate().map_err(|err| at("experiment.initial", err))?;
                check_observables("experiment.observables", &x.observables, &r)?;
                check_times(e, &x.sample_times, x.horizon)?;
            }
            Experiment::Dual(x) => {
                x.model.resolve().map_err(|err| at(e, err))?;
                check_positions("experiment.initial_positions", &x.initial_positions, x.model.d)?;
                check_times(e, &x.sample_times, x.horizon)?;
            }
            Experiment::Duality(x) => {
                let r = x.model.resolve().map_err(|err| at(e, err))?;
                x.initial.validate().map_err(|err| at("experiment.initial", err))?;
                if x.densities.is_empty() {
                    return Err(config_err("experiment.densities: at least one density is needed"));
                }
                check_observables("experiment.densities", &x.densities, &r)?;
                if x.densities.iter().any(|d| matches!(d, ObservableSpec::CosineMode { .. })) {
                    return Err(config_err("experiment.densities: cosine modes are not densities"));
                }
                check_times(e, &None, x.horizon)?;
            }
            Experiment::ScalingTable(x) => {
                if x.n.contains(&0) {
                    return Err(config_err("experiment.n: every n must be >= 1"));
                }
                for (i, &a) in x.alphas.iter().enumerate() {
                    if !(a > 1.0 && a < 2.0) {
                        return Err(config_err(format!("experiment.alphas[{i}]: alpha must be in (1,2), got {a}")));
                    }
                }
            }
            Experiment::Kernel(x) => {
                if !(x.alpha > 1.0 && x.alpha < 2.0) {
                    return Err(config_err(format!("experiment.alpha: alpha must be in (1,2), got {}", x.alpha)));
                }
                if x.cells.is_some() != x.side.is_some() {
                    return Err(config_err("experiment.cells: cells and side go together"));
                }
            }
            Experiment::Pde(x) | Experiment::Spde(x) => {
                if let LimitCase::StableRadii { alpha } = x.case {
                    if !(alpha > 1.0 && alpha < 2.0) {
                        return Err(config_err(format!("experiment.case.alpha: alpha must be in (1,2), got {alpha}")));
                    }
                }
                x.initial.validate().map_err(|err| at("experiment.initial", err))?;
                check_times(e, &x.sample_times, x.horizon)?;
            }
            Experiment::LimitDual(x) => {
                if let LimitCase::StableRadii { alpha } = x.case {
                    if !(alpha > 1.0 && alpha < 2.0) {
                        return Err(config_err(format!("experiment.case.alpha: alpha must be in (1,2), got {alpha}")));
                    }
                }
                check_positions("experiment.initial_positions", &x.initial_positions, x.d)?;
                check_times(e, &x.sample_times, x.horizon)?;
            }
            Experiment::Diagnostics(x) => match x {
                DiagnosticsExperiment::Lineage {
                    model,
                    horizon,
                    sample_times,
                } => {
                    if model.n.is_none() {
                        return Err(config_err("experiment.model.n: the lineage diagnostic needs a rescaled model"));
                    }
                    model.resolve().map_err(|err| at(e, err))?;
                    check_times(e, sample_times, *horizon)?;
                }
                DiagnosticsExperiment::Qv {
                    model,
                    initial,
                    observable,
                    horizon,
                    ..
                } => {
                    if model.d != 1 || model.n.is_none() {
                        return Err(config_err("experiment.model: the qv diagnostic needs a rescaled d = 1 model"));
                    }
                    let r = model.resolve().map_err(|err| at(e, err))?;
                    initial.validate().map_err(|err| at("experiment.initial", err))?;
                    check_observables("experiment.observable", std::slice::from_ref(observable), &r)?;
                    check_times(e, &None, *horizon)?;
                }
                DiagnosticsExperiment::AveragingGap {
                    model,
                    initial,
                    x,
                    horizon,
                    ..
                } => {
                    if model.n.is_none() {
                        return Err(config_err("experiment.model.n: the averaging diagnostic needs a rescaled model"));
                    }
                    model.resolve().map_err(|err| at(e, err))?;
                    initial.validate().map_err(|err| at("experiment.initial", err))?;
                    check_positions("experiment.x", std::slice::from_ref(x), model.d)?;
                    check_times(e, &None, *horizon)?;
                }
            },
        }
        Ok(())
    }

    /// Fills documented defaults so that the stored config is explicit.
    fn fill_defaults(&mut self) {
        let ten = |times: &mut Option<Vec<f64>>, horizon: f64| {
            if times.is_none() {
                *times = Some(uniform_times(horizon, 10));
            }
        };
        match &mut self.experiment {
            Experiment::Forward(x) => {
                ten(&mut x.sample_times, x.horizon);
                if x.h.is_none() {
                    if let Ok(r) = x.model.resolve() {
                        x.h = Some(r.grid_width(None) * r.space_factor());
                    }
                }
            }
            Experiment::Dual(x) => ten(&mut x.sample_times, x.horizon),
            Experiment::Duality(x) => {
                if x.h.is_none() {
                    if let Ok(r) = x.model.resolve() {
                        x.h = Some(r.grid_width(None) * r.space_factor());
                    }
                }
            }
            Experiment::Pde(x) | Experiment::Spde(x) => ten(&mut x.sample_times, x.horizon),
            Experiment::LimitDual(x) => ten(&mut x.sample_times, x.horizon),
            Experiment::Diagnostics(DiagnosticsExperiment::Lineage {
                horizon, sample_times, ..
            }) => ten(sample_times, *horizon),
            _ => {}
        }
    }
}

/// Parses and validates a config from JSON text, filling defaults.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        config_err(format!("{path}: {}", e.into_inner()))
    })?;
    config.validate()?;
    config.fill_defaults();
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}
