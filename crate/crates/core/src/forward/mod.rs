//! Forward-in-time simulation of the allele-frequency field `w_t`.
//!
//! The field is stored as cell averages on a regular grid of `(L/h)^d`
//! cells. An event touches exactly the cells whose centres lie in the event
//! ball, and a parent's type is read from the cell containing it.

mod initial;
mod observable;
pub mod snapshot;

pub use initial::InitialField;
pub use observable::{ObservableSpec, Observer, GAUSSIAN_CUTOFF};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result, SlfvError};
use crate::event_stream::{EventKind, EventModel, EventStream, ReproductionEvent};
use crate::geometry::{sample_in_ball, Point, TorusDomain};
use crate::scaling::{rescaled_plan, RescaledPlan};

/// Grid-discretised field `w: torus -> [0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardState {
    domain: TorusDomain,
    h: f64,
    cells_per_side: usize,
    w: Vec<f64>,
    time: f64,
}

impl ForwardState {
    /// Constant field `w ≡ fill`. `L/h` must be an integer.
    pub fn new(domain: TorusDomain, h: f64, fill: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fill) {
            return Err(config_err(format!("initial value {fill} outside [0,1]")));
        }
        let cells_per_side = cells_for(domain.side(), h)?;
        let total = cells_per_side
            .checked_pow(domain.dim() as u32)
            .filter(|&n| n <= 1 << 31)
            .ok_or_else(|| config_err(format!("grid of {cells_per_side}^{} cells is too large", domain.dim())))?;
        Ok(Self {
            domain,
            h: domain.side() / cells_per_side as f64,
            cells_per_side,
            w: vec![fill; total],
            time: 0.0,
        })
    }

    /// Field initialised from `f` evaluated at cell centres.
    pub fn from_fn<F: Fn(&Point) -> f64>(domain: TorusDomain, h: f64, f: F) -> Result<Self> {
        let mut state = Self::new(domain, h, 0.0)?;
        for i in 0..state.w.len() {
            state.w[i] = f(&state.cell_center(i));
        }
        state.set_values(state.w.clone())?;
        Ok(state)
    }

    pub fn domain(&self) -> &TorusDomain {
        &self.domain
    }

    pub fn cell_width(&self) -> f64 {
        self.h
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn set_values(&mut self, w: Vec<f64>) -> Result<()> {
        if w.len() != self.w.len() {
            return Err(input_err(format!("expected {} cell values, got {}", self.w.len(), w.len())));
        }
        if let Some(bad) = w.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(input_err(format!("cell value {bad} outside [0,1]")));
        }
        self.w = w;
        Ok(())
    }

    /// True when every cell lies in `[0,1]`.
    pub fn in_unit_range(&self) -> bool {
        self.w.iter().all(|v| (0.0..=1.0).contains(v))
    }

    fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for c in out.iter_mut().take(self.domain.dim()) {
            *c = idx % self.cells_per_side;
            idx /= self.cells_per_side;
        }
        out
    }

    fn flat_index(&self, m: &[usize; 3]) -> usize {
        let n = self.cells_per_side;
        let mut idx = 0;
        for k in (0..self.domain.dim()).rev() {
            idx = idx * n + m[k];
        }
        idx
    }

    pub fn cell_center(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut p = Point::ORIGIN;
        for k in 0..self.domain.dim() {
            p.0[k] = (m[k] as f64 + 0.5) * self.h;
        }
        p
    }

    /// Index of the cell containing `p` (wrapped onto the torus first).
    /// A point on a cell boundary belongs to the lower cell.
    pub fn cell_of(&self, p: &Point) -> usize {
        let p = self.domain.wrap(p);
        let mut m = [0usize; 3];
        for k in 0..self.domain.dim() {
            let i = (p.0[k] / self.h).ceil() as i64 - 1;
            m[k] = i.clamp(0, self.cells_per_side as i64 - 1) as usize;
        }
        self.flat_index(&m)
    }

    pub fn value_at(&self, p: &Point) -> f64 {
        self.w[self.cell_of(p)]
    }

    /// Calls `visit` on every cell whose centre lies in the closed ball
    /// `B(x, r)`. Requires `L > 2r` so no cell is visited twice.
    pub fn for_each_cell_in_ball<F: FnMut(usize)>(&self, x: &Point, r: f64, mut visit: F) {
        let d = self.domain.dim();
        let n = self.cells_per_side as i64;
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for k in 0..d {
            lo[k] = ((x.0[k] - r) / self.h - 0.5).ceil() as i64;
            hi[k] = ((x.0[k] + r) / self.h - 0.5).floor() as i64;
        }
        let r2 = r * r;
        let offset = |k: usize, i: i64| (i as f64 + 0.5) * self.h - x.0[k];
        let wrap = |i: i64| i.rem_euclid(n) as usize;
        match d {
            1 => {
                for i in lo[0]..=hi[0] {
                    if offset(0, i).abs() <= r {
                        visit(wrap(i));
                    }
                }
            }
            2 => {
                for j in lo[1]..=hi[1] {
                    let dy = offset(1, j);
                    let rem = r2 - dy * dy;
                    if rem < 0.0 {
                        continue;
                    }
                    let row = wrap(j) * n as usize;
                    for i in lo[0]..=hi[0] {
                        let dx = offset(0, i);
                        if dx * dx <= rem {
                            visit(row + wrap(i));
                        }
                    }
                }
            }
            _ => {
                for l in lo[2]..=hi[2] {
                    let dz = offset(2, l);
                    for j in lo[1]..=hi[1] {
                        let dy = offset(1, j);
                        let rem = r2 - dz * dz - dy * dy;
                        if rem < 0.0 {
                            continue;
                        }
                        let base = (wrap(l) * n as usize + wrap(j)) * n as usize;
                        for i in lo[0]..=hi[0] {
                            let dx = offset(0, i);
                            if dx * dx <= rem {
                                visit(base + wrap(i));
                            }
                        }
                    }
                }
            }
        }
    }

    /// Samples the parental type for `e`: `true` means type 0.
    fn draw_parent<R: Rng + ?Sized>(&self, e: &ReproductionEvent, rng: &mut R) -> bool {
        let z = sample_in_ball(self.domain.dim(), &e.center, e.radius, rng);
        rng.random::<f64>() < self.value_at(&z)
    }

    fn check_event(&self, e: &ReproductionEvent) -> Result<()> {
        self.domain.check_radius(e.radius)?;
        if !self.domain.contains(&e.center) {
            return Err(input_err(format!("event centre {:?} outside the domain", e.center)));
        }
        Ok(())
    }

    /// Affine update `w <- (1-u) w + u 1{offspring type 0}` on the event ball.
    fn update_ball(&mut self, e: &ReproductionEvent, type_zero: bool) {
        let u = e.impact;
        let target = if type_zero { 1.0 } else { 0.0 };
        let mut w = std::mem::take(&mut self.w);
        self.for_each_cell_in_ball(&e.center, e.radius, |i| {
            // written as w + u (b - w) so that 0 and 1 are fixed exactly
            w[i] += u * (target - w[i]);
        });
        self.w = w;
    }

    /// Neutral event: one parent, uniform in the ball. Returns the
    /// offspring type (`true` for type 0).
    pub fn apply_neutral_event<R: Rng + ?Sized>(&mut self, e: &ReproductionEvent, rng: &mut R) -> Result<bool> {
        self.check_event(e)?;
        let kappa = self.draw_parent(e, rng);
        self.update_ball(e, kappa);
        self.time = self.time.max(e.time);
        Ok(kappa)
    }

    /// Selective event: offspring is type 0 only if both potential parents are.
    pub fn apply_selective_event<R: Rng + ?Sized>(&mut self, e: &ReproductionEvent, rng: &mut R) -> Result<bool> {
        self.check_event(e)?;
        let kappa = self.draw_parent(e, rng);
        let kappa_prime = self.draw_parent(e, rng);
        self.update_ball(e, kappa && kappa_prime);
        self.time = self.time.max(e.time);
        Ok(kappa && kappa_prime)
    }

    pub fn apply_event<R: Rng + ?Sized>(&mut self, e: &ReproductionEvent, rng: &mut R) -> Result<bool> {
        match e.kind {
            EventKind::Neutral => self.apply_neutral_event(e, rng),
            EventKind::Selective => self.apply_selective_event(e, rng),
        }
    }

    /// Average of the cell values whose centres lie in `B(x, r)`.
    pub fn local_average(&self, x: &Point, r: f64) -> Result<f64> {
        if r < self.h {
            return Err(SlfvError::Resolution(format!(
                "averaging radius {r} below cell width {}",
                self.h
            )));
        }
        if 2.0 * r >= self.domain.side() {
            return Err(input_err(format!("averaging radius {r} too large for the torus")));
        }
        let x = self.domain.wrap(x);
        let (mut sum, mut count) = (0.0, 0usize);
        self.for_each_cell_in_ball(&x, r, |i| {
            sum += self.w[i];
            count += 1;
        });
        Ok(sum / count as f64)
    }

    /// Offsets (in cells) of every cell centre within `r` of a cell centre.
    fn ball_stencil(&self, r: f64) -> Vec<[i64; 3]> {
        let d = self.domain.dim();
        let k = (r / self.h).floor() as i64;
        let mut out = Vec::new();
        let range = |on: bool| if on { -k..=k } else { 0..=0 };
        for c in range(d > 2) {
            for b in range(d > 1) {
                for a in -k..=k {
                    let dist2 = ((a * a + b * b + c * c) as f64) * self.h * self.h;
                    if dist2 <= r * r * (1.0 + 1e-12) {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    /// Ball average of an arbitrary grid field: entry `j` is the mean of
    /// `field` over cells whose centres lie within `r` of centre `j`.
    pub fn ball_average_field(&self, field: &[f64], r: f64) -> Result<Vec<f64>> {
        if field.len() != self.w.len() {
            return Err(input_err("field length does not match the grid"));
        }
        if r < self.h {
            return Err(SlfvError::Resolution(format!(
                "averaging radius {r} below cell width {}",
                self.h
            )));
        }
        let n = self.cells_per_side as i64;
        if self.domain.dim() == 1 {
            // running window sum
            let k = (r / self.h * (1.0 + 1e-12)).floor() as i64;
            let width = (2 * k + 1) as f64;
            let at = |i: i64| field[i.rem_euclid(n) as usize];
            let mut sum: f64 = (-k..=k).map(at).sum();
            let mut out = Vec::with_capacity(field.len());
            for i in 0..n {
                out.push(sum / width);
                sum += at(i + k + 1) - at(i - k);
            }
            return Ok(out);
        }
        let stencil = self.ball_stencil(r);
        let inv = 1.0 / stencil.len() as f64;
        let out = (0..field.len())
            .map(|j| {
                let m = self.multi_index(j);
                let mut acc = 0.0;
                for s in &stencil {
                    let mut q = [0usize; 3];
                    for k in 0..self.domain.dim() {
                        q[k] = (m[k] as i64 + s[k]).rem_euclid(n) as usize;
                    }
                    acc += field[self.flat_index(&q)];
                }
                acc * inv
            })
            .collect();
        Ok(out)
    }

    /// Midpoint-rule `⟨w, f⟩` for `f` on the same torus.
    pub fn pair_with(&self, spec: &ObservableSpec) -> f64 {
        let vol = self.h.powi(self.domain.dim() as i32);
        (0..self.w.len())
            .map(|i| spec.eval(&self.cell_center(i), &self.domain) * self.w[i] * vol)
            .sum()
    }
}

fn cells_for(side: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(config_err(format!("cell width must be positive, got {h}")));
    }
    let ratio = side / h;
    let cells = ratio.round();
    if cells < 1.0 || (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
        return Err(config_err(format!("L/h = {ratio} must be an integer")));
    }
    Ok(cells as usize)
}

/// Observable values at each sample time, plus optional field copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardTrajectory {
    pub times: Vec<f64>,
    /// `values[i][j]` is observer `j` at `times[i]`.
    pub values: Vec<Vec<f64>>,
    #[serde(skip)]
    pub snapshots: Vec<Vec<f64>>,
    pub events: u64,
}

/// Applies the Poisson event stream of `model` to `state` up to `horizon`,
/// recording every observer at each of `sample_times` (ascending, in
/// simulation time).
pub fn run_forward<R: Rng + ?Sized>(
    state: &mut ForwardState,
    model: &EventModel,
    horizon: f64,
    observers: &[Observer],
    sample_times: &[f64],
    keep_snapshots: bool,
    rng: &mut R,
) -> Result<ForwardTrajectory> {
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(input_err("sample times must be non-decreasing"));
    }
    if sample_times.iter().any(|&t| t < state.time() || t > horizon) {
        return Err(input_err("sample times must lie between the current time and the horizon"));
    }
    let mut stream = EventStream::new(*model, *state.domain(), state.time())?;
    let mut out = ForwardTrajectory {
        times: Vec::with_capacity(sample_times.len()),
        values: Vec::with_capacity(sample_times.len()),
        snapshots: Vec::new(),
        events: 0,
    };
    let record = |state: &ForwardState, t: f64, out: &mut ForwardTrajectory| {
        out.times.push(t);
        out.values.push(observers.iter().map(|o| o.observe(state)).collect());
        if keep_snapshots {
            out.snapshots.push(state.values().to_vec());
        }
    };
    let mut next_sample = 0;
    while let Some(e) = stream.next_before(horizon, rng) {
        while next_sample < sample_times.len() && sample_times[next_sample] < e.time {
            record(state, sample_times[next_sample], &mut out);
            next_sample += 1;
        }
        state.apply_event(&e, rng)?;
        out.events += 1;
    }
    state.set_time(horizon);
    for &t in &sample_times[next_sample..] {
        record(state, t, &mut out);
    }
    Ok(out)
}

/// Simulation plan for the rescaled field `w^n_t(x) = w_{nt}(n^β x)`.
pub fn rescaled_config(base: &EventModel, n: u64, rescaled_side: f64) -> Result<RescaledPlan> {
    rescaled_plan(base, n, rescaled_side)
}
