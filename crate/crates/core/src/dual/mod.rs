//! Backward-in-time branching-coalescing lineages `Ξ_t`.
//!
//! Events that cover at least one lineage are sampled by thinning: each
//! lineage proposes events covering it at rate `Λ₁ = (1+s) ∫ V_r μ(dr)`, and a
//! proposal covering `k` lineages is kept with probability `1/k`. Kept events
//! mark each covered lineage with probability `u`; marked lineages are
//! replaced by one (neutral) or two (selective) new lineages placed
//! uniformly in the event ball.

mod index;

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};
use crate::event_stream::{EventKind, EventModel, ReproductionEvent};
use crate::geometry::{sample_in_ball, Point, TorusDomain};
use crate::scaling::{rescaled_plan, RescaledPlan};

use index::SpatialIndex;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub branches: u64,
    pub coalescences: u64,
    /// Accepted events with at least one mark.
    pub marked_events: u64,
    pub branch_times: Vec<f64>,
    pub coalescence_times: Vec<f64>,
}

/// Unwrapped path of the lineage in slot 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tracker {
    pub displacement: Point,
    pub jumps: Vec<Point>,
    pub record_jumps: bool,
}

/// Outcome of applying one covering event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualUpdate {
    pub covered: usize,
    pub marked: usize,
    pub slot0_moved: bool,
}

#[derive(Debug, Clone)]
pub struct DualState {
    domain: TorusDomain,
    particles: Vec<Point>,
    time: f64,
    pub log: EventLog,
    tracker: Option<Tracker>,
    index: SpatialIndex,
    scratch: Vec<usize>,
}

impl DualState {
    /// Lineages at `positions` (wrapped onto the torus) at time 0.
    pub fn new(domain: TorusDomain, positions: &[Point]) -> Result<Self> {
        if positions.is_empty() {
            return Err(input_err("the dual needs at least one lineage"));
        }
        let particles = positions.iter().map(|p| domain.wrap(p)).collect();
        Ok(Self {
            domain,
            particles,
            time: 0.0,
            log: EventLog::default(),
            tracker: None,
            index: SpatialIndex::new(&domain, 2.0),
            scratch: Vec::new(),
        })
    }

    /// Sizes the coverage buckets for events up to `radius`.
    pub fn with_bucket_radius(mut self, radius: f64) -> Self {
        self.index = SpatialIndex::new(&self.domain, radius.max(1e-9));
        self
    }

    /// Follows the unwrapped displacement of slot 0.
    pub fn with_tracker(mut self, record_jumps: bool) -> Self {
        self.tracker = Some(Tracker {
            record_jumps,
            ..Tracker::default()
        });
        self
    }

    pub fn domain(&self) -> &TorusDomain {
        &self.domain
    }

    pub fn particles(&self) -> &[Point] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn tracker(&self) -> Option<&Tracker> {
        self.tracker.as_ref()
    }

    /// Indices of lineages in the closed ball `B(x, r)`.
    pub fn covered_by(&mut self, x: &Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.index.covered(&self.particles, &self.domain, x, r, &mut out);
        out
    }

    fn covered_into_scratch(&mut self, x: &Point, r: f64) {
        let mut out = std::mem::take(&mut self.scratch);
        self.index.covered(&self.particles, &self.domain, x, r, &mut out);
        self.scratch = out;
    }

    /// Keeps only slot 0; the remaining lineages are forgotten.
    pub fn keep_first_only(&mut self) {
        if self.particles.len() > 1 {
            self.particles.truncate(1);
            self.index.invalidate();
        }
    }

    pub fn summary(&self, with_positions: bool) -> DualSummary {
        DualSummary {
            t: self.time,
            n: self.particles.len(),
            positions: with_positions.then(|| {
                self.particles
                    .iter()
                    .map(|p| p.coords(self.domain.dim()).to_vec())
                    .collect()
            }),
            branches: self.log.branches,
            coalescences: self.log.coalescences,
        }
    }
}

/// Waits for the next event covering at least one lineage. Returns the
/// waiting time, the event and the number of proposals it took.
pub fn propose_covering_event<R: Rng + ?Sized>(
    dual: &mut DualState,
    model: &EventModel,
    rng: &mut R,
) -> (f64, ReproductionEvent, u64) {
    let n = dual.particles.len();
    let rate = n as f64 * model.covering_rate();
    let clock = Exp::new(rate).expect("positive covering rate");
    let d = dual.domain.dim();
    let mut wait = 0.0;
    let mut proposals = 0;
    loop {
        wait += clock.sample(rng);
        proposals += 1;
        let i = rng.random_range(0..n);
        let r = model.sample_covering_radius(rng);
        let center = dual
            .domain
            .wrap(&sample_in_ball(d, &dual.particles[i], r, rng));
        let kind = model.sample_kind(rng);
        dual.covered_into_scratch(&center, r);
        let k = dual.scratch.len().max(1);
        if k == 1 || rng.random_range(0..k) == 0 {
            let event = ReproductionEvent {
                time: dual.time + wait,
                center,
                radius: r,
                impact: model.impact,
                kind,
            };
            return (wait, event, proposals);
        }
    }
}

/// Marks and replaces covered lineages according to `e`.
pub fn apply_dual_event<R: Rng + ?Sized>(dual: &mut DualState, e: &ReproductionEvent, rng: &mut R) -> DualUpdate {
    dual.covered_into_scratch(&e.center, e.radius);
    let covered = std::mem::take(&mut dual.scratch);
    let update = apply_to_covered(dual, e, &covered, rng);
    dual.scratch = covered;
    dual.time = dual.time.max(e.time);
    update
}

fn apply_to_covered<R: Rng + ?Sized>(
    dual: &mut DualState,
    e: &ReproductionEvent,
    covered: &[usize],
    rng: &mut R,
) -> DualUpdate {
    let marked: Vec<usize> = covered.iter().copied().filter(|_| rng.random_bool(e.impact)).collect();
    let mut update = DualUpdate {
        covered: covered.len(),
        marked: marked.len(),
        slot0_moved: false,
    };
    if marked.is_empty() {
        return update;
    }
    let d = dual.domain.dim();
    let first = dual.domain.wrap(&sample_in_ball(d, &e.center, e.radius, rng));
    let slot = marked[0];
    if slot == 0 {
        update.slot0_moved = true;
        if let Some(tr) = dual.tracker.as_mut() {
            let jump = dual.domain.displacement(&dual.particles[0], &first);
            tr.displacement = tr.displacement.add(&jump);
            if tr.record_jumps {
                tr.jumps.push(jump);
            }
        }
    }
    dual.particles[slot] = first;
    for &j in marked[1..].iter().rev() {
        dual.particles.swap_remove(j);
    }
    if e.kind == EventKind::Selective {
        let second = dual.domain.wrap(&sample_in_ball(d, &e.center, e.radius, rng));
        dual.particles.push(second);
        dual.log.branches += 1;
        dual.log.branch_times.push(e.time);
    }
    if marked.len() > 1 {
        dual.log.coalescences += marked.len() as u64 - 1;
        dual.log.coalescence_times.push(e.time);
    }
    dual.log.marked_events += 1;
    dual.index.invalidate();
    update
}

/// One line of a dual trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSummary {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub positions: Option<Vec<Vec<f64>>>,
    pub branches: u64,
    pub coalescences: u64,
}

pub fn write_jsonl<W: Write>(out: &mut W, records: &[DualSummary]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn check_times(start: f64, horizon: f64, sample_times: &[f64]) -> Result<()> {
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(input_err("sample times must be non-decreasing"));
    }
    if sample_times.iter().any(|&t| t < start || t > horizon) {
        return Err(input_err("sample times must lie between the current time and the horizon"));
    }
    Ok(())
}

fn check_model(dual: &DualState, model: &EventModel) -> Result<()> {
    model.validate()?;
    model.check_domain(&dual.domain)?;
    if model.covering_rate() <= 0.0 {
        return Err(config_err("covering rate must be positive"));
    }
    Ok(())
}

/// Runs the dual to `horizon`, recording a summary at each sample time.
pub fn run_dual<R: Rng + ?Sized>(
    dual: &mut DualState,
    model: &EventModel,
    horizon: f64,
    sample_times: &[f64],
    with_positions: bool,
    rng: &mut R,
) -> Result<Vec<DualSummary>> {
    check_model(dual, model)?;
    check_times(dual.time, horizon, sample_times)?;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    loop {
        let (wait, event, _) = propose_covering_event(dual, model, rng);
        let t = dual.time + wait;
        while next < sample_times.len() && sample_times[next] < t {
            let mut s = dual.summary(with_positions);
            s.t = sample_times[next];
            out.push(s);
            next += 1;
        }
        if t > horizon {
            dual.time = horizon;
            break;
        }
        apply_dual_event(dual, &event, rng);
    }
    for &ts in &sample_times[next..] {
        let mut s = dual.summary(with_positions);
        s.t = ts;
        out.push(s);
    }
    Ok(out)
}

/// Path of a single ancestral lineage: at a selective event only the first
/// of the two potential ancestors is followed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LineagePath {
    /// Unwrapped displacement at each sample time.
    pub displacements: Vec<Point>,
    /// Every jump, if requested.
    pub jumps: Vec<Point>,
    pub branch_times: Vec<f64>,
    /// Time the run stopped (horizon, or first branch when asked to stop).
    pub end_time: f64,
}

/// Follows one lineage started at `start` up to `horizon`. With
/// `stop_at_branch` the run ends at the first selective event that marks it.
pub fn run_lineage<R: Rng + ?Sized>(
    model: &EventModel,
    domain: &TorusDomain,
    start: &Point,
    horizon: f64,
    sample_times: &[f64],
    record_jumps: bool,
    stop_at_branch: bool,
    rng: &mut R,
) -> Result<LineagePath> {
    let mut dual = DualState::new(*domain, &[*start])?.with_tracker(record_jumps);
    check_model(&dual, model)?;
    check_times(0.0, horizon, sample_times)?;
    let mut path = LineagePath::default();
    let mut next = 0;
    loop {
        let (wait, event, _) = propose_covering_event(&mut dual, model, rng);
        let t = dual.time + wait;
        let displacement = dual.tracker().map(|tr| tr.displacement).unwrap_or_default();
        while next < sample_times.len() && sample_times[next] < t {
            path.displacements.push(displacement);
            next += 1;
        }
        if t > horizon {
            path.end_time = horizon;
            break;
        }
        let update = apply_dual_event(&mut dual, &event, rng);
        dual.keep_first_only();
        if stop_at_branch && update.marked > 0 && event.kind == EventKind::Selective {
            path.end_time = t;
            break;
        }
    }
    let displacement = dual.tracker().map(|tr| tr.displacement).unwrap_or_default();
    path.displacements.resize(sample_times.len(), displacement);
    path.branch_times = dual.log.branch_times.clone();
    if let Some(tr) = dual.tracker.take() {
        path.jumps = tr.jumps;
    }
    Ok(path)
}

/// Simulation plan for `Ξ^n_t = n^{-β} Ξ_{nt}`.
pub fn rescaled_dual_config(base: &EventModel, n: u64, rescaled_side: f64) -> Result<RescaledPlan> {
    rescaled_plan(base, n, rescaled_side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ball_volume;
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;

    fn line(side: f64) -> TorusDomain {
        TorusDomain::new(1, side).unwrap()
    }

    fn ev(x: f64, r: f64, u: f64, kind: EventKind) -> ReproductionEvent {
        ReproductionEvent {
            time: 1.0,
            center: Point::on_line(x),
            radius: r,
            impact: u,
            kind,
        }
    }

    #[test]
    fn covering_rates() {
        let m = EventModel::fixed(2, 1.5, 0.3, 0.2).unwrap();
        assert_relative_eq!(m.covering_rate(), ball_volume(2, 1.5).unwrap() * 1.2, epsilon = 1e-12);
        let m = EventModel::stable(1, 1.5, None, 0.3, 0.0).unwrap();
        assert_relative_eq!(m.covering_rate(), 2.0 / 1.5, epsilon = 1e-12);
    }

    #[test]
    fn single_particle_always_accepted_and_pairs_halved() {
        let mut rng = stream_rng(1, 0);
        let model = EventModel::fixed(1, 1.0, 0.5, 0.0).unwrap();
        let mut one = DualState::new(line(10.0), &[Point::on_line(3.0)]).unwrap();
        for _ in 0..1000 {
            let (_, _, props) = propose_covering_event(&mut one, &model, &mut rng);
            assert_eq!(props, 1);
        }
        let mut two = DualState::new(line(10.0), &[Point::on_line(3.0), Point::on_line(3.0)]).unwrap();
        let total: u64 = (0..20_000).map(|_| propose_covering_event(&mut two, &model, &mut rng).2).sum();
        let mean = total as f64 / 20_000.0;
        // geometric with success 1/2 has mean 2 and sd sqrt(2)
        assert!((mean - 2.0).abs() < 4.0 * (2.0f64 / 20_000.0).sqrt(), "{mean}");
    }

    #[test]
    fn dual_event_cases() {
        let mut rng = stream_rng(2, 0);
        // u = 1 forces every covered lineage to be marked
        let mut s = DualState::new(line(10.0), &[Point::on_line(5.0)]).unwrap();
        let up = apply_dual_event(&mut s, &ev(5.2, 1.0, 1.0, EventKind::Neutral), &mut rng);
        assert_eq!((up.marked, s.len()), (1, 1));
        assert!((s.particles()[0].0[0] - 5.2).abs() <= 1.0);

        let mut s = DualState::new(line(10.0), &[Point::on_line(5.0)]).unwrap();
        apply_dual_event(&mut s, &ev(5.2, 1.0, 1.0, EventKind::Selective), &mut rng);
        assert_eq!(s.len(), 2);
        assert_eq!(s.log.branches, 1);

        let mut s = DualState::new(line(10.0), &[Point::on_line(5.0), Point::on_line(5.5), Point::on_line(8.0)]).unwrap();
        apply_dual_event(&mut s, &ev(5.2, 1.0, 1.0, EventKind::Neutral), &mut rng);
        assert_eq!(s.len(), 2);
        assert_eq!(s.log.coalescences, 1);
        assert_eq!(s.particles()[1].0[0], 8.0);

        // tiny impact: no marks, nothing moves
        let mut s = DualState::new(line(10.0), &[Point::on_line(5.0)]).unwrap();
        let up = apply_dual_event(&mut s, &ev(5.2, 1.0, 1e-300, EventKind::Selective), &mut rng);
        assert_eq!(up.marked, 0);
        assert_eq!(s.particles()[0].0[0], 5.0);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn neutral_single_lineage_never_branches() {
        let mut rng = stream_rng(3, 0);
        let model = EventModel::fixed(1, 1.0, 0.5, 0.0).unwrap();
        let mut s = DualState::new(line(10.0), &[Point::on_line(1.0)]).unwrap();
        let rec = run_dual(&mut s, &model, 50.0, &[10.0, 50.0], false, &mut rng).unwrap();
        assert!(rec.iter().all(|r| r.n == 1));
        assert_eq!(rec.len(), 2);
    }

    #[test]
    fn separated_particles_see_full_covering_rate() {
        // two lineages 4R apart on a big torus, u = 1 so every event moves one
        let model = EventModel::fixed(1, 1.0, 1.0, 0.25).unwrap();
        let dom = line(1000.0);
        let mut rng = stream_rng(4, 0);
        let mut s = DualState::new(dom, &[Point::on_line(100.0), Point::on_line(104.0)]).unwrap();
        let horizon = 2000.0;
        let mut events = 0u64;
        loop {
            let (wait, e, _) = propose_covering_event(&mut s, &model, &mut rng);
            if s.time() + wait > horizon {
                break;
            }
            // events are counted but not applied, so the pair stays apart
            s.time += wait;
            assert!(s.covered_by(&e.center, e.radius).len() == 1);
            events += 1;
        }
        let per_particle = events as f64 / (2.0 * horizon);
        let expect = model.covering_rate();
        let se = (expect / (2.0 * horizon)).sqrt();
        assert!((per_particle - expect).abs() < 4.0 * se, "{per_particle} vs {expect}");
    }

    #[test]
    fn spatial_index_matches_linear_scan() {
        let mut rng = stream_rng(5, 0);
        let dom = TorusDomain::new(2, 20.0).unwrap();
        let pts: Vec<Point> = (0..500).map(|_| dom.sample_uniform(&mut rng)).collect();
        let mut s = DualState::new(dom, &pts).unwrap().with_bucket_radius(2.0);
        for _ in 0..200 {
            let x = dom.sample_uniform(&mut rng);
            let r = 0.2 + 2.5 * rng.random::<f64>();
            let fast = s.covered_by(&x, r);
            let slow: Vec<usize> = (0..pts.len())
                .filter(|&j| dom.distance(&pts[j], &x).unwrap() <= r)
                .collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn lineage_jump_variance() {
        // per-jump displacement is a sum of two uniforms on [-R, R]: variance 2R^2/3
        let model = EventModel::fixed(1, 1.0, 1.0, 0.0).unwrap();
        let dom = line(100.0);
        let mut rng = stream_rng(6, 0);
        let p = run_lineage(&model, &dom, &Point::on_line(50.0), 20_000.0, &[], true, false, &mut rng).unwrap();
        let n = p.jumps.len() as f64;
        let mean = p.jumps.iter().map(|j| j.0[0]).sum::<f64>() / n;
        let var = p.jumps.iter().map(|j| (j.0[0] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 2.0 / 3.0).abs() < 0.05 * 2.0 / 3.0, "{var}");
        let total: f64 = p.jumps.iter().map(|j| j.0[0]).sum();
        assert_relative_eq!(total, p.displacements.last().map_or(total, |d| d.0[0]), epsilon = 1e-9);
    }

    #[test]
    fn jsonl_shape() {
        let s = DualState::new(line(10.0), &[Point::on_line(1.5)]).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[s.summary(true)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.trim(), r#"{"t":0.0,"N":1,"positions":[[1.5]],"branches":0,"coalescences":0}"#);
    }
}
