//! Uniform bucket grid for "which particles lie in B(x, r)" queries.

use crate::geometry::{Point, TorusDomain};

/// Below this many particles a linear scan beats maintaining buckets.
const LINEAR_BELOW: usize = 32;

#[derive(Debug, Clone)]
pub(crate) struct SpatialIndex {
    bucket: f64,
    per_side: usize,
    buckets: Vec<Vec<usize>>,
    valid: bool,
}

impl SpatialIndex {
    /// Buckets of width at least `bucket`.
    pub(crate) fn new(domain: &TorusDomain, bucket: f64) -> Self {
        let per_side = (domain.side() / bucket).floor().max(1.0) as usize;
        Self {
            bucket: domain.side() / per_side as f64,
            per_side,
            buckets: Vec::new(),
            valid: false,
        }
    }

    pub(crate) fn invalidate(&mut self) {
        self.valid = false;
    }

    fn bucket_of(&self, p: &Point, d: usize) -> [usize; 3] {
        let mut b = [0; 3];
        for k in 0..d {
            b[k] = ((p.0[k] / self.bucket) as usize).min(self.per_side - 1);
        }
        b
    }

    fn flat(&self, b: &[usize; 3], d: usize) -> usize {
        let mut idx = 0;
        for k in (0..d).rev() {
            idx = idx * self.per_side + b[k];
        }
        idx
    }

    fn rebuild(&mut self, particles: &[Point], d: usize) {
        let total = self.per_side.pow(d as u32);
        self.buckets.iter_mut().for_each(Vec::clear);
        self.buckets.resize_with(total, Vec::new);
        for (i, p) in particles.iter().enumerate() {
            let b = self.bucket_of(p, d);
            let f = self.flat(&b, d);
            self.buckets[f].push(i);
        }
        self.valid = true;
    }

    /// Indices `j` with `|ξ_j - x| <= r` on the torus, in increasing order.
    pub(crate) fn covered(&mut self, particles: &[Point], domain: &TorusDomain, x: &Point, r: f64, out: &mut Vec<usize>) {
        out.clear();
        let d = domain.dim();
        let r2 = r * r;
        if particles.len() < LINEAR_BELOW || r > self.bucket || self.per_side < 3 {
            for (j, p) in particles.iter().enumerate() {
                if domain.distance_sq(p, x) <= r2 {
                    out.push(j);
                }
            }
            return;
        }
        if !self.valid {
            self.rebuild(particles, d);
        }
        let center = self.bucket_of(x, d);
        let n = self.per_side as i64;
        let mut offsets = [[0i64; 3]; 27];
        let mut count = 0;
        let span = |k: usize| if k < d { -1..=1 } else { 0..=0 };
        for c in span(2) {
            for b in span(1) {
                for a in span(0) {
                    offsets[count] = [a, b, c];
                    count += 1;
                }
            }
        }
        for off in &offsets[..count] {
            let mut q = [0usize; 3];
            for k in 0..d {
                q[k] = (center[k] as i64 + off[k]).rem_euclid(n) as usize;
            }
            for &j in &self.buckets[self.flat(&q, d)] {
                if domain.distance_sq(&particles[j], x) <= r2 {
                    out.push(j);
                }
            }
        }
        out.sort_unstable();
    }
}
