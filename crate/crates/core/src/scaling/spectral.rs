//! Real fields on periodic `n^d` grids through `rustfft`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed wave number of FFT index `i` on an `n`-point grid.
pub(crate) fn signed_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Forward and inverse transforms along every axis of a `n^d` grid stored
/// with the first coordinate varying fastest.
pub(crate) struct GridFft {
    d: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl GridFft {
    pub(crate) fn new(d: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            d,
            n,
            forward,
            inverse,
            line: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let total = n.pow(self.d as u32);
        debug_assert_eq!(data.len(), total);
        let plan = if inverse { &self.inverse } else { &self.forward };
        let mut stride = 1;
        for _ in 0..self.d {
            // every line along this axis: indices base + j * stride
            for base in 0..total {
                if (base / stride) % n != 0 {
                    continue;
                }
                for j in 0..n {
                    self.line[j] = data[base + j * stride];
                }
                plan.process_with_scratch(&mut self.line, &mut self.scratch);
                for j in 0..n {
                    data[base + j * stride] = self.line[j];
                }
            }
            stride *= n;
        }
        if inverse {
            let norm = 1.0 / total as f64;
            data.iter_mut().for_each(|c| *c *= norm);
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// `F^{-1}[m · F[f]]` for a real field `f` and real multipliers `m`.
    pub(crate) fn apply_multiplier(&mut self, f: &[f64], multiplier: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        for (c, m) in buf.iter_mut().zip(multiplier) {
            *c *= *m;
        }
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}
