//! FFT plumbing along the two phase-space axes.
//!
//! Along `p` the transform to the correlation representation uses the kernel
//! `e^{+iξp/ħ}`, so FFT bin `k` carries `ξ = k_signed·Δξ` and a multiplier `M(ξ)` applied there
//! acts on `w` as the momentum convolution with `(1/2πħ)∫M(ξ)e^{−iξp/ħ}dξ`.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct AxisFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl AxisFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Unnormalised `e^{−2πijk/n}` transform of every length-`n` chunk of `buf`.
    pub fn forward(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.n, 0);
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Unnormalised `e^{+2πijk/n}` transform of every length-`n` chunk of `buf`.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.n, 0);
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }
}

/// Row/column transforms for an `n_x × n_p` array stored row-major (p contiguous).
pub struct PhaseFft {
    n_x: usize,
    n_p: usize,
    along_p: AxisFft,
    along_x: AxisFft,
    buf: Vec<Complex64>,
}

impl PhaseFft {
    pub fn new(n_x: usize, n_p: usize) -> Self {
        Self {
            n_x,
            n_p,
            along_p: AxisFft::new(n_p),
            along_x: AxisFft::new(n_x),
            buf: vec![Complex64::new(0.0, 0.0); n_x * n_p],
        }
    }

    /// Multiplies `w` in the (x, ξ) representation by `multiplier[[i, k]]` (k in FFT bin order).
    pub fn apply_xi_multiplier(&mut self, w: &mut Array2<f64>, multiplier: &Array2<Complex64>) {
        self.load(w);
        self.along_p.inverse(&mut self.buf);
        for (z, m) in self.buf.iter_mut().zip(multiplier.iter()) {
            *z *= *m;
        }
        self.along_p.forward(&mut self.buf);
        self.store(w, 1.0 / self.n_p as f64);
    }

    /// Same as [`Self::apply_xi_multiplier`] with one multiplier shared by every `x` row.
    pub fn apply_xi_profile(&mut self, w: &mut Array2<f64>, profile: &[Complex64]) {
        assert_eq!(profile.len(), self.n_p);
        self.load(w);
        self.along_p.inverse(&mut self.buf);
        for row in self.buf.chunks_mut(self.n_p) {
            for (z, m) in row.iter_mut().zip(profile) {
                *z *= *m;
            }
        }
        self.along_p.forward(&mut self.buf);
        self.store(w, 1.0 / self.n_p as f64);
    }

    /// Multiplies `w` in the (k_x, p) representation by `multiplier[[j, k]]`, indexed by
    /// momentum node `j` and FFT bin `k` along x.
    pub fn apply_kx_multiplier(&mut self, w: &mut Array2<f64>, multiplier: &Array2<Complex64>) {
        let (n_x, n_p) = (self.n_x, self.n_p);
        for ((i, j), v) in w.indexed_iter() {
            self.buf[j * n_x + i] = Complex64::new(*v, 0.0);
        }
        self.along_x.forward(&mut self.buf);
        for (z, m) in self.buf.iter_mut().zip(multiplier.iter()) {
            *z *= *m;
        }
        self.along_x.inverse(&mut self.buf);
        let scale = 1.0 / n_x as f64;
        for ((i, j), v) in w.indexed_iter_mut() {
            *v = self.buf[j * n_x + i].re * scale;
        }
        debug_assert_eq!(self.buf.len(), n_x * n_p);
    }

    fn load(&mut self, w: &Array2<f64>) {
        for (z, v) in self.buf.iter_mut().zip(w.iter()) {
            *z = Complex64::new(*v, 0.0);
        }
    }

    fn store(&self, w: &mut Array2<f64>, scale: f64) {
        for (v, z) in w.iter_mut().zip(self.buf.iter()) {
            *v = z.re * scale;
        }
    }

    /// Transform of a single momentum profile to the ξ representation (bin order).
    pub fn row_to_xi(&mut self, row: &[f64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.along_p.inverse(&mut out);
        out
    }
}
