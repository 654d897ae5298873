//! Orthonormal type-I discrete sine transform, the eigenbasis change of the
//! Dirichlet finite-difference Laplacian.
//!
//! For `m` points and `N = m + 1` the transform matrix is
//! `S[k][j] = sqrt(2/N) sin(pi j k / N)`, which is symmetric and its own
//! inverse. It is evaluated through a length-`2N` FFT of the odd extension.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct SineTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Clone for SineTransform {
    fn clone(&self) -> Self {
        Self { m: self.m, fft: Arc::clone(&self.fft), buf: Vec::new(), scratch: Vec::new() }
    }
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("m", &self.m).finish()
    }
}

impl SineTransform {
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        Self { m, fft, buf: Vec::new(), scratch: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Transforms every axis of a row-major `m^d` array in place.
    pub fn transform_axes(&mut self, data: &mut [Complex64], d: usize) {
        let m = self.m;
        debug_assert_eq!(data.len(), m.pow(d as u32));
        for axis in 0..d {
            let stride = m.pow((d - 1 - axis) as u32);
            self.transform_lines(data, stride);
        }
    }

    /// Transforms a single vector of length `m` in place.
    pub fn transform(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.m);
        self.transform_lines(data, 1);
    }

    // Transforms all lines with element stride `stride` (length m each).
    fn transform_lines(&mut self, data: &mut [Complex64], stride: usize) {
        let m = self.m;
        let n2 = 2 * (m + 1);
        let lines = data.len() / m;
        let block = m * stride;
        self.buf.clear();
        self.buf.resize(lines * n2, Complex64::new(0.0, 0.0));
        let mut line = 0;
        for outer in data.chunks(block) {
            for inner in 0..stride {
                let ext = &mut self.buf[line * n2..(line + 1) * n2];
                for j in 0..m {
                    let x = outer[inner + j * stride];
                    ext[j + 1] = x;
                    ext[n2 - 1 - j] = -x;
                }
                line += 1;
            }
        }
        let need = self.fft.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch[..need]);
        // S x = sqrt(2/N) * (i/2) * FFT(odd extension)[1..=m]
        let norm = Complex64::new(0.0, 0.5 * (2.0 / (m + 1) as f64).sqrt());
        let mut line = 0;
        for outer in data.chunks_mut(block) {
            for inner in 0..stride {
                let ext = &self.buf[line * n2..(line + 1) * n2];
                for k in 0..m {
                    outer[inner + k * stride] = ext[k + 1] * norm;
                }
                line += 1;
            }
        }
    }
}
