use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

/// FFT plans and scratch for one grid. Owned by a single run, never shared.
pub(crate) struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
    pub(crate) k: Vec<f64>,
}

impl Spectral {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.len();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Spectral {
            forward,
            inverse,
            scratch: vec![Complex64::default(); len],
            scale: 1.0 / n as f64,
            k: grid.ks(),
        }
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform including the `1/n` normalisation.
    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }

    /// `f(x) -> f(x - shift)`, exact for band-limited periodic data.
    pub(crate) fn translate(&mut self, data: &mut [Complex64], shift: f64) {
        self.forward(data);
        for (z, &k) in data.iter_mut().zip(&self.k) {
            *z *= Complex64::from_polar(1.0, -k * shift);
        }
        self.inverse(data);
    }

    /// Multiplies the spectrum by `exp(-i phase(k))`.
    pub(crate) fn apply_diagonal<F: Fn(f64) -> f64>(&mut self, data: &mut [Complex64], phase: F) {
        self.forward(data);
        for (z, &k) in data.iter_mut().zip(&self.k) {
            *z *= Complex64::from_polar(1.0, -phase(k));
        }
        self.inverse(data);
    }
}

/// Ratio of the largest amplitude in the outermost bins to the overall maximum.
///
/// In position space the outermost bins are the two grid edges; in the FFT
/// ordering they are the bins around the Nyquist index.
pub(crate) fn edge_ratio(data: &[Complex64], spectral_order: bool) -> f64 {
    let n = data.len();
    let max = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let edge = if spectral_order {
        data[n / 2 - 1].norm().max(data[n / 2].norm())
    } else {
        data[0].norm().max(data[n - 1].norm())
    };
    edge / max
}
