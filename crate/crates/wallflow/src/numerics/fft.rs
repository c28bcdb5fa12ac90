//! Real-to-half-complex Fourier transforms along the periodic direction.
//!
//! Conventions match the usual DFT of a real signal: `forward` returns the
//! unnormalized coefficients for modes `m = 0..=nx/2` (the rest follow by
//! conjugate symmetry), and `inverse` divides by `nx` so that
//! `inverse(forward(f)) == f` to round-off.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse transform plans for one signal length.
pub struct FourierTransform {
    nx: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FourierTransform {
    /// Plans transforms of length `nx` (must be even and >= 4: the solvers
    /// rely on a well-defined Nyquist mode).
    pub fn new(nx: usize) -> Self {
        assert!(
            nx >= 4 && nx.is_multiple_of(2),
            "transform length must be even and >= 4"
        );
        let mut planner = FftPlanner::new();
        FourierTransform {
            nx,
            fwd: planner.plan_fft_forward(nx),
            inv: planner.plan_fft_inverse(nx),
        }
    }

    /// Signal length.
    pub fn len(&self) -> usize {
        self.nx
    }

    /// Never true; transforms of length zero cannot be constructed.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of retained modes, `nx/2 + 1`.
    pub fn n_modes(&self) -> usize {
        self.nx / 2 + 1
    }

    /// Unnormalized half-spectrum of a real signal.
    pub fn forward(&self, signal: &[f64]) -> Vec<Complex64> {
        assert_eq!(signal.len(), self.nx);
        let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf.truncate(self.n_modes());
        buf
    }

    /// Real signal from a half-spectrum (conjugate symmetry assumed),
    /// normalized by `1/nx`.
    pub fn inverse(&self, half_spectrum: &[Complex64]) -> Vec<f64> {
        assert_eq!(half_spectrum.len(), self.n_modes());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nx];
        buf[..half_spectrum.len()].copy_from_slice(half_spectrum);
        for m in 1..self.nx / 2 {
            buf[self.nx - m] = half_spectrum[m].conj();
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.nx as f64;
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    /// Column-wise forward transform of a physical field with shape
    /// `(nx, ny)`; returns the half-spectrum field with shape `(n_modes, ny)`.
    pub fn forward_2d(&self, phys: &Array2<f64>) -> Array2<Complex64> {
        assert_eq!(phys.nrows(), self.nx, "physical field row count");
        let ny = phys.ncols();
        let nk = self.n_modes();
        let mut out = Array2::from_elem((nk, ny), Complex64::new(0.0, 0.0));
        let mut signal = vec![0.0_f64; self.nx];
        for j in 0..ny {
            for (i, v) in signal.iter_mut().enumerate() {
                *v = phys[(i, j)];
            }
            let spec = self.forward(&signal);
            for (m, c) in spec.iter().enumerate() {
                out[(m, j)] = *c;
            }
        }
        out
    }

    /// Column-wise inverse of [`FourierTransform::forward_2d`].
    pub fn inverse_2d(&self, spec: &Array2<Complex64>) -> Array2<f64> {
        assert_eq!(spec.nrows(), self.n_modes(), "spectral field row count");
        let ny = spec.ncols();
        let mut out = Array2::zeros((self.nx, ny));
        let mut column = vec![Complex64::new(0.0, 0.0); self.n_modes()];
        for j in 0..ny {
            for (m, c) in column.iter_mut().enumerate() {
                *c = spec[(m, j)];
            }
            let phys = self.inverse(&column);
            for (i, v) in phys.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        out
    }
}
