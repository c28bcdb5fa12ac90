//! Two-dimensional scalar fields with physical and spectral representations.
//!
//! A [`Field2D`] stores samples on a tensor grid that is periodic in its first
//! index (x in the channel, theta on the annulus) and bounded in its second
//! (y, respectively r). The spectral representation keeps the half-spectrum of
//! the periodic direction, row `m` holding mode `m` as a function of the
//! transverse coordinate.

use crate::error::{Result, SolverError};
use crate::numerics::FourierTransform;
use ndarray::Array2;
use num_complex::Complex64;

/// Representation of the stored samples.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldRepr {
    /// Real samples, shape `(n_periodic, n_transverse)`.
    Physical(Array2<f64>),
    /// Half-spectrum in the periodic direction, shape
    /// `(n_periodic/2 + 1, n_transverse)`, unnormalized coefficients.
    Spectral(Array2<Complex64>),
}

/// Scalar field on a periodic-by-bounded tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    n_periodic: usize,
    n_transverse: usize,
    repr: FieldRepr,
}

impl Field2D {
    /// Wraps physical samples; `values` must have shape
    /// `(n_periodic, n_transverse)` with `n_periodic` even and >= 4.
    pub fn physical(values: Array2<f64>) -> Result<Self> {
        let (nx, ny) = values.dim();
        if nx < 4 || !nx.is_multiple_of(2) {
            return Err(SolverError::InvalidConfig(format!(
                "periodic point count must be even and >= 4, got {nx}"
            )));
        }
        if ny < 2 {
            return Err(SolverError::InvalidConfig(format!(
                "transverse point count must be >= 2, got {ny}"
            )));
        }
        Ok(Field2D {
            n_periodic: nx,
            n_transverse: ny,
            repr: FieldRepr::Physical(values),
        })
    }

    /// Wraps spectral coefficients for `n_periodic` physical points;
    /// `coeffs` must have shape `(n_periodic/2 + 1, n_transverse)`.
    pub fn spectral(n_periodic: usize, coeffs: Array2<Complex64>) -> Result<Self> {
        if n_periodic < 4 || !n_periodic.is_multiple_of(2) {
            return Err(SolverError::InvalidConfig(format!(
                "periodic point count must be even and >= 4, got {n_periodic}"
            )));
        }
        let (nk, ny) = coeffs.dim();
        if nk != n_periodic / 2 + 1 {
            return Err(SolverError::GridMismatch(format!(
                "expected {} spectral rows for {} physical points, got {nk}",
                n_periodic / 2 + 1,
                n_periodic
            )));
        }
        if ny < 2 {
            return Err(SolverError::InvalidConfig(format!(
                "transverse point count must be >= 2, got {ny}"
            )));
        }
        Ok(Field2D {
            n_periodic,
            n_transverse: ny,
            repr: FieldRepr::Spectral(coeffs),
        })
    }

    /// Samples `f(i, j)` over the index grid.
    pub fn from_index_fn(
        n_periodic: usize,
        n_transverse: usize,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Array2::zeros((n_periodic, n_transverse));
        for i in 0..n_periodic {
            for j in 0..n_transverse {
                values[(i, j)] = f(i, j);
            }
        }
        Field2D::physical(values)
    }

    /// Periodic-direction point count.
    pub fn n_periodic(&self) -> usize {
        self.n_periodic
    }

    /// Transverse-direction point count.
    pub fn n_transverse(&self) -> usize {
        self.n_transverse
    }

    /// Borrows the stored representation.
    pub fn repr(&self) -> &FieldRepr {
        &self.repr
    }

    /// Physical samples, transforming if needed.
    pub fn to_physical(&self) -> Array2<f64> {
        match &self.repr {
            FieldRepr::Physical(v) => v.clone(),
            FieldRepr::Spectral(c) => FourierTransform::new(self.n_periodic).inverse_2d(c),
        }
    }

    /// Spectral coefficients, transforming if needed.
    pub fn to_spectral(&self) -> Array2<Complex64> {
        match &self.repr {
            FieldRepr::Physical(v) => FourierTransform::new(self.n_periodic).forward_2d(v),
            FieldRepr::Spectral(c) => c.clone(),
        }
    }

    /// True when all stored samples are finite.
    pub fn is_finite(&self) -> bool {
        match &self.repr {
            FieldRepr::Physical(v) => v.iter().all(|x| x.is_finite()),
            FieldRepr::Spectral(c) => c.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
        }
    }

    /// Largest absolute physical value.
    pub fn max_abs(&self) -> f64 {
        self.to_physical()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_physical_spectral_physical() {
        let nx = 16;
        let ny = 9;
        let field = Field2D::from_index_fn(nx, ny, |i, j| {
            let x = i as f64 / nx as f64;
            (2.0 * std::f64::consts::PI * x).cos() * (1.0 + j as f64)
        })
        .unwrap();
        let spec = Field2D::spectral(nx, field.to_spectral()).unwrap();
        let back = spec.to_physical();
        let orig = field.to_physical();
        let scale = field.max_abs();
        for (a, b) in orig.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn rejects_odd_periodic_count() {
        assert!(Field2D::physical(Array2::zeros((5, 4))).is_err());
        assert!(Field2D::physical(Array2::zeros((2, 4))).is_err());
    }

    #[test]
    fn rejects_wrong_spectral_shape() {
        let coeffs = Array2::from_elem((4, 4), Complex64::new(0.0, 0.0));
        assert!(Field2D::spectral(16, coeffs).is_err());
    }

    #[test]
    fn finiteness_check_sees_nan() {
        let mut values = Array2::zeros((4, 4));
        values[(1, 2)] = f64::NAN;
        let field = Field2D::physical(values).unwrap();
        assert!(!field.is_finite());
    }
}
