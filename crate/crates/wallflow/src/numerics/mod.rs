//! Shared numerical kernels: tridiagonal solves, Fourier transforms along the
//! periodic direction, fixed-order quadrature, and least-squares line fits.
//!
//! Everything here is deterministic: no threading, no reduction reordering.

mod fft;
mod fit;
mod quad;
mod tridiag;

pub use fft::FourierTransform;
pub use fit::least_squares_line;
pub use quad::{simpson, trapezoid, trapezoid_weights};
pub use tridiag::{BorderedTridiagFactor, TridiagFactor};
