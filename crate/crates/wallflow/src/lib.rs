//! Numerical laboratory for wall boundary conditions in incompressible 2D flow.
//!
//! The crate compares three wall conditions for viscous incompressible flow in
//! the vorticity formulation:
//!
//! - **no-slip**: velocity vanishes at the wall,
//! - **stress-free**: tangential stress vanishes (zero wall vorticity on flat
//!   or circular walls as implemented here),
//! - **diffusion-free**: the viscous term is tangent to the wall, equivalent in
//!   2D to a homogeneous Neumann condition on the vorticity.
//!
//! Solvers:
//!
//! - [`heat1d`]: 1D heat equation on a truncated half-line, the scalar model of
//!   the wall layer. Measures how far each wall condition pushes the solution
//!   away from the boundary-free evolution.
//! - [`channel2d`]: vorticity/streamfunction Navier-Stokes in a periodic
//!   channel, Fourier in x and second-order finite differences in y, with
//!   Crank-Nicolson diffusion and Adams-Bashforth advection. Includes the
//!   Euler (zero-viscosity) reference path and the mean-flow degree of freedom.
//! - [`annulus2d`]: the same dynamics on an annulus in polar coordinates, with
//!   the circulation-constrained velocity reconstruction.
//! - [`blprofile`]: the advection-diffusion equation satisfied by the
//!   leading-order wall-layer vorticity profile, driven by Neumann flux data.
//! - [`diagnostics`]: conserved-quantity ledgers (enstrophy, energy, mean
//!   vorticity, p-norms, circulations) and balance-residual reports shared by
//!   the solvers.
//!
//! Design rules common to all solvers: diffusion is implicit (Crank-Nicolson),
//! advection explicit; boundary conditions are rows of the implicit system,
//! never post-hoc projections; all reductions are fixed-order so results are
//! reproducible bit-for-bit.

// Validation guards are written `!(x > 0.0)` instead of `x <= 0.0` so that
// NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annulus2d;
pub mod bc;
pub mod blprofile;
pub mod channel2d;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod heat1d;
pub mod numerics;

pub use bc::BoundaryCondition;
pub use error::SolverError;
