//! 1D heat equation on a truncated half-line: the scalar model of the wall
//! layer.
//!
//! The model problem is `du/dt = nu * d2u/dy2` on `y in (0, L)` with one of
//! three wall conditions at `y = 0`:
//!
//! - no-slip: `u(0) = 0`,
//! - stress-free: `du/dy(0) = 0`,
//! - diffusion-free: `d2u/dy2(0) = 0`.
//!
//! For initial data `u0(y) = e^{-y}` the boundary-free ("outer") evolution is
//! `e^{nu t - y}`; the corrector `u - outer` concentrates near the wall with
//! amplitude O(1), O(sqrt(nu)), or O(nu) depending on the wall condition.
//! [`corrector_amplitude`] and [`scaling_exponent`] measure exactly that.
//!
//! Discretization: Crank-Nicolson in time, second-order central differences in
//! space, wall condition enforced through a ghost point eliminated into the
//! wall row of the tridiagonal system (no post-projection). The far boundary
//! at `y = L` holds the corrector at zero by pinning `u(L, t) =
//! u0(L) * e^{nu t}`, which is the outer evolution for the exponential data
//! family and is below the passivity threshold for any admissible data.

use crate::bc::BoundaryCondition;
use crate::diagnostics::ScalingFit;
use crate::error::{Result, SolverError};
use crate::numerics::{least_squares_line, TridiagFactor};

/// Scalar field on a uniform grid over `[0, L]`, wall at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    values: Vec<f64>,
    dy: f64,
    length: f64,
}

impl Field1D {
    /// Wraps `values` as samples on the uniform grid over `[0, length]`.
    pub fn new(values: Vec<f64>, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if values.len() < 2 {
            return Err(SolverError::InvalidConfig(format!(
                "grid needs at least 2 points, got {}",
                values.len()
            )));
        }
        let dy = length / (values.len() - 1) as f64;
        Ok(Field1D { values, dy, length })
    }

    /// Samples `f` on `ny` points over `[0, length]`.
    pub fn from_fn(length: f64, ny: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if ny < 2 {
            return Err(SolverError::InvalidConfig(format!(
                "grid needs at least 2 points, got {ny}"
            )));
        }
        let dy = length / (ny - 1) as f64;
        let values = (0..ny).map(|j| f(j as f64 * dy)).collect();
        Field1D::new(values, length)
    }

    /// Grid values, wall first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid spacing.
    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// Domain length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Coordinate of grid point `j`.
    pub fn coord(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    /// True when `other` lives on the same grid.
    pub fn same_grid(&self, other: &Field1D) -> bool {
        self.values.len() == other.values.len()
            && (self.length - other.length).abs() < 1e-12 * self.length.max(1.0)
    }

    /// Largest absolute value (fixed-order reduction).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Initial data `u0(y) = e^{-y}` on `ny` points over `[0, length]`.
pub fn decaying_exponential(length: f64, ny: usize) -> Result<Field1D> {
    Field1D::from_fn(length, ny, |y| (-y).exp())
}

/// Configuration for [`solve_heat1d`].
#[derive(Debug, Clone)]
pub struct Heat1DConfig {
    /// Viscosity (diffusivity), strictly positive.
    pub nu: f64,
    /// Nominal time step; adjusted to the nearest value dividing `t_end`
    /// evenly so the final time is hit exactly.
    pub dt: f64,
    /// Domain truncation length.
    pub length: f64,
    /// Grid point count including both ends.
    pub ny: usize,
    /// Wall condition at `y = 0`.
    pub bc: BoundaryCondition,
    /// Final time.
    pub t_end: f64,
}

impl Heat1DConfig {
    fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "viscosity must be positive, got {}",
                self.nu
            )));
        }
        if !(self.dt > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "final time must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.ny < 4 {
            return Err(SolverError::InvalidConfig(format!(
                "grid needs at least 4 points, got {}",
                self.ny
            )));
        }
        if !(self.length > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "domain length must be positive, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

/// Threshold for the far-boundary passivity check: the data and its first two
/// one-sided difference quotients at `y = L` must stay below this times
/// `max(1, |u0|_inf)`.
const PASSIVITY_TOL: f64 = 1e-12;

fn check_passivity(u0: &Field1D) -> Result<()> {
    let v = u0.values();
    let n = v.len();
    let dy = u0.dy();
    let scale = u0.max_abs().max(1.0);
    let tail = v[n - 1].abs();
    let d1 = ((v[n - 1] - v[n - 2]) / dy).abs();
    let d2 = ((v[n - 1] - 2.0 * v[n - 2] + v[n - 3]) / (dy * dy)).abs();
    let worst = tail.max(d1).max(d2);
    if worst > PASSIVITY_TOL * scale {
        return Err(SolverError::InvalidConfig(format!(
            "far boundary is not passive: |u0| and difference quotients reach {worst:.3e} \
             at y = L (limit {:.1e}); enlarge the domain",
            PASSIVITY_TOL * scale
        )));
    }
    Ok(())
}

/// Advances `u0` to `cfg.t_end` by Crank-Nicolson with the wall condition of
/// `cfg.bc` built into the tridiagonal system.
///
/// The far boundary holds `u(L, t) = u0(L) * e^{nu t}` (zero corrector at the
/// truncation edge). Rejects non-finite data and configurations whose far
/// boundary is not passive.
pub fn solve_heat1d(u0: &Field1D, cfg: &Heat1DConfig) -> Result<Field1D> {
    cfg.validate()?;
    if u0.values().len() != cfg.ny {
        return Err(SolverError::GridMismatch(format!(
            "initial data has {} points, config expects {}",
            u0.values().len(),
            cfg.ny
        )));
    }
    if (u0.length() - cfg.length).abs() > 1e-12 * cfg.length {
        return Err(SolverError::GridMismatch(format!(
            "initial data length {} differs from config length {}",
            u0.length(),
            cfg.length
        )));
    }
    if u0.values().iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteInput("initial data".into()));
    }
    check_passivity(u0)?;

    if cfg.t_end == 0.0 {
        return Ok(u0.clone());
    }
    let nsteps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let dt = cfg.t_end / nsteps as f64;
    let n = cfg.ny;
    let dy = u0.dy();
    let a = 0.5 * cfg.nu * dt / (dy * dy);
    let far_value0 = u0.values()[n - 1];

    // Assemble I - a*dy^2*Dyy with BC rows; fixed over the whole run.
    let mut sub = vec![-a; n - 1];
    let mut diag = vec![1.0 + 2.0 * a; n];
    let mut sup = vec![-a; n - 1];
    match cfg.bc {
        BoundaryCondition::NoSlip => {
            diag[0] = 1.0;
            sup[0] = 0.0;
        }
        BoundaryCondition::StressFree => {
            // ghost u[-1] = u[1]: wall Laplacian (2u1 - 2u0)/dy^2
            diag[0] = 1.0 + 2.0 * a;
            sup[0] = -2.0 * a;
        }
        BoundaryCondition::DiffusionFree => {
            // ghost u[-1] = 2u0 - u1: wall Laplacian vanishes identically
            diag[0] = 1.0;
            sup[0] = 0.0;
        }
    }
    // far Dirichlet row
    diag[n - 1] = 1.0;
    sub[n - 2] = 0.0;
    let factor = TridiagFactor::new(&sub, &diag, &sup);

    let mut u = u0.values().to_vec();
    let mut rhs = vec![0.0_f64; n];
    for step in 0..nsteps {
        let t_new = (step + 1) as f64 * dt;
        for j in 1..n - 1 {
            rhs[j] = u[j] + a * (u[j + 1] - 2.0 * u[j] + u[j - 1]);
        }
        rhs[0] = match cfg.bc {
            BoundaryCondition::NoSlip => 0.0,
            BoundaryCondition::StressFree => u[0] + a * (2.0 * u[1] - 2.0 * u[0]),
            BoundaryCondition::DiffusionFree => u[0],
        };
        rhs[n - 1] = far_value0 * (cfg.nu * t_new).exp();
        u.copy_from_slice(&rhs);
        factor.solve_in_place(&mut u);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteState { step, t: t_new });
        }
    }
    Field1D::new(u, cfg.length)
}

/// Boundary-free reference evolution `e^{nu t - y}` of the exponential data
/// family, sampled on the grid of `shape`.
pub fn outer_reference(t: f64, nu: f64, shape: &Field1D) -> Field1D {
    let amp = (nu * t).exp();
    let values = (0..shape.values().len())
        .map(|j| amp * (-shape.coord(j)).exp())
        .collect();
    Field1D {
        values,
        dy: shape.dy(),
        length: shape.length(),
    }
}

/// Sup-norm of the corrector `u - reference` over the grid.
pub fn corrector_amplitude(u: &Field1D, reference: &Field1D) -> Result<f64> {
    if !u.same_grid(reference) {
        return Err(SolverError::GridMismatch(
            "corrector operands live on different grids".into(),
        ));
    }
    let amp = u
        .values()
        .iter()
        .zip(reference.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(amp)
}

/// Log-log least-squares fit of amplitude versus viscosity.
///
/// Requires at least three samples with strictly positive viscosities and
/// amplitudes. The returned fit exposes the slope (scaling exponent), the
/// intercept, and the largest relative deviation of any sample from the
/// fitted power law.
pub fn scaling_exponent(samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(SolverError::TooFewSamples {
            required: 3,
            got: samples.len(),
        });
    }
    for &(nu, amp) in samples {
        if !(nu > 0.0 && amp > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "scaling fit needs positive samples, got (nu={nu}, amplitude={amp})"
            )));
        }
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, intercept) = least_squares_line(&xs, &ys);
    let max_rel_residual = samples.iter().fold(0.0_f64, |m, &(nu, amp)| {
        let predicted = (intercept + slope * nu.ln()).exp();
        m.max((amp - predicted).abs() / amp)
    });
    Ok(ScalingFit {
        slope,
        intercept,
        max_rel_residual,
    })
}
