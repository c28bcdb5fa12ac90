//! Vorticity/streamfunction Navier-Stokes on an annulus.
//!
//! Domain: `a < r < b`, periodic in the azimuth. Unknowns: vorticity `omega`
//! (Fourier in theta, finite differences in r) and the inner-boundary
//! circulation `gamma`, which the vorticity field does not determine.
//!
//! Velocity reconstruction splits the stream function into a Dirichlet part
//! and a harmonic part: `psi = psi0 + c * PSI1` with `lap(psi0) = omega`,
//! `psi0(a) = psi0(b) = 0`, and `PSI1(r) = log(r/b) / (2 pi)` (harmonic,
//! vanishing on the outer circle, unit circulation: the normalization
//! `contour_integral d(PSI1)/dn = 1` forces the `1/(2 pi)` factor). The
//! harmonic coefficient is chosen every evaluation so the circulation of the
//! total velocity around `r = a` equals `gamma` exactly; `PSI1` is applied
//! analytically (`u_theta += c / (2 pi r)`), so the curl-free component
//! carries no discretization error at all.
//!
//! `gamma` is not evolved: it is a constant of motion of the continuous
//! problem under both wall conditions offered here, and the construction
//! enforces it. A separate diagnostic recomputes both circulations by direct
//! line integral of the reconstructed velocity so the conservation claim is
//! checked rather than assumed.
//!
//! Spatial operators are in flux form: the radial Laplacian balances the face
//! fluxes `r_{j+1/2} (omega_{j+1} - omega_j) / dr`, and the diffusion-free
//! wall rows mirror the wall-adjacent flux. Together with the odd wall
//! extension of the advective flux `r u_r omega`, every row sums to zero
//! against the `r`-weighted trapezoid measure, so the total vorticity
//! integral (and with it the outer circulation) is conserved to round-off.
//! The wall tangential-velocity stencils are the half-cell expressions
//! `u_theta(a) = (r_{1/2}/a) F_{1/2} - (dr/2) omega(a)` (and mirrored at
//! `b`), which are second-order accurate and make the discrete Stokes
//! identity `circ(b) - circ(a) = int int omega` hold exactly.
//!
//! Wall conditions: diffusion-free (`d(omega)/dr = 0` rows) and Lions
//! (`omega = 0` rows; the curved-wall counterpart of stress-free). No-slip is
//! not offered on curved walls.

use crate::bc::BoundaryCondition;
use crate::channel2d::CFL_LIMIT;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Result, SolverError};
use crate::field::Field2D;
use crate::numerics::{trapezoid_weights, FourierTransform, TridiagFactor};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Annulus grid: uniform in both the azimuth and the radius, wall points
/// included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGrid {
    /// Azimuthal point count (even, >= 4).
    pub ntheta: usize,
    /// Radial point count including both walls (>= 8).
    pub nr: usize,
    /// Inner radius.
    pub inner_radius: f64,
    /// Outer radius.
    pub outer_radius: f64,
}

impl AnnulusGrid {
    /// Validated constructor (`0 < inner_radius < outer_radius`).
    pub fn new(ntheta: usize, nr: usize, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if ntheta < 4 || !ntheta.is_multiple_of(2) {
            return Err(SolverError::InvalidConfig(format!(
                "ntheta must be even and >= 4, got {ntheta}"
            )));
        }
        if nr < 8 {
            return Err(SolverError::InvalidConfig(format!(
                "nr must be >= 8, got {nr}"
            )));
        }
        if !(inner_radius > 0.0 && outer_radius > inner_radius) {
            return Err(SolverError::InvalidConfig(format!(
                "radii must satisfy 0 < a < b, got a = {inner_radius}, b = {outer_radius}"
            )));
        }
        Ok(AnnulusGrid {
            ntheta,
            nr,
            inner_radius,
            outer_radius,
        })
    }

    /// Radial spacing.
    pub fn dr(&self) -> f64 {
        (self.outer_radius - self.inner_radius) / (self.nr - 1) as f64
    }

    /// Azimuthal spacing.
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    /// Radius of ring `j`.
    pub fn r(&self, j: usize) -> f64 {
        self.inner_radius + j as f64 * self.dr()
    }

    /// Azimuth of column `i`.
    pub fn theta(&self, i: usize) -> f64 {
        i as f64 * self.dtheta()
    }

    /// Number of retained azimuthal modes.
    pub fn n_modes(&self) -> usize {
        self.ntheta / 2 + 1
    }

    /// Annulus area.
    pub fn area(&self) -> f64 {
        PI * (self.outer_radius * self.outer_radius - self.inner_radius * self.inner_radius)
    }
}

/// Configuration of an annulus run.
#[derive(Debug, Clone)]
pub struct AnnulusConfig {
    /// Viscosity; `0` selects the inviscid path with no wall rows.
    pub nu: f64,
    /// Time step.
    pub dt: f64,
    /// Wall condition: `DiffusionFree` or `StressFree` (Lions). `NoSlip` is
    /// rejected here.
    pub bc: BoundaryCondition,
    /// 2/3-rule dealiasing of the advection products.
    pub dealias: bool,
    /// Grid.
    pub grid: AnnulusGrid,
}

impl AnnulusConfig {
    fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "viscosity must be non-negative, got {}",
                self.nu
            )));
        }
        if !(self.dt > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.bc == BoundaryCondition::NoSlip && self.nu > 0.0 {
            return Err(SolverError::InvalidConfig(
                "the annulus offers diffusion-free and Lions walls only".into(),
            ));
        }
        Ok(())
    }
}

/// Instantaneous annulus state; stepping produces fresh states.
#[derive(Debug, Clone)]
pub struct AnnulusState {
    /// Vorticity half-spectrum, shape `(n_modes, nr)`, unnormalized.
    omega_hat: Array2<Complex64>,
    /// Circulation around the inner boundary (a constant of motion).
    pub circulation: f64,
    /// Simulation time.
    pub t: f64,
    /// Completed step count.
    pub step_index: usize,
    /// Cumulative `nu int_0^t |grad omega|^2`, accumulated at midpoint states.
    pub palinstrophy_integral: f64,
    prev_advection: Option<Array2<Complex64>>,
}

impl AnnulusState {
    /// Vorticity as a field (spectral representation), axes `(theta, r)`.
    pub fn omega(&self) -> Field2D {
        let ntheta = (self.omega_hat.nrows() - 1) * 2;
        Field2D::spectral(ntheta, self.omega_hat.clone()).expect("state invariant")
    }

    /// Borrows the raw half-spectrum.
    pub fn omega_hat(&self) -> &Array2<Complex64> {
        &self.omega_hat
    }
}

/// Annulus solver: transform plans plus per-mode factorizations, immutable
/// during stepping.
pub struct AnnulusSolver {
    cfg: AnnulusConfig,
    ft: FourierTransform,
    /// Half of `nu * dt`.
    a: f64,
    /// Dealias mask.
    keep: Vec<bool>,
    cn: Option<Vec<TridiagFactor<Complex64>>>,
    poisson: Vec<TridiagFactor<Complex64>>,
    /// Ring radii.
    r: Vec<f64>,
    /// Face radii `r_{j+1/2}`, length `nr - 1`.
    rf: Vec<f64>,
    /// Trapezoid weights in r.
    wr: Vec<f64>,
}

impl AnnulusSolver {
    /// Builds factorizations for `cfg`.
    pub fn new(cfg: AnnulusConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid;
        let (nm, nr) = (grid.n_modes(), grid.nr);
        let dr = grid.dr();
        let r: Vec<f64> = (0..nr).map(|j| grid.r(j)).collect();
        let rf: Vec<f64> = (0..nr - 1).map(|j| r[j] + 0.5 * dr).collect();
        let a = 0.5 * cfg.nu * cfg.dt;
        let keep: Vec<bool> = (0..nm)
            .map(|m| !cfg.dealias || m <= grid.ntheta / 3)
            .collect();

        let poisson = (0..nm)
            .map(|m| {
                let m2 = (m * m) as f64;
                let mut sub = vec![ZERO; nr - 1];
                let mut diag = vec![ZERO; nr];
                let mut sup = vec![ZERO; nr - 1];
                for j in 1..nr - 1 {
                    let scale = 1.0 / (r[j] * dr * dr);
                    sub[j - 1] = Complex64::new(rf[j - 1] * scale, 0.0);
                    sup[j] = Complex64::new(rf[j] * scale, 0.0);
                    diag[j] =
                        Complex64::new(-(rf[j] + rf[j - 1]) * scale - m2 / (r[j] * r[j]), 0.0);
                }
                diag[0] = Complex64::new(1.0, 0.0);
                diag[nr - 1] = Complex64::new(1.0, 0.0);
                TridiagFactor::new(&sub, &diag, &sup)
            })
            .collect();

        let cn = if cfg.nu > 0.0 {
            Some(
                (0..nm)
                    .map(|m| {
                        let m2 = (m * m) as f64;
                        let mut sub = vec![ZERO; nr - 1];
                        let mut diag = vec![ZERO; nr];
                        let mut sup = vec![ZERO; nr - 1];
                        for j in 1..nr - 1 {
                            let scale = a / (r[j] * dr * dr);
                            sub[j - 1] = Complex64::new(-rf[j - 1] * scale, 0.0);
                            sup[j] = Complex64::new(-rf[j] * scale, 0.0);
                            diag[j] = Complex64::new(
                                1.0 + (rf[j] + rf[j - 1]) * scale + a * m2 / (r[j] * r[j]),
                                0.0,
                            );
                        }
                        match cfg.bc {
                            BoundaryCondition::DiffusionFree => {
                                let s0 = a / (r[0] * dr * dr);
                                diag[0] = Complex64::new(
                                    1.0 + 2.0 * rf[0] * s0 + a * m2 / (r[0] * r[0]),
                                    0.0,
                                );
                                sup[0] = Complex64::new(-2.0 * rf[0] * s0, 0.0);
                                let s1 = a / (r[nr - 1] * dr * dr);
                                diag[nr - 1] = Complex64::new(
                                    1.0 + 2.0 * rf[nr - 2] * s1 + a * m2 / (r[nr - 1] * r[nr - 1]),
                                    0.0,
                                );
                                sub[nr - 2] = Complex64::new(-2.0 * rf[nr - 2] * s1, 0.0);
                            }
                            BoundaryCondition::StressFree | BoundaryCondition::NoSlip => {
                                diag[0] = Complex64::new(1.0, 0.0);
                                sup[0] = ZERO;
                                diag[nr - 1] = Complex64::new(1.0, 0.0);
                                sub[nr - 2] = ZERO;
                            }
                        }
                        TridiagFactor::new(&sub, &diag, &sup)
                    })
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };

        Ok(AnnulusSolver {
            cfg,
            ft: FourierTransform::new(grid.ntheta),
            a,
            keep,
            cn,
            poisson,
            r,
            rf,
            wr: trapezoid_weights(nr, dr),
        })
    }

    /// Configuration this solver was built for.
    pub fn config(&self) -> &AnnulusConfig {
        &self.cfg
    }

    /// Grid shorthand.
    pub fn grid(&self) -> AnnulusGrid {
        self.cfg.grid
    }

    /// Wraps initial vorticity and circulation into a state at `t = 0`.
    pub fn initial_state(&self, omega0: &Field2D, circulation: f64) -> Result<AnnulusState> {
        let grid = self.cfg.grid;
        if omega0.n_periodic() != grid.ntheta || omega0.n_transverse() != grid.nr {
            return Err(SolverError::GridMismatch(format!(
                "initial vorticity is {}x{}, grid is {}x{}",
                omega0.n_periodic(),
                omega0.n_transverse(),
                grid.ntheta,
                grid.nr
            )));
        }
        if !omega0.is_finite() || !circulation.is_finite() {
            return Err(SolverError::NonFiniteInput("initial state".into()));
        }
        Ok(AnnulusState {
            omega_hat: omega0.to_spectral(),
            circulation,
            t: 0.0,
            step_index: 0,
            palinstrophy_integral: 0.0,
            prev_advection: None,
        })
    }

    /// Bands `(sub, diag, sup)` of the discrete radial operator the stepper
    /// integrates for mode `m` — the flux-form polar Laplacian with this
    /// solver's wall rows (Lions rows are zero rows: wall values are pinned).
    /// Exposed so external checks can exponentiate the exact generator.
    pub fn radial_operator_bands(&self, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let nr = self.cfg.grid.nr;
        let dr = self.cfg.grid.dr();
        let m2 = (m * m) as f64;
        let mut sub = vec![0.0; nr - 1];
        let mut diag = vec![0.0; nr];
        let mut sup = vec![0.0; nr - 1];
        for j in 1..nr - 1 {
            let scale = 1.0 / (self.r[j] * dr * dr);
            sub[j - 1] = self.rf[j - 1] * scale;
            sup[j] = self.rf[j] * scale;
            diag[j] = -(self.rf[j] + self.rf[j - 1]) * scale - m2 / (self.r[j] * self.r[j]);
        }
        if self.cfg.bc == BoundaryCondition::DiffusionFree {
            let s0 = 1.0 / (self.r[0] * dr * dr);
            sup[0] = 2.0 * self.rf[0] * s0;
            diag[0] = -2.0 * self.rf[0] * s0 - m2 / (self.r[0] * self.r[0]);
            let s1 = 1.0 / (self.r[nr - 1] * dr * dr);
            sub[nr - 2] = 2.0 * self.rf[nr - 2] * s1;
            diag[nr - 1] = -2.0 * self.rf[nr - 2] * s1 - m2 / (self.r[nr - 1] * self.r[nr - 1]);
        }
        (sub, diag, sup)
    }

    /// Applies the discrete radial operator of mode `m` (diffusion-free wall
    /// rows when configured; zero rows under Lions, whose wall values are
    /// pinned by the solve instead).
    fn apply_radial_operator(&self, m: usize, w: &[Complex64], out: &mut [Complex64]) {
        let nr = self.cfg.grid.nr;
        let dr = self.cfg.grid.dr();
        let m2 = (m * m) as f64;
        for j in 1..nr - 1 {
            let flux_hi = self.rf[j] * (w[j + 1] - w[j]);
            let flux_lo = self.rf[j - 1] * (w[j] - w[j - 1]);
            out[j] =
                (flux_hi - flux_lo) / (self.r[j] * dr * dr) - w[j] * (m2 / (self.r[j] * self.r[j]));
        }
        match self.cfg.bc {
            BoundaryCondition::DiffusionFree => {
                out[0] = (w[1] - w[0]) * (2.0 * self.rf[0] / (self.r[0] * dr * dr))
                    - w[0] * (m2 / (self.r[0] * self.r[0]));
                out[nr - 1] = (w[nr - 2] - w[nr - 1])
                    * (2.0 * self.rf[nr - 2] / (self.r[nr - 1] * dr * dr))
                    - w[nr - 1] * (m2 / (self.r[nr - 1] * self.r[nr - 1]));
            }
            BoundaryCondition::StressFree | BoundaryCondition::NoSlip => {
                out[0] = ZERO;
                out[nr - 1] = ZERO;
            }
        }
    }

    /// Solves the Dirichlet Poisson problem for one mode.
    fn solve_poisson_mode(&self, m: usize, omega_m: &[Complex64]) -> Vec<Complex64> {
        let nr = self.cfg.grid.nr;
        let mut rhs = omega_m.to_vec();
        rhs[0] = ZERO;
        rhs[nr - 1] = ZERO;
        self.poisson[m].solve_in_place(&mut rhs);
        rhs
    }

    /// Dirichlet-part stream function half-spectrum (`psi0` with
    /// `psi0 = 0` on both circles; the harmonic part is carried analytically
    /// by the velocity reconstruction and is not included here).
    pub fn streamfunction_hat(&self, state: &AnnulusState) -> Array2<Complex64> {
        let grid = self.cfg.grid;
        let (nm, nr) = (grid.n_modes(), grid.nr);
        let mut psi = Array2::from_elem((nm, nr), ZERO);
        let mut mode = vec![ZERO; nr];
        for m in 0..nm {
            for (j, w) in mode.iter_mut().enumerate() {
                *w = state.omega_hat[(m, j)];
            }
            let p = self.solve_poisson_mode(m, &mode);
            for j in 0..nr {
                psi[(m, j)] = p[j];
            }
        }
        psi
    }

    /// Velocity half-spectra `(u_r_hat, u_theta_hat)` for a vorticity
    /// spectrum and circulation.
    fn velocity_hat(
        &self,
        omega_hat: &Array2<Complex64>,
        circulation: f64,
    ) -> (Array2<Complex64>, Array2<Complex64>) {
        let grid = self.cfg.grid;
        let (nm, nr) = (grid.n_modes(), grid.nr);
        let dr = grid.dr();
        let ntheta_f = grid.ntheta as f64;
        let mut u_r = Array2::from_elem((nm, nr), ZERO);
        let mut u_t = Array2::from_elem((nm, nr), ZERO);
        let mut mode = vec![ZERO; nr];
        for m in 0..nm {
            for (j, w) in mode.iter_mut().enumerate() {
                *w = omega_hat[(m, j)];
            }
            let psi = self.solve_poisson_mode(m, &mode);
            // u_theta = d(psi)/dr: centered inside, half-cell flux stencils
            // at the walls (second order; they make the Stokes identity
            // exact against the r-weighted trapezoid rule)
            let f_lo = (psi[1] - psi[0]) / dr;
            let f_hi = (psi[nr - 1] - psi[nr - 2]) / dr;
            u_t[(m, 0)] = f_lo * (self.rf[0] / self.r[0]) - mode[0] * (0.5 * dr);
            u_t[(m, nr - 1)] =
                f_hi * (self.rf[nr - 2] / self.r[nr - 1]) + mode[nr - 1] * (0.5 * dr);
            for j in 1..nr - 1 {
                u_t[(m, j)] = (psi[j + 1] - psi[j - 1]) / (2.0 * dr);
            }
            // u_r = -(1/r) d(psi)/dtheta; exactly zero on both walls
            let im = Complex64::new(0.0, m as f64);
            for j in 0..nr {
                u_r[(m, j)] = -im * psi[j] / self.r[j];
            }
        }
        // harmonic part: u_theta += c / (2 pi r), with c chosen so the inner
        // circulation equals the prescribed value exactly
        let inner_from_psi = 2.0 * PI * grid.inner_radius * u_t[(0, 0)].re / ntheta_f;
        let c = circulation - inner_from_psi;
        for j in 0..nr {
            u_t[(0, j)] += Complex64::new(ntheta_f * c / (2.0 * PI * self.r[j]), 0.0);
        }
        (u_r, u_t)
    }

    /// Velocity reconstruction `(u_r, u_theta)` as physical fields with axes
    /// `(theta, r)`. `u_r` vanishes on both walls exactly and the line
    /// integral of `u_theta` around the inner circle equals the state's
    /// circulation to round-off.
    pub fn velocity(&self, state: &AnnulusState) -> (Field2D, Field2D) {
        let (ur_hat, ut_hat) = self.velocity_hat(&state.omega_hat, state.circulation);
        let u_r = Field2D::physical(self.ft.inverse_2d(&ur_hat)).expect("grid invariant");
        let u_t = Field2D::physical(self.ft.inverse_2d(&ut_hat)).expect("grid invariant");
        (u_r, u_t)
    }

    /// Circulations `(inner, outer)` by direct line integral of the
    /// reconstructed tangential velocity.
    pub fn circulations(&self, state: &AnnulusState) -> (f64, f64) {
        let grid = self.cfg.grid;
        let (_, ut_hat) = self.velocity_hat(&state.omega_hat, state.circulation);
        let mean_inner = ut_hat[(0, 0)].re / grid.ntheta as f64;
        let mean_outer = ut_hat[(0, grid.nr - 1)].re / grid.ntheta as f64;
        (
            2.0 * PI * grid.inner_radius * mean_inner,
            2.0 * PI * grid.outer_radius * mean_outer,
        )
    }

    /// Total vorticity `int int omega r dr dtheta`.
    pub fn total_vorticity(&self, state: &AnnulusState) -> f64 {
        let grid = self.cfg.grid;
        let mut s = 0.0;
        for j in 0..grid.nr {
            s += self.wr[j] * self.r[j] * state.omega_hat[(0, j)].re;
        }
        2.0 * PI * s / grid.ntheta as f64
    }

    /// Absolute defect of the discrete Stokes identity
    /// `circ(b) - circ(a) - int int omega` (zero to round-off by
    /// construction of the wall velocity stencils).
    pub fn stokes_residual(&self, state: &AnnulusState) -> f64 {
        let (inner, outer) = self.circulations(state);
        (outer - inner - self.total_vorticity(state)).abs()
    }

    fn masked(&self, omega_hat: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = omega_hat.clone();
        for (m, keep) in self.keep.iter().enumerate() {
            if !keep {
                for j in 0..self.cfg.grid.nr {
                    out[(m, j)] = ZERO;
                }
            }
        }
        out
    }

    /// Advection field `N = (1/r) d/dtheta(u_theta omega) + (1/r) D_r(r u_r
    /// omega)` in spectral form, plus the largest pointwise speed.
    fn advection(
        &self,
        omega_hat: &Array2<Complex64>,
        circulation: f64,
    ) -> (Array2<Complex64>, f64) {
        let grid = self.cfg.grid;
        let (nm, nr) = (grid.n_modes(), grid.nr);
        let dr = grid.dr();
        let om_masked = self.masked(omega_hat);
        let (ur_hat, ut_hat) = self.velocity_hat(&om_masked, circulation);
        let om_p = self.ft.inverse_2d(&om_masked);
        let ur_p = self.ft.inverse_2d(&ur_hat);
        let ut_p = self.ft.inverse_2d(&ut_hat);

        let mut max_speed = 0.0_f64;
        for v in ur_p.iter().chain(ut_p.iter()) {
            max_speed = max_speed.max(v.abs());
        }

        let mut flux_t = Array2::zeros((grid.ntheta, nr));
        let mut flux_r = Array2::zeros((grid.ntheta, nr));
        for i in 0..grid.ntheta {
            for j in 0..nr {
                flux_t[(i, j)] = ut_p[(i, j)] * om_p[(i, j)];
                flux_r[(i, j)] = self.r[j] * ur_p[(i, j)] * om_p[(i, j)];
            }
        }
        let ft_hat = self.ft.forward_2d(&flux_t);
        let fr_hat = self.ft.forward_2d(&flux_r);

        let mut n = Array2::from_elem((nm, nr), ZERO);
        for m in 0..nm {
            if !self.keep[m] {
                continue;
            }
            let im = Complex64::new(0.0, m as f64);
            for j in 0..nr {
                n[(m, j)] = im * ft_hat[(m, j)] / self.r[j];
            }
            // D_r of the radial flux: centered inside, odd wall extension
            // (the flux vanishes at walls since u_r does)
            n[(m, 0)] += fr_hat[(m, 1)] / (self.r[0] * dr);
            for j in 1..nr - 1 {
                n[(m, j)] += (fr_hat[(m, j + 1)] - fr_hat[(m, j - 1)]) / (2.0 * self.r[j] * dr);
            }
            n[(m, nr - 1)] -= fr_hat[(m, nr - 2)] / (self.r[nr - 1] * dr);
        }
        (n, max_speed)
    }

    /// One Crank-Nicolson update with a given explicit advection field.
    fn implicit_update(
        &self,
        omega_hat: &Array2<Complex64>,
        advection: &Array2<Complex64>,
    ) -> Array2<Complex64> {
        let grid = self.cfg.grid;
        let (nm, nr) = (grid.n_modes(), grid.nr);
        let dt = self.cfg.dt;
        let cn = match &self.cn {
            None => {
                let mut out = omega_hat.clone();
                for m in 0..nm {
                    for j in 0..nr {
                        out[(m, j)] -= advection[(m, j)] * dt;
                    }
                }
                return out;
            }
            Some(cn) => cn,
        };
        let mut out = Array2::from_elem((nm, nr), ZERO);
        let mut mode = vec![ZERO; nr];
        let mut lap = vec![ZERO; nr];
        for m in 0..nm {
            for (j, w) in mode.iter_mut().enumerate() {
                *w = omega_hat[(m, j)];
            }
            self.apply_radial_operator(m, &mode, &mut lap);
            let mut rhs = vec![ZERO; nr];
            for j in 0..nr {
                rhs[j] = mode[j] + lap[j] * self.a - advection[(m, j)] * dt;
            }
            if matches!(
                self.cfg.bc,
                BoundaryCondition::StressFree | BoundaryCondition::NoSlip
            ) {
                rhs[0] = ZERO;
                rhs[nr - 1] = ZERO;
            }
            cn[m].solve_in_place(&mut rhs);
            for j in 0..nr {
                out[(m, j)] = rhs[j];
            }
        }
        out
    }

    /// Advances one step; the circulation is carried unchanged.
    pub fn step(&self, state: &AnnulusState) -> Result<AnnulusState> {
        let grid = self.cfg.grid;
        let dt = self.cfg.dt;
        let (n_now, max_speed) = self.advection(&state.omega_hat, state.circulation);
        let min_cell = (grid.inner_radius * grid.dtheta()).min(grid.dr());
        let cfl = max_speed * dt / min_cell;
        if cfl >= CFL_LIMIT {
            return Err(SolverError::CflViolation {
                step: state.step_index,
                cfl,
                limit: CFL_LIMIT,
            });
        }

        let n_ab = match &state.prev_advection {
            Some(prev) => {
                let mut n = n_now.clone();
                for (dst, p) in n.iter_mut().zip(prev.iter()) {
                    *dst = *dst * 1.5 - *p * 0.5;
                }
                n
            }
            None => {
                let omega_star = self.implicit_update(&state.omega_hat, &n_now);
                let (n_star, _) = self.advection(&omega_star, state.circulation);
                let mut n = n_now.clone();
                for (dst, s) in n.iter_mut().zip(n_star.iter()) {
                    *dst = (*dst + *s) * 0.5;
                }
                n
            }
        };

        let omega_new = self.implicit_update(&state.omega_hat, &n_ab);
        if omega_new
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(SolverError::NonFiniteState {
                step: state.step_index,
                t: state.t + dt,
            });
        }

        let mut palinstrophy = state.palinstrophy_integral;
        if self.cfg.nu > 0.0 {
            let mut mid = omega_new.clone();
            for (dst, old) in mid.iter_mut().zip(state.omega_hat.iter()) {
                *dst = (*dst + *old) * 0.5;
            }
            palinstrophy += self.cfg.nu * dt * self.grad_norm_squared(&mid);
        }

        Ok(AnnulusState {
            omega_hat: omega_new,
            circulation: state.circulation,
            t: state.t + dt,
            step_index: state.step_index + 1,
            palinstrophy_integral: palinstrophy,
            prev_advection: Some(n_now),
        })
    }

    /// Runs to `t_end` (an integer number of steps away), recording
    /// diagnostics at step 0, every `diag_stride` steps, and the final step.
    pub fn run(
        &self,
        state0: AnnulusState,
        t_end: f64,
        diag_stride: usize,
    ) -> Result<(AnnulusState, Vec<DiagnosticsRecord>)> {
        let mut records = Vec::new();
        let state = self.run_with(state0, t_end, diag_stride, |_, rec| {
            records.push(rec.clone())
        })?;
        Ok((state, records))
    }

    /// [`AnnulusSolver::run`] with a caller-supplied observer.
    pub fn run_with(
        &self,
        state0: AnnulusState,
        t_end: f64,
        diag_stride: usize,
        mut observer: impl FnMut(&AnnulusState, &DiagnosticsRecord),
    ) -> Result<AnnulusState> {
        if t_end < state0.t {
            return Err(SolverError::InvalidConfig(format!(
                "t_end {t_end} is before the state time {}",
                state0.t
            )));
        }
        let span = t_end - state0.t;
        let nsteps_f = span / self.cfg.dt;
        let nsteps = nsteps_f.round() as usize;
        if (nsteps_f - nsteps as f64).abs() > 1e-6 {
            return Err(SolverError::InvalidConfig(format!(
                "time step {} does not divide the span {span} evenly",
                self.cfg.dt
            )));
        }
        let stride = diag_stride.max(1);
        let rec = self.diagnostics_record(&state0);
        observer(&state0, &rec);
        let mut state = state0;
        for s in 0..nsteps {
            state = self.step(&state)?;
            if (s + 1) % stride == 0 || s + 1 == nsteps {
                let rec = self.diagnostics_record(&state);
                if !rec.is_finite() {
                    return Err(SolverError::NonFiniteState {
                        step: state.step_index,
                        t: state.t,
                    });
                }
                observer(&state, &rec);
            }
        }
        Ok(state)
    }

    // ---- quadrature against solver stencils ----

    fn mode_weight(&self, m: usize) -> f64 {
        if m == 0 || m == self.cfg.grid.ntheta / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// `int int f^2 r dr dtheta` for a half-spectrum field.
    fn norm_squared(&self, f_hat: &Array2<Complex64>) -> f64 {
        let grid = self.cfg.grid;
        let n2 = (grid.ntheta * grid.ntheta) as f64;
        let mut total = 0.0;
        for m in 0..grid.n_modes() {
            let mut s = 0.0;
            for j in 0..grid.nr {
                s += self.wr[j] * self.r[j] * f_hat[(m, j)].norm_sqr();
            }
            total += self.mode_weight(m) * s / n2;
        }
        2.0 * PI * total
    }

    /// `int int |grad f|^2 r dr dtheta` in the face-flux form paired with the
    /// Crank-Nicolson wall rows.
    fn grad_norm_squared(&self, f_hat: &Array2<Complex64>) -> f64 {
        let grid = self.cfg.grid;
        let dr = grid.dr();
        let n2 = (grid.ntheta * grid.ntheta) as f64;
        let mut total = 0.0;
        for m in 0..grid.n_modes() {
            let m2 = (m * m) as f64;
            let mut s = 0.0;
            for j in 0..grid.nr - 1 {
                s += self.rf[j] * (f_hat[(m, j + 1)] - f_hat[(m, j)]).norm_sqr() / dr;
            }
            for j in 0..grid.nr {
                s += m2 * self.wr[j] * f_hat[(m, j)].norm_sqr() / self.r[j];
            }
            total += self.mode_weight(m) * s / n2;
        }
        2.0 * PI * total
    }

    /// Domain-averaged vorticity.
    pub fn mean_vorticity(&self, state: &AnnulusState) -> f64 {
        self.total_vorticity(state) / self.cfg.grid.area()
    }

    /// L^p norm of vorticity over the polar area element.
    pub fn lp_norm(&self, state: &AnnulusState, p: f64) -> f64 {
        let grid = self.cfg.grid;
        let om = self.ft.inverse_2d(&state.omega_hat);
        let dtheta = grid.dtheta();
        let mut s = 0.0;
        for i in 0..grid.ntheta {
            for j in 0..grid.nr {
                s += om[(i, j)].abs().powf(p) * self.wr[j] * self.r[j] * dtheta;
            }
        }
        s.powf(1.0 / p)
    }

    /// Half the squared L2 norm of vorticity.
    pub fn enstrophy(&self, state: &AnnulusState) -> f64 {
        0.5 * self.norm_squared(&state.omega_hat)
    }

    /// Kinetic energy of the reconstructed velocity.
    pub fn energy(&self, state: &AnnulusState) -> f64 {
        let (ur, ut) = self.velocity_hat(&state.omega_hat, state.circulation);
        0.5 * (self.norm_squared(&ur) + self.norm_squared(&ut))
    }

    /// Largest pointwise vorticity magnitude.
    pub fn max_vorticity(&self, state: &AnnulusState) -> f64 {
        let om = self.ft.inverse_2d(&state.omega_hat);
        om.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Full diagnostics row (the annulus has no flat-wall stress-work
    /// diagnostic; those columns stay empty).
    pub fn diagnostics_record(&self, state: &AnnulusState) -> DiagnosticsRecord {
        let (inner, outer) = self.circulations(state);
        DiagnosticsRecord {
            t: state.t,
            enstrophy: self.enstrophy(state),
            palinstrophy_integral: state.palinstrophy_integral,
            energy: self.energy(state),
            mean_vorticity: self.mean_vorticity(state),
            l1: self.lp_norm(state, 1.0),
            l2: self.lp_norm(state, 2.0),
            l4: self.lp_norm(state, 4.0),
            circ_inner: Some(inner),
            circ_outer: Some(outer),
            boundary_stress_work: None,
            bulk_dissipation: None,
        }
    }
}

/// Discrete residual of the tangential vector Laplacian of the potential flow
/// past a cylinder of radius `a` with far-field speed `speed`, evaluated on
/// the inner circle of `grid` (which must have `inner_radius == a`).
///
/// The field `u_r = U (1 - a^2/r^2) cos(theta)`,
/// `u_theta = -U (1 + a^2/r^2) sin(theta)` is harmonic, so the analytic value
/// is zero; what is returned is pure discretization error of the one-sided
/// radial stencils (third order, so the wall evaluation cannot dominate a
/// second-order interior).
pub fn potential_flow_bc_residual(speed: f64, a: f64, grid: AnnulusGrid) -> Result<f64> {
    if (grid.inner_radius - a).abs() > 1e-12 * a.abs().max(1.0) {
        return Err(SolverError::InvalidConfig(format!(
            "grid inner radius {} does not match the cylinder radius {a}",
            grid.inner_radius
        )));
    }
    if grid.nr < 8 {
        return Err(SolverError::InvalidConfig(
            "one-sided wall stencils need nr >= 8".into(),
        ));
    }
    let ft = FourierTransform::new(grid.ntheta);
    let u_r = Array2::from_shape_fn((grid.ntheta, grid.nr), |(i, j)| {
        let r = grid.r(j);
        speed * (1.0 - a * a / (r * r)) * grid.theta(i).cos()
    });
    let u_t = Array2::from_shape_fn((grid.ntheta, grid.nr), |(i, j)| {
        let r = grid.r(j);
        -speed * (1.0 + a * a / (r * r)) * grid.theta(i).sin()
    });
    let ur_hat = ft.forward_2d(&u_r);
    let ut_hat = ft.forward_2d(&u_t);
    let dr = grid.dr();
    let nm = grid.n_modes();
    let mut residual_hat = Array2::from_elem((nm, grid.nr), ZERO);
    for m in 0..nm {
        // one-sided first and second radial derivatives at the wall, third
        // order accurate
        let d1 = (ut_hat[(m, 0)] * (-11.0 / 6.0) + ut_hat[(m, 1)] * 3.0 - ut_hat[(m, 2)] * 1.5
            + ut_hat[(m, 3)] * (1.0 / 3.0))
            / dr;
        let d2 = (ut_hat[(m, 0)] * (35.0 / 12.0) - ut_hat[(m, 1)] * (26.0 / 3.0)
            + ut_hat[(m, 2)] * 9.5
            - ut_hat[(m, 3)] * (14.0 / 3.0)
            + ut_hat[(m, 4)] * (11.0 / 12.0))
            / (dr * dr);
        let m2 = (m * m) as f64;
        let im = Complex64::new(0.0, m as f64);
        residual_hat[(m, 0)] = d2 + d1 / a - ut_hat[(m, 0)] * ((m2 + 1.0) / (a * a))
            + im * ur_hat[(m, 0)] * (2.0 / (a * a));
    }
    let res = ft.inverse_2d(&residual_hat);
    let mut max = 0.0_f64;
    for i in 0..grid.ntheta {
        max = max.max(res[(i, 0)].abs());
    }
    Ok(max)
}

/// Gaussian vorticity blob centered at polar position `(center_radius,
/// center_angle)` with standard deviation `width`, unit peak amplitude.
/// Choose the center and width so the blob is negligible at both walls; the
/// wall values then satisfy every wall condition to round-off.
pub fn gaussian_vortex_initial_condition(
    grid: AnnulusGrid,
    center_radius: f64,
    center_angle: f64,
    width: f64,
) -> Result<Field2D> {
    if !(width > 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "blob width must be positive, got {width}"
        )));
    }
    if !(center_radius > grid.inner_radius && center_radius < grid.outer_radius) {
        return Err(SolverError::InvalidConfig(format!(
            "blob center radius {center_radius} is outside the annulus"
        )));
    }
    Field2D::from_index_fn(grid.ntheta, grid.nr, |i, j| {
        let r = grid.r(j);
        let theta = grid.theta(i);
        // squared distance between (r, theta) and the center, law of cosines
        let d2 = r * r + center_radius * center_radius
            - 2.0 * r * center_radius * (theta - center_angle).cos();
        (-d2 / (2.0 * width * width)).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> AnnulusGrid {
        AnnulusGrid::new(16, 17, 1.0, 2.0).unwrap()
    }

    fn config(bc: BoundaryCondition, nu: f64) -> AnnulusConfig {
        AnnulusConfig {
            nu,
            dt: 1e-3,
            bc,
            dealias: true,
            grid: small_grid(),
        }
    }

    #[test]
    fn point_vortex_flow_is_exact() {
        let solver = AnnulusSolver::new(config(BoundaryCondition::DiffusionFree, 1e-3)).unwrap();
        let grid = solver.grid();
        let omega0 = Field2D::from_index_fn(grid.ntheta, grid.nr, |_, _| 0.0).unwrap();
        let state = solver.initial_state(&omega0, 1.0).unwrap();
        let (u_r, u_t) = solver.velocity(&state);
        let ur_p = u_r.to_physical();
        let ut_p = u_t.to_physical();
        for i in 0..grid.ntheta {
            for j in 0..grid.nr {
                let expect = 1.0 / (2.0 * PI * grid.r(j));
                assert!((ut_p[(i, j)] - expect).abs() < 1e-13);
                assert!(ur_p[(i, j)].abs() < 1e-13);
            }
        }
        let (inner, outer) = solver.circulations(&state);
        assert!((inner - 1.0).abs() < 1e-13);
        assert!((outer - 1.0).abs() < 1e-13);
        assert!(solver.stokes_residual(&state) < 1e-13);
    }

    #[test]
    fn zero_data_gives_zero_velocity() {
        let solver = AnnulusSolver::new(config(BoundaryCondition::StressFree, 1e-3)).unwrap();
        let grid = solver.grid();
        let omega0 = Field2D::from_index_fn(grid.ntheta, grid.nr, |_, _| 0.0).unwrap();
        let state = solver.initial_state(&omega0, 0.0).unwrap();
        let (u_r, u_t) = solver.velocity(&state);
        assert!(u_r.max_abs() < 1e-15);
        assert!(u_t.max_abs() < 1e-15);
        assert_eq!(solver.energy(&state), 0.0);
    }

    #[test]
    fn no_slip_is_rejected_on_curved_walls() {
        assert!(matches!(
            AnnulusSolver::new(config(BoundaryCondition::NoSlip, 1e-3)),
            Err(SolverError::InvalidConfig(_))
        ));
    }

    #[test]
    fn stokes_identity_is_structural() {
        let solver = AnnulusSolver::new(config(BoundaryCondition::DiffusionFree, 1e-3)).unwrap();
        let grid = solver.grid();
        let omega0 = gaussian_vortex_initial_condition(grid, 1.5, 0.4, 0.12).unwrap();
        let state = solver.initial_state(&omega0, 0.7).unwrap();
        let total = solver.total_vorticity(&state);
        assert!(total.abs() > 1e-3, "blob should carry net vorticity");
        assert!(solver.stokes_residual(&state) < 1e-12 * total.abs());
        let (inner, _) = solver.circulations(&state);
        assert!((inner - 0.7).abs() < 1e-13);
    }

    #[test]
    fn impermeability_is_exact() {
        let solver = AnnulusSolver::new(config(BoundaryCondition::DiffusionFree, 1e-3)).unwrap();
        let grid = solver.grid();
        let omega0 = gaussian_vortex_initial_condition(grid, 1.4, 1.0, 0.15).unwrap();
        let state = solver.initial_state(&omega0, 0.3).unwrap();
        let (u_r, _) = solver.velocity(&state);
        let ur_p = u_r.to_physical();
        for i in 0..grid.ntheta {
            assert!(ur_p[(i, 0)].abs() < 1e-14);
            assert!(ur_p[(i, grid.nr - 1)].abs() < 1e-14);
        }
    }

    #[test]
    fn axisymmetric_states_have_no_advection() {
        // axisymmetric vorticity induces purely azimuthal velocity, so the
        // advection term vanishes identically and stepping reduces to radial
        // diffusion; azimuthal modes must stay exactly zero
        let solver = AnnulusSolver::new(config(BoundaryCondition::DiffusionFree, 1e-2)).unwrap();
        let grid = solver.grid();
        let omega0 = Field2D::from_index_fn(grid.ntheta, grid.nr, |_, j| {
            let s = (grid.r(j) - grid.inner_radius) / (grid.outer_radius - grid.inner_radius);
            (PI * s).cos()
        })
        .unwrap();
        let mut state = solver.initial_state(&omega0, 0.0).unwrap();
        for _ in 0..5 {
            state = solver.step(&state).unwrap();
        }
        for m in 1..grid.n_modes() {
            for j in 0..grid.nr {
                assert!(state.omega_hat()[(m, j)].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn total_vorticity_is_conserved_by_steps() {
        let solver = AnnulusSolver::new(config(BoundaryCondition::DiffusionFree, 5e-3)).unwrap();
        let grid = solver.grid();
        let omega0 = gaussian_vortex_initial_condition(grid, 1.5, 0.0, 0.15).unwrap();
        let mut state = solver.initial_state(&omega0, 1.0).unwrap();
        let total0 = solver.total_vorticity(&state);
        for _ in 0..20 {
            state = solver.step(&state).unwrap();
        }
        assert!((solver.total_vorticity(&state) - total0).abs() < 1e-12 * total0.abs());
        let (inner, _) = solver.circulations(&state);
        assert!((inner - 1.0).abs() < 1e-12);
        assert!(solver.stokes_residual(&state) < 1e-12);
    }

    #[test]
    fn lions_rows_pin_wall_vorticity() {
        let solver = AnnulusSolver::new(config(BoundaryCondition::StressFree, 5e-3)).unwrap();
        let grid = solver.grid();
        let omega0 = Field2D::from_index_fn(grid.ntheta, grid.nr, |_, j| {
            let s = (grid.r(j) - grid.inner_radius) / (grid.outer_radius - grid.inner_radius);
            (PI * s).sin()
        })
        .unwrap();
        let mut state = solver.initial_state(&omega0, 0.0).unwrap();
        for _ in 0..3 {
            state = solver.step(&state).unwrap();
        }
        let om = state.omega().to_physical();
        for i in 0..grid.ntheta {
            assert!(om[(i, 0)].abs() < 1e-14);
            assert!(om[(i, grid.nr - 1)].abs() < 1e-14);
        }
    }

    #[test]
    fn potential_flow_residual_is_small_and_zero_for_zero_speed() {
        let grid = AnnulusGrid::new(16, 256, 1.0, 2.0).unwrap();
        assert_eq!(potential_flow_bc_residual(0.0, 1.0, grid).unwrap(), 0.0);
        let res = potential_flow_bc_residual(1.0, 1.0, grid).unwrap();
        assert!(res < 1e-3, "residual {res}");
    }

    #[test]
    fn potential_flow_grid_mismatch_is_rejected() {
        let grid = AnnulusGrid::new(16, 64, 1.5, 2.0).unwrap();
        assert!(potential_flow_bc_residual(1.0, 1.0, grid).is_err());
    }

    #[test]
    fn grid_validation_rejects_bad_shapes() {
        assert!(AnnulusGrid::new(3, 17, 1.0, 2.0).is_err());
        assert!(AnnulusGrid::new(16, 4, 1.0, 2.0).is_err());
        assert!(AnnulusGrid::new(16, 17, 2.0, 1.0).is_err());
        assert!(AnnulusGrid::new(16, 17, 0.0, 1.0).is_err());
    }

    #[test]
    fn blob_preset_validates_center() {
        let grid = small_grid();
        assert!(gaussian_vortex_initial_condition(grid, 3.0, 0.0, 0.1).is_err());
        assert!(gaussian_vortex_initial_condition(grid, 1.5, 0.0, 0.0).is_err());
        assert!(gaussian_vortex_initial_condition(grid, 1.5, 0.0, 0.1).is_ok());
    }
}
