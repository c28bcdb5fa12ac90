//! Vorticity/streamfunction Navier-Stokes in a periodic channel.
//!
//! Domain: `x in [0, Lx)` periodic, `y in [0, 1]` with walls at both ends.
//! Unknowns: vorticity `omega` (spectral in x, finite differences in y) and
//! the bulk velocity `gamma` (the x-mean horizontal flow, an autonomous degree
//! of freedom the vorticity does not determine).
//!
//! Scheme, per time step:
//!
//! - advection `div(u omega)` evaluated pseudospectrally in x (2/3-rule
//!   dealiasing) and by centered second-order differences in y, with the odd
//!   wall extension of the vertical flux (`v omega` vanishes at walls), which
//!   makes the discrete total vorticity exactly conserved — including in the
//!   Euler (`nu = 0`) path, where no boundary rows exist at all;
//! - diffusion by Crank-Nicolson per Fourier mode; wall rows per
//!   [`apply_vorticity_bc`]: mirrored-ghost Neumann rows (diffusion-free),
//!   zero-Dirichlet rows (stress-free), or influence-matrix-determined
//!   Dirichlet values (no-slip);
//! - advection extrapolated by second-order Adams-Bashforth after a
//!   Heun (RK2) startup step;
//! - `gamma` advanced by the x-averaged momentum equation
//!   `d(gamma)/dt = -nu (wbar(1) - wbar(0))`, Crank-Nicolson in time; under
//!   no-slip its update is coupled into the influence system.
//!
//! The dissipation integral `nu int |grad omega|^2` is accumulated at the
//! Crank-Nicolson midpoint states with the exact discrete Dirichlet form, so
//! the enstrophy ledger closes to the advection error alone (second order).

use crate::bc::BoundaryCondition;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Result, SolverError};
use crate::field::Field2D;
use crate::numerics::{trapezoid_weights, FourierTransform, TridiagFactor};
use ndarray::Array2;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Advective CFL bound enforced at every step.
pub const CFL_LIMIT: f64 = 0.5;

/// Periodic-channel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGrid {
    /// Fourier point count in x (even, >= 4).
    pub nx: usize,
    /// Wall-normal point count including both walls (>= 8).
    pub ny: usize,
    /// Period in x.
    pub lx: f64,
}

impl ChannelGrid {
    /// Validated constructor.
    pub fn new(nx: usize, ny: usize, lx: f64) -> Result<Self> {
        if nx < 4 || !nx.is_multiple_of(2) {
            return Err(SolverError::InvalidConfig(format!(
                "nx must be even and >= 4, got {nx}"
            )));
        }
        if ny < 8 {
            return Err(SolverError::InvalidConfig(format!(
                "ny must be >= 8, got {ny}"
            )));
        }
        if !(lx > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "period must be positive, got {lx}"
            )));
        }
        Ok(ChannelGrid { nx, ny, lx })
    }

    /// Wall-normal spacing.
    pub fn dy(&self) -> f64 {
        1.0 / (self.ny - 1) as f64
    }

    /// Periodic spacing.
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    /// Number of retained Fourier modes.
    pub fn n_modes(&self) -> usize {
        self.nx / 2 + 1
    }

    /// Wavenumber of mode `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.lx
    }

    /// x-coordinate of column `i`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// y-coordinate of row `j`.
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }
}

/// Configuration of a channel run.
#[derive(Debug, Clone)]
pub struct ChannelConfig {
    /// Viscosity; `0` selects the inviscid (Euler) path with no wall rows.
    pub nu: f64,
    /// Time step.
    pub dt: f64,
    /// Wall condition for the vorticity system (ignored when `nu == 0`).
    pub bc: BoundaryCondition,
    /// 2/3-rule dealiasing of the advection products (default on).
    pub dealias: bool,
    /// Grid.
    pub grid: ChannelGrid,
}

impl ChannelConfig {
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
        Ok(())
    }
}

/// Instantaneous solver state. Steps produce a fresh state; nothing is
/// mutated in place, so snapshots stay valid and runs are replayable.
#[derive(Debug, Clone)]
pub struct ChannelState {
    /// Vorticity half-spectrum, shape `(n_modes, ny)`, unnormalized.
    omega_hat: Array2<Complex64>,
    /// Bulk (x-mean) horizontal velocity.
    pub bulk_velocity: f64,
    /// Simulation time.
    pub t: f64,
    /// Completed step count.
    pub step_index: usize,
    /// Cumulative `nu int_0^t |grad omega|^2`, accumulated at midpoint states.
    pub palinstrophy_integral: f64,
    /// Advection field of the previous step (Adams-Bashforth history).
    prev_advection: Option<Array2<Complex64>>,
}

impl ChannelState {
    /// Vorticity as a field (spectral representation).
    pub fn omega(&self) -> Field2D {
        let nx = (self.omega_hat.nrows() - 1) * 2;
        Field2D::spectral(nx, self.omega_hat.clone()).expect("state invariant")
    }

    /// Borrows the raw half-spectrum.
    pub fn omega_hat(&self) -> &Array2<Complex64> {
        &self.omega_hat
    }
}

/// Bands of one per-mode implicit system (`diag` length `ny`, off-diagonals
/// length `ny - 1`).
#[derive(Debug, Clone)]
pub struct TridiagBands {
    pub sub: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub sup: Vec<Complex64>,
}

/// Assembles the interior Crank-Nicolson rows `I - a (Dyy - k^2)` for one
/// Fourier mode, every row in the interior pattern (wall rows overwritten by
/// [`apply_vorticity_bc`]).
pub fn assemble_cn_interior(ny: usize, dy: f64, a: f64, k: f64) -> TridiagBands {
    let dy2 = dy * dy;
    let d = Complex64::new(1.0 + a * (2.0 / dy2 + k * k), 0.0);
    let off = Complex64::new(-a / dy2, 0.0);
    TridiagBands {
        sub: vec![off; ny - 1],
        diag: vec![d; ny],
        sup: vec![off; ny - 1],
    }
}

/// Overwrites the wall rows of an implicit-diffusion system according to the
/// wall condition.
///
/// - `DiffusionFree`: homogeneous Neumann on vorticity through the mirrored
///   ghost (`omega[-1] = omega[1]`), folding the ghost into a doubled
///   off-diagonal coefficient. These rows sum against the trapezoid weights
///   exactly like the interior stencil, which is what makes the mean of
///   vorticity a discrete invariant.
/// - `StressFree`: Dirichlet rows pinning wall vorticity (to zero at solve
///   time).
/// - `NoSlip`: structurally identical Dirichlet rows; the wall values are
///   chosen per step by the influence-matrix method inside the stepper.
pub fn apply_vorticity_bc(
    bands: &mut TridiagBands,
    bc: BoundaryCondition,
    dy: f64,
    a: f64,
    k: f64,
) {
    let ny = bands.diag.len();
    let dy2 = dy * dy;
    match bc {
        BoundaryCondition::DiffusionFree => {
            bands.diag[0] = Complex64::new(1.0 + a * (2.0 / dy2 + k * k), 0.0);
            bands.sup[0] = Complex64::new(-2.0 * a / dy2, 0.0);
            bands.diag[ny - 1] = Complex64::new(1.0 + a * (2.0 / dy2 + k * k), 0.0);
            bands.sub[ny - 2] = Complex64::new(-2.0 * a / dy2, 0.0);
        }
        BoundaryCondition::StressFree | BoundaryCondition::NoSlip => {
            bands.diag[0] = Complex64::new(1.0, 0.0);
            bands.sup[0] = ZERO;
            bands.diag[ny - 1] = Complex64::new(1.0, 0.0);
            bands.sub[ny - 2] = ZERO;
        }
    }
}

/// Precomputed influence data for one mode under no-slip: the two homogeneous
/// responses to unit wall vorticity and the inverse of the 2x2 wall-velocity
/// influence matrix.
struct InfluenceMode {
    h_bottom: Vec<Complex64>,
    h_top: Vec<Complex64>,
    m_inv: [[Complex64; 2]; 2],
}

/// Channel solver: owns the transform plans and the per-mode factorizations.
/// Immutable during stepping.
pub struct ChannelSolver {
    cfg: ChannelConfig,
    ft: FourierTransform,
    /// Half of `nu * dt`.
    a: f64,
    kx: Vec<f64>,
    /// Dealias mask: `true` keeps the mode.
    keep: Vec<bool>,
    /// Crank-Nicolson factorizations per mode (`None` for the Euler path).
    cn: Option<Vec<TridiagFactor<Complex64>>>,
    /// Dirichlet Poisson factorizations per mode.
    poisson: Vec<TridiagFactor<Complex64>>,
    influence: Option<Vec<InfluenceMode>>,
    /// Trapezoid weights in y.
    wy: Vec<f64>,
}

impl ChannelSolver {
    /// Builds factorizations for `cfg`. The no-slip influence responses are
    /// precomputed here, once per (grid, nu, dt).
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid;
        let nk = grid.n_modes();
        let dy = grid.dy();
        let ft = FourierTransform::new(grid.nx);
        let a = 0.5 * cfg.nu * cfg.dt;
        let kx: Vec<f64> = (0..nk).map(|m| grid.wavenumber(m)).collect();
        let keep: Vec<bool> = (0..nk).map(|m| !cfg.dealias || m <= grid.nx / 3).collect();

        let poisson = (0..nk)
            .map(|m| {
                let k = kx[m];
                let dy2 = dy * dy;
                let mut sub = vec![Complex64::new(1.0 / dy2, 0.0); grid.ny - 1];
                let mut diag = vec![Complex64::new(-2.0 / dy2 - k * k, 0.0); grid.ny];
                let mut sup = vec![Complex64::new(1.0 / dy2, 0.0); grid.ny - 1];
                diag[0] = Complex64::new(1.0, 0.0);
                sup[0] = ZERO;
                diag[grid.ny - 1] = Complex64::new(1.0, 0.0);
                sub[grid.ny - 2] = ZERO;
                TridiagFactor::new(&sub, &diag, &sup)
            })
            .collect();

        let cn = if cfg.nu > 0.0 {
            Some(
                (0..nk)
                    .map(|m| {
                        let mut bands = assemble_cn_interior(grid.ny, dy, a, kx[m]);
                        apply_vorticity_bc(&mut bands, cfg.bc, dy, a, kx[m]);
                        TridiagFactor::new(&bands.sub, &bands.diag, &bands.sup)
                    })
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };

        let mut solver = ChannelSolver {
            cfg,
            ft,
            a,
            kx,
            keep,
            cn,
            poisson,
            influence: None,
            wy: trapezoid_weights(grid.ny, dy),
        };
        if solver.cfg.bc == BoundaryCondition::NoSlip && solver.cfg.nu > 0.0 {
            solver.influence = Some(solver.build_influence());
        }
        Ok(solver)
    }

    /// Configuration this solver was built for.
    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    /// Grid shorthand.
    pub fn grid(&self) -> ChannelGrid {
        self.cfg.grid
    }

    fn build_influence(&self) -> Vec<InfluenceMode> {
        let grid = self.cfg.grid;
        let ny = grid.ny;
        let nk = grid.n_modes();
        let cn = self.cn.as_ref().expect("viscous path");
        let mut out = Vec::with_capacity(nk);
        for (m, cn_m) in cn.iter().enumerate().take(nk) {
            let mut responses: Vec<(Vec<Complex64>, Complex64, Complex64)> = Vec::with_capacity(2);
            for wall in 0..2 {
                let mut rhs = vec![ZERO; ny];
                rhs[if wall == 0 { 0 } else { ny - 1 }] = Complex64::new(1.0, 0.0);
                cn_m.solve_in_place(&mut rhs);
                let h = rhs;
                let psi = self.solve_poisson_mode(m, &h);
                let (db, dt_) = self.wall_dpsi(m, &psi, &h);
                responses.push((h, -db, -dt_));
            }
            let mut mat = [
                [responses[0].1, responses[1].1],
                [responses[0].2, responses[1].2],
            ];
            if m == 0 {
                // bulk-velocity coupling: gamma^{n+1} depends on the wall
                // vorticity values through the Crank-Nicolson mean-flow update
                let c = Complex64::new(0.5 * self.cfg.nu * self.cfg.dt, 0.0);
                mat[0][0] += c;
                mat[0][1] -= c;
                mat[1][0] += c;
                mat[1][1] -= c;
            }
            let det = mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0];
            let m_inv = [
                [mat[1][1] / det, -mat[0][1] / det],
                [-mat[1][0] / det, mat[0][0] / det],
            ];
            let (h_bottom, _, _) = responses.remove(0);
            let (h_top, _, _) = responses.remove(0);
            out.push(InfluenceMode {
                h_bottom,
                h_top,
                m_inv,
            });
        }
        out
    }

    /// Wraps initial vorticity and bulk velocity into a state at `t = 0`.
    pub fn initial_state(&self, omega0: &Field2D, bulk_velocity: f64) -> Result<ChannelState> {
        let grid = self.cfg.grid;
        if omega0.n_periodic() != grid.nx || omega0.n_transverse() != grid.ny {
            return Err(SolverError::GridMismatch(format!(
                "initial vorticity is {}x{}, grid is {}x{}",
                omega0.n_periodic(),
                omega0.n_transverse(),
                grid.nx,
                grid.ny
            )));
        }
        if !omega0.is_finite() || !bulk_velocity.is_finite() {
            return Err(SolverError::NonFiniteInput("initial state".into()));
        }
        Ok(ChannelState {
            omega_hat: omega0.to_spectral(),
            bulk_velocity,
            t: 0.0,
            step_index: 0,
            palinstrophy_integral: 0.0,
            prev_advection: None,
        })
    }

    /// Solves the Dirichlet Poisson problem `(Dyy - k^2) psi = omega_m`,
    /// `psi = 0` at the walls, for one mode.
    fn solve_poisson_mode(&self, m: usize, omega_m: &[Complex64]) -> Vec<Complex64> {
        let ny = self.cfg.grid.ny;
        let mut rhs = omega_m.to_vec();
        rhs[0] = ZERO;
        rhs[ny - 1] = ZERO;
        self.poisson[m].solve_in_place(&mut rhs);
        rhs
    }

    /// Wall values of `d(psi)/dy` by the half-cell flux stencil
    /// `F_{1/2} -+ (dy/2) omega_wall` (second order, and exact against the
    /// trapezoid/face-difference quadrature pairing).
    fn wall_dpsi(
        &self,
        _m: usize,
        psi: &[Complex64],
        omega_m: &[Complex64],
    ) -> (Complex64, Complex64) {
        let ny = self.cfg.grid.ny;
        let dy = self.cfg.grid.dy();
        let bottom = (psi[1] - psi[0]) / dy - omega_m[0] * (0.5 * dy);
        let top = (psi[ny - 1] - psi[ny - 2]) / dy + omega_m[ny - 1] * (0.5 * dy);
        (bottom, top)
    }

    /// Velocity half-spectra `(u_hat, v_hat, psi_hat)` reconstructed from a
    /// vorticity half-spectrum and bulk velocity.
    fn velocity_hat(
        &self,
        omega_hat: &Array2<Complex64>,
        bulk_velocity: f64,
    ) -> (Array2<Complex64>, Array2<Complex64>, Array2<Complex64>) {
        let grid = self.cfg.grid;
        let (nk, ny) = (grid.n_modes(), grid.ny);
        let dy = grid.dy();
        let mut u = Array2::from_elem((nk, ny), ZERO);
        let mut v = Array2::from_elem((nk, ny), ZERO);
        let mut psi_all = Array2::from_elem((nk, ny), ZERO);
        let mut mode = vec![ZERO; ny];
        for m in 0..nk {
            for (j, w) in mode.iter_mut().enumerate() {
                *w = omega_hat[(m, j)];
            }
            let psi = self.solve_poisson_mode(m, &mode);
            let (db, dt_) = self.wall_dpsi(m, &psi, &mode);
            let ik = Complex64::new(0.0, self.kx[m]);
            u[(m, 0)] = -db;
            u[(m, ny - 1)] = -dt_;
            for j in 1..ny - 1 {
                u[(m, j)] = -(psi[j + 1] - psi[j - 1]) / (2.0 * dy);
            }
            for j in 0..ny {
                v[(m, j)] = ik * psi[j];
                psi_all[(m, j)] = psi[j];
            }
        }
        // bulk flow enters the zeroth mode; unnormalized coefficients carry nx
        let bulk = Complex64::new(bulk_velocity * grid.nx as f64, 0.0);
        for j in 0..ny {
            u[(0, j)] += bulk;
        }
        (u, v, psi_all)
    }

    /// Velocity reconstruction: solves the per-mode Dirichlet Poisson
    /// problems and returns `(u, v)` as physical fields. `v` vanishes at the
    /// walls exactly; the pair is discretely divergence-free to round-off.
    pub fn velocity(&self, state: &ChannelState) -> (Field2D, Field2D) {
        let (u_hat, v_hat, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        let u = Field2D::physical(self.ft.inverse_2d(&u_hat)).expect("grid invariant");
        let v = Field2D::physical(self.ft.inverse_2d(&v_hat)).expect("grid invariant");
        (u, v)
    }

    fn masked(&self, omega_hat: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = omega_hat.clone();
        for (m, keep) in self.keep.iter().enumerate() {
            if !keep {
                for j in 0..self.cfg.grid.ny {
                    out[(m, j)] = ZERO;
                }
            }
        }
        out
    }

    /// Advection field `N = d/dx(u omega) + D_y(v omega)` in spectral form,
    /// plus the largest pointwise speed (for the CFL check).
    fn advection(
        &self,
        omega_hat: &Array2<Complex64>,
        bulk_velocity: f64,
    ) -> (Array2<Complex64>, f64) {
        let grid = self.cfg.grid;
        let (nk, ny) = (grid.n_modes(), grid.ny);
        let dy = grid.dy();
        let om_masked = self.masked(omega_hat);
        let (u_hat, v_hat, _) = self.velocity_hat(&om_masked, bulk_velocity);
        let om_p = self.ft.inverse_2d(&om_masked);
        let u_p = self.ft.inverse_2d(&u_hat);
        let v_p = self.ft.inverse_2d(&v_hat);

        let mut max_speed = 0.0_f64;
        for v in u_p.iter().chain(v_p.iter()) {
            max_speed = max_speed.max(v.abs());
        }

        let mut flux_x = Array2::zeros((grid.nx, ny));
        let mut flux_y = Array2::zeros((grid.nx, ny));
        for i in 0..grid.nx {
            for j in 0..ny {
                flux_x[(i, j)] = u_p[(i, j)] * om_p[(i, j)];
                flux_y[(i, j)] = v_p[(i, j)] * om_p[(i, j)];
            }
        }
        let fx = self.ft.forward_2d(&flux_x);
        let fy = self.ft.forward_2d(&flux_y);

        let mut n = Array2::from_elem((nk, ny), ZERO);
        for m in 0..nk {
            if !self.keep[m] {
                continue;
            }
            let ik = Complex64::new(0.0, self.kx[m]);
            // d/dx of the horizontal flux, spectrally
            for j in 0..ny {
                n[(m, j)] = ik * fx[(m, j)];
            }
            // D_y of the vertical flux: centered inside, odd wall extension
            // (the flux vanishes at walls, so D_y there is F[1]/dy)
            n[(m, 0)] += fy[(m, 1)] / dy;
            for j in 1..ny - 1 {
                n[(m, j)] += (fy[(m, j + 1)] - fy[(m, j - 1)]) / (2.0 * dy);
            }
            n[(m, ny - 1)] -= fy[(m, ny - 2)] / dy;
        }
        (n, max_speed)
    }

    /// One Crank-Nicolson update with a given explicit advection field.
    /// Returns the new vorticity spectrum and bulk velocity.
    fn implicit_update(
        &self,
        omega_hat: &Array2<Complex64>,
        advection: &Array2<Complex64>,
        bulk_velocity: f64,
    ) -> (Array2<Complex64>, f64) {
        let grid = self.cfg.grid;
        let (nk, ny) = (grid.n_modes(), grid.ny);
        let nx_f = grid.nx as f64;
        let dt = self.cfg.dt;
        let nu = self.cfg.nu;
        let dy = grid.dy();
        let dy2 = dy * dy;

        let wall_mean_bottom = omega_hat[(0, 0)].re / nx_f;
        let wall_mean_top = omega_hat[(0, ny - 1)].re / nx_f;
        let gamma_known = bulk_velocity - 0.5 * nu * dt * (wall_mean_top - wall_mean_bottom);

        let cn = match &self.cn {
            None => {
                // Euler path: pure transport, no boundary rows
                let mut out = omega_hat.clone();
                for m in 0..nk {
                    for j in 0..ny {
                        out[(m, j)] -= advection[(m, j)] * dt;
                    }
                }
                return (out, bulk_velocity);
            }
            Some(cn) => cn,
        };

        let mut out = Array2::from_elem((nk, ny), ZERO);
        let mut rhs = vec![ZERO; ny];
        for m in 0..nk {
            let k = self.kx[m];
            let k2 = k * k;
            for j in 1..ny - 1 {
                let lap = (omega_hat[(m, j + 1)] - omega_hat[(m, j)] * 2.0 + omega_hat[(m, j - 1)])
                    / dy2
                    - omega_hat[(m, j)] * k2;
                rhs[j] = omega_hat[(m, j)] + lap * self.a - advection[(m, j)] * dt;
            }
            match self.cfg.bc {
                BoundaryCondition::DiffusionFree => {
                    let lap0 = (omega_hat[(m, 1)] - omega_hat[(m, 0)]) * (2.0 / dy2)
                        - omega_hat[(m, 0)] * k2;
                    let lap1 = (omega_hat[(m, ny - 2)] - omega_hat[(m, ny - 1)]) * (2.0 / dy2)
                        - omega_hat[(m, ny - 1)] * k2;
                    rhs[0] = omega_hat[(m, 0)] + lap0 * self.a - advection[(m, 0)] * dt;
                    rhs[ny - 1] =
                        omega_hat[(m, ny - 1)] + lap1 * self.a - advection[(m, ny - 1)] * dt;
                }
                BoundaryCondition::StressFree | BoundaryCondition::NoSlip => {
                    rhs[0] = ZERO;
                    rhs[ny - 1] = ZERO;
                }
            }
            cn[m].solve_in_place(&mut rhs);
            for j in 0..ny {
                out[(m, j)] = rhs[j];
            }
        }

        if let Some(influence) = &self.influence {
            for m in 0..nk {
                let mut mode = vec![ZERO; ny];
                for (j, w) in mode.iter_mut().enumerate() {
                    *w = out[(m, j)];
                }
                let psi = self.solve_poisson_mode(m, &mode);
                let (db, dt_) = self.wall_dpsi(m, &psi, &mode);
                let mut u_bottom = -db;
                let mut u_top = -dt_;
                if m == 0 {
                    let bulk = Complex64::new(gamma_known * nx_f, 0.0);
                    u_bottom += bulk;
                    u_top += bulk;
                }
                let inf = &influence[m];
                let c_bottom = inf.m_inv[0][0] * (-u_bottom) + inf.m_inv[0][1] * (-u_top);
                let c_top = inf.m_inv[1][0] * (-u_bottom) + inf.m_inv[1][1] * (-u_top);
                for j in 0..ny {
                    out[(m, j)] += c_bottom * inf.h_bottom[j] + c_top * inf.h_top[j];
                }
            }
        }

        let new_bottom = out[(0, 0)].re / nx_f;
        let new_top = out[(0, ny - 1)].re / nx_f;
        let gamma_new = gamma_known - 0.5 * nu * dt * (new_top - new_bottom);
        (out, gamma_new)
    }

    /// Advances one step. Refuses CFL violations and aborts on non-finite
    /// values rather than continuing silently.
    pub fn step(&self, state: &ChannelState) -> Result<ChannelState> {
        let grid = self.cfg.grid;
        let dt = self.cfg.dt;
        let (n_now, max_speed) = self.advection(&state.omega_hat, state.bulk_velocity);
        let cfl = max_speed * dt / grid.dx().min(grid.dy());
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
                // Heun startup: full predictor step, then trapezoidal average
                let (omega_star, gamma_star) =
                    self.implicit_update(&state.omega_hat, &n_now, state.bulk_velocity);
                let (n_star, _) = self.advection(&omega_star, gamma_star);
                let mut n = n_now.clone();
                for (dst, s) in n.iter_mut().zip(n_star.iter()) {
                    *dst = (*dst + *s) * 0.5;
                }
                n
            }
        };

        let (omega_new, gamma_new) =
            self.implicit_update(&state.omega_hat, &n_ab, state.bulk_velocity);
        if omega_new
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
            || !gamma_new.is_finite()
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

        Ok(ChannelState {
            omega_hat: omega_new,
            bulk_velocity: gamma_new,
            t: state.t + dt,
            step_index: state.step_index + 1,
            palinstrophy_integral: palinstrophy,
            prev_advection: Some(n_now),
        })
    }

    /// Runs to `t_end` (which must be an integer number of steps away),
    /// recording diagnostics at step 0, every `diag_stride` steps, and the
    /// final step.
    pub fn run(
        &self,
        state0: ChannelState,
        t_end: f64,
        diag_stride: usize,
    ) -> Result<(ChannelState, Vec<DiagnosticsRecord>)> {
        let mut records = Vec::new();
        let state = self.run_with(state0, t_end, diag_stride, |_, rec| {
            records.push(rec.clone())
        })?;
        Ok((state, records))
    }

    /// [`ChannelSolver::run`] with a caller-supplied observer invoked at every
    /// recorded step.
    pub fn run_with(
        &self,
        state0: ChannelState,
        t_end: f64,
        diag_stride: usize,
        mut observer: impl FnMut(&ChannelState, &DiagnosticsRecord),
    ) -> Result<ChannelState> {
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

    /// Mode weight for Parseval sums over the half-spectrum.
    fn mode_weight(&self, m: usize) -> f64 {
        if m == 0 || m == self.cfg.grid.nx / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// `int int f^2` for a half-spectrum field (trapezoid in y, exact in x).
    fn norm_squared(&self, f_hat: &Array2<Complex64>) -> f64 {
        let grid = self.cfg.grid;
        let nx2 = (grid.nx * grid.nx) as f64;
        let mut total = 0.0;
        for m in 0..grid.n_modes() {
            let mut s = 0.0;
            for j in 0..grid.ny {
                s += self.wy[j] * f_hat[(m, j)].norm_sqr();
            }
            total += self.mode_weight(m) * s / nx2;
        }
        grid.lx * total
    }

    /// `int int |grad f|^2` in the exact discrete Dirichlet form paired with
    /// the Crank-Nicolson wall rows: face differences in y, `k^2` in x.
    fn grad_norm_squared(&self, f_hat: &Array2<Complex64>) -> f64 {
        let grid = self.cfg.grid;
        let dy = grid.dy();
        let nx2 = (grid.nx * grid.nx) as f64;
        let mut total = 0.0;
        for m in 0..grid.n_modes() {
            let mut s = 0.0;
            for j in 0..grid.ny - 1 {
                s += (f_hat[(m, j + 1)] - f_hat[(m, j)]).norm_sqr() / dy;
            }
            let k2 = self.kx[m] * self.kx[m];
            for j in 0..grid.ny {
                s += k2 * self.wy[j] * f_hat[(m, j)].norm_sqr();
            }
            total += self.mode_weight(m) * s / nx2;
        }
        grid.lx * total
    }

    /// Domain-averaged vorticity.
    pub fn mean_vorticity(&self, state: &ChannelState) -> f64 {
        let grid = self.cfg.grid;
        let mut s = 0.0;
        for j in 0..grid.ny {
            s += self.wy[j] * state.omega_hat[(0, j)].re;
        }
        // x-mean of the zeroth coefficient is coeff/nx; the y-trapezoid covers
        // a unit height, so the area average needs no further division
        s / grid.nx as f64
    }

    /// L^p norm of vorticity (physical values, trapezoid in y, exact mean in x).
    pub fn lp_norm(&self, state: &ChannelState, p: f64) -> f64 {
        let grid = self.cfg.grid;
        let om = self.ft.inverse_2d(&state.omega_hat);
        let dx = grid.lx / grid.nx as f64;
        let mut s = 0.0;
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                s += om[(i, j)].abs().powf(p) * self.wy[j] * dx;
            }
        }
        s.powf(1.0 / p)
    }

    /// Half the squared L2 norm of vorticity.
    pub fn enstrophy(&self, state: &ChannelState) -> f64 {
        0.5 * self.norm_squared(&state.omega_hat)
    }

    /// Kinetic energy `0.5 int |u|^2` of the reconstructed velocity.
    pub fn energy(&self, state: &ChannelState) -> f64 {
        let (u, v, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        0.5 * (self.norm_squared(&u) + self.norm_squared(&v))
    }

    /// Largest pointwise speed of the reconstructed velocity.
    pub fn max_speed(&self, state: &ChannelState) -> f64 {
        let (u_hat, v_hat, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        let u = self.ft.inverse_2d(&u_hat);
        let v = self.ft.inverse_2d(&v_hat);
        u.iter()
            .chain(v.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest |u| on the two walls and in the whole domain, for the no-slip
    /// influence-matrix verification.
    pub fn wall_speed(&self, state: &ChannelState) -> (f64, f64) {
        let grid = self.cfg.grid;
        let (u_hat, _, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        let u = self.ft.inverse_2d(&u_hat);
        let mut wall = 0.0_f64;
        let mut global = 0.0_f64;
        for i in 0..grid.nx {
            wall = wall.max(u[(i, 0)].abs()).max(u[(i, grid.ny - 1)].abs());
            for j in 0..grid.ny {
                global = global.max(u[(i, j)].abs());
            }
        }
        (wall, global)
    }

    /// Largest discrete divergence `d/dx u + D_y v`, evaluated with the same
    /// stencils the reconstruction uses (zero to round-off by construction).
    pub fn divergence_max(&self, state: &ChannelState) -> f64 {
        let grid = self.cfg.grid;
        let (nk, ny) = (grid.n_modes(), grid.ny);
        let dy = grid.dy();
        let (u_hat, v_hat, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        let mut div = Array2::from_elem((nk, ny), ZERO);
        for m in 0..nk {
            let ik = Complex64::new(0.0, self.kx[m]);
            for j in 0..ny {
                div[(m, j)] = ik * u_hat[(m, j)];
            }
            // matching wall stencil: half-cell flux difference corrected by
            // the wall second derivative of v (= ik * omega_wall since psi
            // vanishes there)
            div[(m, 0)] +=
                (v_hat[(m, 1)] - v_hat[(m, 0)]) / dy - ik * state.omega_hat[(m, 0)] * (0.5 * dy);
            for j in 1..ny - 1 {
                div[(m, j)] += (v_hat[(m, j + 1)] - v_hat[(m, j - 1)]) / (2.0 * dy);
            }
            div[(m, ny - 1)] += (v_hat[(m, ny - 1)] - v_hat[(m, ny - 2)]) / dy
                + ik * state.omega_hat[(m, ny - 1)] * (0.5 * dy);
        }
        let d = self.ft.inverse_2d(&div);
        d.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Reconstructed wall derivative of the x-mean vorticity using the
    /// one-sided second-order stencil (a diagnostic of the diffusion-free
    /// rows; converges to zero at second order).
    pub fn one_sided_wall_domega(&self, state: &ChannelState) -> (f64, f64) {
        let grid = self.cfg.grid;
        let ny = grid.ny;
        let dy = grid.dy();
        let om = self.ft.inverse_2d(&state.omega_hat);
        let mut bottom = 0.0_f64;
        let mut top = 0.0_f64;
        for i in 0..grid.nx {
            let b = (-3.0 * om[(i, 0)] + 4.0 * om[(i, 1)] - om[(i, 2)]) / (2.0 * dy);
            let t = (3.0 * om[(i, ny - 1)] - 4.0 * om[(i, ny - 2)] + om[(i, ny - 3)]) / (2.0 * dy);
            bottom = bottom.max(b.abs());
            top = top.max(t.abs());
        }
        (bottom, top)
    }

    /// Boundary work term `2 nu contour_integral(D(u)n . u)`. On flat walls
    /// with impermeability this reduces to `nu * (int_{y=0} omega u dx -
    /// int_{y=1} omega u dx)`; zero to round-off under no-slip (u = 0) and
    /// stress-free (omega = 0).
    pub fn boundary_stress_work(&self, state: &ChannelState) -> f64 {
        let grid = self.cfg.grid;
        let ny = grid.ny;
        let nx2 = (grid.nx * grid.nx) as f64;
        let (u_hat, _, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        let mut bottom = 0.0;
        let mut top = 0.0;
        for m in 0..grid.n_modes() {
            let w = self.mode_weight(m) / nx2;
            bottom += w * (state.omega_hat[(m, 0)] * u_hat[(m, 0)].conj()).re;
            top += w * (state.omega_hat[(m, ny - 1)] * u_hat[(m, ny - 1)].conj()).re;
        }
        self.cfg.nu * grid.lx * (bottom - top)
    }

    /// Bulk dissipation `2 nu int |D(u)|^2` with the strain tensor evaluated
    /// spectrally in x and by second-order differences in y (one-sided at the
    /// walls).
    pub fn bulk_dissipation(&self, state: &ChannelState) -> f64 {
        let grid = self.cfg.grid;
        let (nk, ny) = (grid.n_modes(), grid.ny);
        let dy = grid.dy();
        let (u_hat, v_hat, _) = self.velocity_hat(&state.omega_hat, state.bulk_velocity);
        let dy_of = |f: &Array2<Complex64>, m: usize, j: usize| -> Complex64 {
            if j == 0 {
                (f[(m, 0)] * (-3.0) + f[(m, 1)] * 4.0 - f[(m, 2)]) / (2.0 * dy)
            } else if j == ny - 1 {
                (f[(m, ny - 1)] * 3.0 - f[(m, ny - 2)] * 4.0 + f[(m, ny - 3)]) / (2.0 * dy)
            } else {
                (f[(m, j + 1)] - f[(m, j - 1)]) / (2.0 * dy)
            }
        };
        let mut d11 = Array2::from_elem((nk, ny), ZERO);
        let mut d22 = Array2::from_elem((nk, ny), ZERO);
        let mut d12 = Array2::from_elem((nk, ny), ZERO);
        for m in 0..nk {
            let ik = Complex64::new(0.0, self.kx[m]);
            for j in 0..ny {
                d11[(m, j)] = ik * u_hat[(m, j)];
                d22[(m, j)] = dy_of(&v_hat, m, j);
                d12[(m, j)] = (dy_of(&u_hat, m, j) + ik * v_hat[(m, j)]) * 0.5;
            }
        }
        2.0 * self.cfg.nu
            * (self.norm_squared(&d11) + self.norm_squared(&d22) + 2.0 * self.norm_squared(&d12))
    }

    /// Full diagnostics row for a state.
    pub fn diagnostics_record(&self, state: &ChannelState) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t: state.t,
            enstrophy: self.enstrophy(state),
            palinstrophy_integral: state.palinstrophy_integral,
            energy: self.energy(state),
            mean_vorticity: self.mean_vorticity(state),
            l1: self.lp_norm(state, 1.0),
            l2: self.lp_norm(state, 2.0),
            l4: self.lp_norm(state, 4.0),
            circ_inner: None,
            circ_outer: None,
            boundary_stress_work: Some(self.boundary_stress_work(state)),
            bulk_dissipation: Some(self.bulk_dissipation(state)),
        }
    }
}

/// Smooth wall-compatible default initial vorticity
/// `omega0(x, y) = cos(pi y) (1 + 0.5 cos(2 pi x / Lx))`: its wall-normal
/// derivative vanishes at both walls, so viscosity sweeps start without an
/// initial layer.
pub fn compatible_initial_condition(grid: ChannelGrid) -> Field2D {
    Field2D::from_index_fn(grid.nx, grid.ny, |i, j| {
        let x = grid.x(i);
        let y = grid.y(j);
        (std::f64::consts::PI * y).cos()
            * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * x / grid.lx).cos())
    })
    .expect("grid invariant")
}

/// Shear-profile initial vorticity `omega0 = -U'(y)` for the transient-growth
/// example (x-independent; pair with zero bulk velocity since the profile has
/// zero net flux).
pub fn shear_initial_condition(grid: ChannelGrid) -> Field2D {
    Field2D::from_index_fn(grid.nx, grid.ny, |_, j| {
        -crate::diagnostics::shear_profile_slope(grid.y(j))
    })
    .expect("grid invariant")
}
