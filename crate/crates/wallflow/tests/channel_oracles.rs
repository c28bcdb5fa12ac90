//! Oracle tests for the channel solver: x-independent runs reduce to 1D
//! diffusion checked against a dense replication and the exponential of the
//! discrete generator; velocity reconstruction is checked against separable
//! closed forms; the influence matrix is checked by its defining property.

mod common;

use common::{apply, expm, max_abs_diff, DenseLu};
use ndarray::Array2;
use std::f64::consts::PI;
use wallflow::channel2d::{
    compatible_initial_condition, ChannelConfig, ChannelGrid, ChannelSolver,
};
use wallflow::field::Field2D;
use wallflow::BoundaryCondition;

fn solver(nx: usize, ny: usize, lx: f64, nu: f64, dt: f64, bc: BoundaryCondition) -> ChannelSolver {
    ChannelSolver::new(ChannelConfig {
        nu,
        dt,
        bc,
        dealias: true,
        grid: ChannelGrid::new(nx, ny, lx).unwrap(),
    })
    .unwrap()
}

/// Dense replication of one Crank-Nicolson mode system (k = 0), wall rows
/// matching the solver's ghost conventions.
fn dense_mode_step(
    bc: BoundaryCondition,
    ny: usize,
    dy: f64,
    a: f64,
    w: &[f64],
    lu: &DenseLu,
) -> Vec<f64> {
    let dy2 = dy * dy;
    let mut rhs = vec![0.0; ny];
    for j in 1..ny - 1 {
        rhs[j] = w[j] + a * (w[j + 1] - 2.0 * w[j] + w[j - 1]) / dy2;
    }
    match bc {
        BoundaryCondition::DiffusionFree => {
            rhs[0] = w[0] + a * (w[1] - w[0]) * 2.0 / dy2;
            rhs[ny - 1] = w[ny - 1] + a * (w[ny - 2] - w[ny - 1]) * 2.0 / dy2;
        }
        _ => {
            rhs[0] = 0.0;
            rhs[ny - 1] = 0.0;
        }
    }
    lu.solve(&rhs)
}

fn dense_mode_lhs(bc: BoundaryCondition, ny: usize, dy: f64, a: f64) -> Array2<f64> {
    let dy2 = dy * dy;
    let mut lhs = Array2::<f64>::zeros((ny, ny));
    for j in 1..ny - 1 {
        lhs[(j, j - 1)] = -a / dy2;
        lhs[(j, j)] = 1.0 + 2.0 * a / dy2;
        lhs[(j, j + 1)] = -a / dy2;
    }
    match bc {
        BoundaryCondition::DiffusionFree => {
            lhs[(0, 0)] = 1.0 + 2.0 * a / dy2;
            lhs[(0, 1)] = -2.0 * a / dy2;
            lhs[(ny - 1, ny - 1)] = 1.0 + 2.0 * a / dy2;
            lhs[(ny - 1, ny - 2)] = -2.0 * a / dy2;
        }
        _ => {
            lhs[(0, 0)] = 1.0;
            lhs[(ny - 1, ny - 1)] = 1.0;
        }
    }
    lhs
}

/// Generator of the x-independent semi-discrete diffusion system.
fn dense_mode_generator(bc: BoundaryCondition, ny: usize, dy: f64, nu: f64) -> Array2<f64> {
    let c = nu / (dy * dy);
    let mut a = Array2::<f64>::zeros((ny, ny));
    for j in 1..ny - 1 {
        a[(j, j - 1)] = c;
        a[(j, j)] = -2.0 * c;
        a[(j, j + 1)] = c;
    }
    if bc == BoundaryCondition::DiffusionFree {
        a[(0, 0)] = -2.0 * c;
        a[(0, 1)] = 2.0 * c;
        a[(ny - 1, ny - 1)] = -2.0 * c;
        a[(ny - 1, ny - 2)] = 2.0 * c;
    }
    a
}

/// Runs an x-independent profile through the full 2D stepper and returns the
/// final physical field (advection vanishes identically for such data).
fn evolve_profile(
    bc: BoundaryCondition,
    profile: impl Fn(f64) -> f64,
    nu: f64,
    dt: f64,
    nsteps: usize,
    ny: usize,
) -> (Array2<f64>, ChannelGrid) {
    let grid = ChannelGrid::new(8, ny, 1.0).unwrap();
    let omega0 = Field2D::from_index_fn(8, ny, |_, j| profile(grid.y(j))).unwrap();
    let s = solver(8, ny, 1.0, nu, dt, bc);
    let mut state = s.initial_state(&omega0, 0.0).unwrap();
    for _ in 0..nsteps {
        state = s.step(&state).unwrap();
    }
    (state.omega().to_physical(), grid)
}

#[test]
fn neumann_mode_matches_dense_replication_and_semigroup() {
    let (nu, dt, nsteps, ny) = (0.1, 1e-3, 100, 65);
    let grid = ChannelGrid::new(8, ny, 1.0).unwrap();
    let dy = grid.dy();
    let a = 0.5 * nu * dt;
    let profile = |y: f64| (PI * y).cos();

    let (field, _) = evolve_profile(
        BoundaryCondition::DiffusionFree,
        profile,
        nu,
        dt,
        nsteps,
        ny,
    );

    // dense replication of the same scheme
    let lu = DenseLu::new(dense_mode_lhs(BoundaryCondition::DiffusionFree, ny, dy, a));
    let mut w: Vec<f64> = (0..ny).map(|j| profile(grid.y(j))).collect();
    for _ in 0..nsteps {
        w = dense_mode_step(BoundaryCondition::DiffusionFree, ny, dy, a, &w, &lu);
    }
    let mut worst = 0.0_f64;
    for i in 0..8 {
        for j in 0..ny {
            worst = worst.max((field[(i, j)] - w[j]).abs());
        }
    }
    assert!(worst < 1e-12, "dense replication gap {worst:.3e}");

    // independent semigroup reference
    let t_end = nsteps as f64 * dt;
    let gen =
        dense_mode_generator(BoundaryCondition::DiffusionFree, ny, dy, nu).mapv(|x| x * t_end);
    let w0: Vec<f64> = (0..ny).map(|j| profile(grid.y(j))).collect();
    let reference = apply(&expm(&gen), &w0);
    let gap = max_abs_diff(&w, &reference);
    assert!(gap < 1e-7, "semigroup gap {gap:.3e}");

    // continuum limit: e^{-nu pi^2 t} cos(pi y) up to O(dy^2) in the rate
    let amp = (-nu * PI * PI * t_end).exp();
    let mut cont = 0.0_f64;
    for (j, &wj) in w.iter().enumerate() {
        cont = cont.max((wj - amp * profile(grid.y(j))).abs());
    }
    assert!(cont < 1e-4, "continuum gap {cont:.3e}");
}

#[test]
fn dirichlet_mode_matches_dense_replication_and_semigroup() {
    let (nu, dt, nsteps, ny) = (0.1, 1e-3, 100, 65);
    let grid = ChannelGrid::new(8, ny, 1.0).unwrap();
    let dy = grid.dy();
    let a = 0.5 * nu * dt;
    let profile = |y: f64| (PI * y).sin();

    let (field, _) = evolve_profile(BoundaryCondition::StressFree, profile, nu, dt, nsteps, ny);

    let lu = DenseLu::new(dense_mode_lhs(BoundaryCondition::StressFree, ny, dy, a));
    let mut w: Vec<f64> = (0..ny).map(|j| profile(grid.y(j))).collect();
    for _ in 0..nsteps {
        w = dense_mode_step(BoundaryCondition::StressFree, ny, dy, a, &w, &lu);
    }
    let mut worst = 0.0_f64;
    for i in 0..8 {
        for j in 0..ny {
            worst = worst.max((field[(i, j)] - w[j]).abs());
        }
    }
    assert!(worst < 1e-12, "dense replication gap {worst:.3e}");

    let t_end = nsteps as f64 * dt;
    let gen = dense_mode_generator(BoundaryCondition::StressFree, ny, dy, nu).mapv(|x| x * t_end);
    let w0: Vec<f64> = (0..ny).map(|j| profile(grid.y(j))).collect();
    let reference = apply(&expm(&gen), &w0);
    let gap = max_abs_diff(&w, &reference);
    assert!(gap < 1e-7, "semigroup gap {gap:.3e}");

    let amp = (-nu * PI * PI * t_end).exp();
    let mut cont = 0.0_f64;
    for (j, &wj) in w.iter().enumerate() {
        cont = cont.max((wj - amp * profile(grid.y(j))).abs());
    }
    assert!(cont < 1e-4, "continuum gap {cont:.3e}");
}

#[test]
fn uniform_flow_from_bulk_velocity_alone() {
    let s = solver(16, 33, 1.0, 1e-2, 1e-3, BoundaryCondition::DiffusionFree);
    let omega0 = Field2D::from_index_fn(16, 33, |_, _| 0.0).unwrap();
    let state = s.initial_state(&omega0, 2.5).unwrap();
    let (u, v) = s.velocity(&state);
    let up = u.to_physical();
    let vp = v.to_physical();
    for i in 0..16 {
        for j in 0..33 {
            assert!((up[(i, j)] - 2.5).abs() < 1e-13, "u not uniform");
            assert!(vp[(i, j)].abs() < 1e-13, "v not zero");
        }
    }
    // energy of the uniform stream: half gamma^2 times the channel area
    let rec = s.diagnostics_record(&state);
    assert!((rec.energy - 0.5 * 2.5 * 2.5).abs() < 1e-12);
    assert!(rec.enstrophy == 0.0 && rec.l1 == 0.0 && rec.l2 == 0.0 && rec.l4 == 0.0);
}

#[test]
fn velocity_matches_separable_closed_form() {
    // omega = -(1 + pi^2) sin(pi y) cos(x) on a 2 pi period:
    // psi = sin(pi y) cos(x), u = -pi cos(pi y) cos(x), v = -sin(pi y) sin(x)
    let (nx, ny) = (32, 129);
    let lx = 2.0 * PI;
    let grid = ChannelGrid::new(nx, ny, lx).unwrap();
    let omega0 = Field2D::from_index_fn(nx, ny, |i, j| {
        -(1.0 + PI * PI) * (PI * grid.y(j)).sin() * grid.x(i).cos()
    })
    .unwrap();
    let s = solver(nx, ny, lx, 1e-2, 1e-3, BoundaryCondition::StressFree);
    let state = s.initial_state(&omega0, 0.0).unwrap();
    let (u, v) = s.velocity(&state);
    let up = u.to_physical();
    let vp = v.to_physical();
    let mut worst_u = 0.0_f64;
    let mut worst_v = 0.0_f64;
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = (grid.x(i), grid.y(j));
            worst_u = worst_u.max((up[(i, j)] + PI * (PI * y).cos() * x.cos()).abs());
            worst_v = worst_v.max((vp[(i, j)] + (PI * y).sin() * x.sin()).abs());
        }
    }
    assert!(worst_u < 2e-3, "u closed-form gap {worst_u:.3e}");
    assert!(worst_v < 2e-3, "v closed-form gap {worst_v:.3e}");

    // impermeability is exact, divergence vanishes to round-off scale
    for i in 0..nx {
        assert!(vp[(i, 0)].abs() < 1e-14 && vp[(i, ny - 1)].abs() < 1e-14);
    }
    let div = s.divergence_max(&state);
    assert!(div < 1e-10 * s.max_speed(&state), "divergence {div:.3e}");
}

#[test]
fn mean_mode_velocity_includes_bulk_offset() {
    // omega-hat(k=0) = -pi^2 sin(pi y): psi = sin(pi y), u = -pi cos(pi y) + gamma
    let (nx, ny) = (8, 129);
    let grid = ChannelGrid::new(nx, ny, 1.0).unwrap();
    let gamma = 0.7;
    let omega0 = Field2D::from_index_fn(nx, ny, |_, j| -PI * PI * (PI * grid.y(j)).sin()).unwrap();
    let s = solver(nx, ny, 1.0, 1e-2, 1e-3, BoundaryCondition::StressFree);
    let state = s.initial_state(&omega0, gamma).unwrap();
    let (u, v) = s.velocity(&state);
    let up = u.to_physical();
    let vp = v.to_physical();
    let mut worst = 0.0_f64;
    for i in 0..nx {
        for j in 0..ny {
            let exact = -PI * (PI * grid.y(j)).cos() + gamma;
            worst = worst.max((up[(i, j)] - exact).abs());
            assert!(vp[(i, j)].abs() < 1e-12, "v must vanish for the mean mode");
        }
    }
    assert!(worst < 2e-3, "mean-mode u gap {worst:.3e}");
}

#[test]
fn influence_matrix_pins_wall_velocity() {
    let (nx, ny) = (64, 65);
    let s = solver(nx, ny, 1.0, 1e-2, 5e-4, BoundaryCondition::NoSlip);
    let omega0 = compatible_initial_condition(s.grid());
    let mut state = s.initial_state(&omega0, 0.3).unwrap();
    for _ in 0..100 {
        state = s.step(&state).unwrap();
        let (wall, global) = s.wall_speed(&state);
        assert!(
            wall < 1e-10 * global,
            "wall speed {wall:.3e} vs field scale {global:.3e} at step {}",
            state.step_index
        );
    }
}
