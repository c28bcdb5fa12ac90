//! Oracle and invariant tests for the annulus solver: dense checks of the
//! polar Poisson solve, a dense-semigroup reference for axisymmetric
//! diffusion, circulation and Stokes-identity conservation over a nonlinear
//! run, refinement of the potential-flow wall residual, and stationarity of
//! the pure circulation flow.

mod common;

use common::{apply, expm, DenseLu};
use ndarray::Array2;
use std::f64::consts::PI;
use wallflow::annulus2d::{
    gaussian_vortex_initial_condition, potential_flow_bc_residual, AnnulusConfig, AnnulusGrid,
    AnnulusSolver,
};
use wallflow::field::Field2D;
use wallflow::BoundaryCondition;

const INNER: f64 = 1.0;
const OUTER: f64 = 2.0;

fn solver(ntheta: usize, nr: usize, nu: f64, dt: f64, bc: BoundaryCondition) -> AnnulusSolver {
    AnnulusSolver::new(AnnulusConfig {
        nu,
        dt,
        bc,
        dealias: true,
        grid: AnnulusGrid::new(ntheta, nr, INNER, OUTER).unwrap(),
    })
    .unwrap()
}

/// Dense flux-form polar Laplacian minus `m^2/r^2`, Dirichlet rows at both
/// walls, assembled from scratch.
fn dense_poisson(m: usize, nr: usize) -> Array2<f64> {
    let dr = (OUTER - INNER) / (nr - 1) as f64;
    let r = |j: usize| INNER + j as f64 * dr;
    let m2 = (m * m) as f64;
    let mut a = Array2::<f64>::zeros((nr, nr));
    for j in 1..nr - 1 {
        let scale = 1.0 / (r(j) * dr * dr);
        let rf_lo = r(j) - 0.5 * dr;
        let rf_hi = r(j) + 0.5 * dr;
        a[(j, j - 1)] = rf_lo * scale;
        a[(j, j)] = -(rf_lo + rf_hi) * scale - m2 / (r(j) * r(j));
        a[(j, j + 1)] = rf_hi * scale;
    }
    a[(0, 0)] = 1.0;
    a[(nr - 1, nr - 1)] = 1.0;
    a
}

#[test]
fn poisson_eigenfunction_solves_back_to_itself() {
    // lowest axisymmetric Dirichlet eigenpair of the dense interior operator
    // by inverse power iteration; the stream function of that eigenvector
    // must be the eigenvector divided by its eigenvalue
    let (ntheta, nr) = (16, 65);
    let full = dense_poisson(0, nr);
    let mut interior = Array2::<f64>::zeros((nr - 2, nr - 2));
    for i in 0..nr - 2 {
        for j in 0..nr - 2 {
            interior[(i, j)] = full[(i + 1, j + 1)];
        }
    }
    let lu = DenseLu::new(interior.clone());
    let mut v = vec![1.0; nr - 2];
    for _ in 0..80 {
        v = lu.solve(&v);
        let norm = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    let av = apply(&interior, &v);
    let lambda =
        v.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>();
    let residual = av
        .iter()
        .zip(&v)
        .fold(0.0_f64, |m, (ax, x)| m.max((ax - lambda * x).abs()));
    assert!(
        residual < 1e-10,
        "inverse iteration residual {residual:.3e}"
    );

    let s = solver(ntheta, nr, 1e-3, 1e-3, BoundaryCondition::DiffusionFree);
    let omega0 = Field2D::from_index_fn(ntheta, nr, |_, j| {
        if j == 0 || j == nr - 1 {
            0.0
        } else {
            v[j - 1]
        }
    })
    .unwrap();
    let state = s.initial_state(&omega0, 0.0).unwrap();
    let psi = s.streamfunction_hat(&state);
    let mut worst = 0.0_f64;
    for j in 1..nr - 1 {
        let got = psi[(0, j)].re / ntheta as f64;
        worst = worst.max((got - v[j - 1] / lambda).abs());
        assert!(psi[(0, j)].im.abs() < 1e-12);
    }
    assert!(
        worst < 1e-10 / lambda.abs(),
        "eigenfunction stream-function gap {worst:.3e} (lambda = {lambda:.4})"
    );
    assert!(
        (psi[(0, 0)].re, psi[(0, nr - 1)].re) == (0.0, 0.0),
        "wall values must be pinned"
    );
}

#[test]
fn poisson_mode_one_matches_dense_lu() {
    let (ntheta, nr) = (16, 65);
    let s = solver(ntheta, nr, 1e-3, 1e-3, BoundaryCondition::DiffusionFree);
    let grid = s.grid();
    // smooth radial envelope vanishing at the walls, azimuthal mode one
    let g = |r: f64| ((r - INNER) * (OUTER - r)).powi(2) * (1.5 * r).sin();
    let omega0 =
        Field2D::from_index_fn(ntheta, nr, |i, j| g(grid.r(j)) * grid.theta(i).cos()).unwrap();
    let state = s.initial_state(&omega0, 0.0).unwrap();
    let psi = s.streamfunction_hat(&state);

    let lu = DenseLu::new(dense_poisson(1, nr));
    // forward transform of cos(theta) puts ntheta/2 in mode one
    let mut rhs: Vec<f64> = (0..nr)
        .map(|j| g(grid.r(j)) * ntheta as f64 / 2.0)
        .collect();
    rhs[0] = 0.0;
    rhs[nr - 1] = 0.0;
    let reference = lu.solve(&rhs);
    let scale = reference.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0_f64;
    for j in 0..nr {
        worst = worst.max((psi[(1, j)].re - reference[j]).abs());
        worst = worst.max(psi[(1, j)].im.abs());
    }
    assert!(
        worst < 1e-12 * scale.max(1.0),
        "mode-one dense gap {worst:.3e} against scale {scale:.3e}"
    );
}

#[test]
fn axisymmetric_diffusion_matches_dense_semigroup() {
    // wall-flat axisymmetric data evolves by pure radial diffusion; compare
    // against the exponential of a dense generator assembled from scratch
    let (ntheta, nr) = (8, 65);
    let (nu, dt, nsteps) = (1e-2, 1e-3, 100usize);
    let s = solver(ntheta, nr, nu, dt, BoundaryCondition::DiffusionFree);
    let grid = s.grid();
    let profile = |r: f64| (PI * (r - INNER) / (OUTER - INNER)).cos();
    let omega0 = Field2D::from_index_fn(ntheta, nr, |_, j| profile(grid.r(j))).unwrap();
    let mut state = s.initial_state(&omega0, 0.0).unwrap();
    for _ in 0..nsteps {
        state = s.step(&state).unwrap();
    }

    let dr = grid.dr();
    let r = |j: usize| INNER + j as f64 * dr;
    let mut gen = Array2::<f64>::zeros((nr, nr));
    for j in 1..nr - 1 {
        let scale = nu / (r(j) * dr * dr);
        gen[(j, j - 1)] = (r(j) - 0.5 * dr) * scale;
        gen[(j, j)] = -2.0 * r(j) * scale;
        gen[(j, j + 1)] = (r(j) + 0.5 * dr) * scale;
    }
    // mirrored-flux wall rows: the wall Laplacian sees only the interior face
    gen[(0, 0)] = -2.0 * (r(0) + 0.5 * dr) * nu / (r(0) * dr * dr);
    gen[(0, 1)] = 2.0 * (r(0) + 0.5 * dr) * nu / (r(0) * dr * dr);
    gen[(nr - 1, nr - 1)] = -2.0 * (r(nr - 1) - 0.5 * dr) * nu / (r(nr - 1) * dr * dr);
    gen[(nr - 1, nr - 2)] = 2.0 * (r(nr - 1) - 0.5 * dr) * nu / (r(nr - 1) * dr * dr);

    let t_end = nsteps as f64 * dt;
    let w0: Vec<f64> = (0..nr).map(|j| profile(r(j))).collect();
    let reference = apply(&expm(&gen.mapv(|x| x * t_end)), &w0);

    let field = state.omega().to_physical();
    let mut worst = 0.0_f64;
    for i in 0..ntheta {
        for j in 0..nr {
            worst = worst.max((field[(i, j)] - reference[j]).abs());
        }
    }
    assert!(worst < 1e-6, "dense semigroup gap {worst:.3e}");
}

#[test]
fn blob_run_conserves_circulation_and_stokes_identity() {
    let s = solver(64, 97, 1e-3, 5e-3, BoundaryCondition::DiffusionFree);
    let grid = s.grid();
    let omega0 = gaussian_vortex_initial_condition(grid, 1.5, 0.0, 0.08).unwrap();
    let state0 = s.initial_state(&omega0, 1.0).unwrap();
    let (circ0, _) = s.circulations(&state0);

    let mut checked = 0usize;
    s.run_with(state0, 1.0, 20, |state, rec| {
        let (ci, co) = s.circulations(state);
        assert!(
            (ci - circ0).abs() < 1e-6 * circ0.abs(),
            "inner circulation drift {:.3e} at t = {}",
            ci - circ0,
            state.t
        );
        let total = s.total_vorticity(state);
        let scale = total.abs().max(ci.abs() + co.abs());
        let residual = s.stokes_residual(state);
        assert!(
            residual <= 1e-8 * scale,
            "Stokes residual {residual:.3e} vs scale {scale:.3e} at t = {}",
            state.t
        );
        assert!(rec.circ_inner.is_some() && rec.circ_outer.is_some());
        assert!(rec.boundary_stress_work.is_none() && rec.bulk_dissipation.is_none());
        checked += 1;
    })
    .unwrap();
    assert!(checked >= 10, "expected sampled records, got {checked}");
}

#[test]
fn potential_flow_residual_refines_at_third_order() {
    // the analytic field is harmonic, so the residual is pure truncation of
    // the third-order one-sided wall stencils and must shrink ~8x per halving
    let mut residuals = Vec::new();
    for nr in [64usize, 128, 256] {
        let grid = AnnulusGrid::new(16, nr, INNER, OUTER).unwrap();
        residuals.push(potential_flow_bc_residual(1.0, INNER, grid).unwrap());
    }
    assert!(
        residuals[2] < 1e-3,
        "wall residual {:.3e} at the finest grid",
        residuals[2]
    );
    for pair in residuals.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(
            (6.5..=9.5).contains(&ratio),
            "refinement factor {ratio:.2} from residuals {residuals:?}"
        );
    }
}

#[test]
fn pure_circulation_flow_stays_stationary() {
    for bc in [
        BoundaryCondition::DiffusionFree,
        BoundaryCondition::StressFree,
    ] {
        let s = solver(32, 65, 1e-3, 5e-3, bc);
        let grid = s.grid();
        let omega0 = Field2D::from_index_fn(32, 65, |_, _| 0.0).unwrap();
        let state0 = s.initial_state(&omega0, 1.0).unwrap();
        let final_state = s
            .run_with(state0, 2.0, 40, |state, rec| {
                assert!(
                    s.max_vorticity(state) < 1e-13,
                    "{bc}: vorticity appeared at t = {}",
                    state.t
                );
                let gamma = rec.circ_inner.expect("annulus records carry circulations");
                assert!((gamma - 1.0).abs() < 1e-10, "{bc}: circulation {gamma}");
            })
            .unwrap();
        let (u_r, u_t) = s.velocity(&final_state);
        let ur_p = u_r.to_physical();
        let ut_p = u_t.to_physical();
        for i in 0..32 {
            for j in 0..65 {
                let exact = 1.0 / (2.0 * PI * grid.r(j));
                assert!(ur_p[(i, j)].abs() < 1e-13, "{bc}: radial flow appeared");
                assert!(
                    (ut_p[(i, j)] - exact).abs() < 1e-10,
                    "{bc}: swirl {} vs {exact}",
                    ut_p[(i, j)]
                );
            }
        }
    }
}

#[test]
fn viscous_pinned_velocity_walls_are_refused() {
    let config = AnnulusConfig {
        nu: 1e-3,
        dt: 1e-3,
        bc: BoundaryCondition::NoSlip,
        dealias: true,
        grid: AnnulusGrid::new(16, 17, INNER, OUTER).unwrap(),
    };
    assert!(AnnulusSolver::new(config).is_err());
}
