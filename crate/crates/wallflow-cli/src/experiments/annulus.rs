//! Annulus experiment: one diagnosed run with circulation bookkeeping and a
//! final field dump in polar components.

use crate::output::{fmt, write_diagnostics, CliError, RunContext};
use crate::params::{parse_bc, AnnulusRunParams};
use wallflow::annulus2d::{
    gaussian_vortex_initial_condition, AnnulusConfig, AnnulusGrid, AnnulusSolver,
};
use wallflow::field::Field2D;

fn initial_field(p: &AnnulusRunParams, grid: AnnulusGrid) -> Result<Field2D, CliError> {
    match p.omega0.as_str() {
        "annulus-vortex" => Ok(gaussian_vortex_initial_condition(
            grid,
            p.blob_radius,
            p.blob_angle,
            p.blob_width,
        )?),
        "zero" => Ok(Field2D::from_index_fn(grid.ntheta, grid.nr, |_, _| 0.0)?),
        other => Err(CliError::Config(format!(
            "unknown annulus preset '{other}' (expected annulus-vortex or zero)"
        ))),
    }
}

/// `annulus-run`: one diagnosed run; emits the diagnostics series (also on
/// abort, up to the failing step) and the final vorticity with its polar
/// velocity components.
pub fn run(p: &AnnulusRunParams, ctx: &RunContext) -> Result<(), CliError> {
    let grid = AnnulusGrid::new(p.ntheta, p.nr, p.inner_radius, p.outer_radius)?;
    let s = AnnulusSolver::new(AnnulusConfig {
        nu: p.nu,
        dt: p.dt,
        bc: parse_bc(&p.bc)?,
        dealias: p.dealias,
        grid,
    })?;
    let omega0 = initial_field(p, grid)?;
    let state0 = s.initial_state(&omega0, p.gamma)?;

    let mut records = Vec::new();
    let outcome = s.run_with(state0, p.t_end, p.diag_stride, |_, rec| {
        records.push(rec.clone())
    });
    write_diagnostics(ctx, "diagnostics.csv", &records)?;
    let final_state = outcome?;

    let omega = final_state.omega().to_physical();
    let (u_r, u_theta) = s.velocity(&final_state);
    let (u_r, u_theta) = (u_r.to_physical(), u_theta.to_physical());
    let mut w = ctx.csv(
        "field_final.csv",
        &["theta", "r", "omega", "u_r", "u_theta"],
    )?;
    for i in 0..p.ntheta {
        for j in 0..p.nr {
            w.row([
                fmt(grid.theta(i)),
                fmt(grid.r(j)),
                fmt(omega[(i, j)]),
                fmt(u_r[(i, j)]),
                fmt(u_theta[(i, j)]),
            ])?;
        }
    }
    w.finish()?;

    let (inner, outer) = s.circulations(&final_state);
    println!(
        "t = {:.6}  circulation inner {}  outer {}  total vorticity {}  Stokes residual {}",
        final_state.t,
        fmt(inner),
        fmt(outer),
        fmt(s.total_vorticity(&final_state)),
        fmt(s.stokes_residual(&final_state)),
    );
    Ok(())
}
