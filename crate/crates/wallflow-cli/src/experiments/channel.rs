//! Channel experiments: a single diagnosed run and the vanishing-viscosity
//! gap sweep against an inviscid reference.

use crate::output::{cfg_err, fmt, write_diagnostics, CliError, RunContext};
use crate::params::{parse_bc, ChannelRunParams, ChannelSweepParams};
use ndarray::Array2;
use std::fs::File;
use wallflow::channel2d::{
    compatible_initial_condition, shear_initial_condition, ChannelConfig, ChannelGrid,
    ChannelSolver,
};
use wallflow::diagnostics::ScalingFit;
use wallflow::field::Field2D;
use wallflow::BoundaryCondition;

/// Resolves a preset name or CSV path into an initial vorticity field.
fn initial_field(selector: &str, grid: ChannelGrid) -> Result<Field2D, CliError> {
    match selector {
        "compatible-channel" => Ok(compatible_initial_condition(grid)),
        "shear" => Ok(shear_initial_condition(grid)),
        "zero" => Ok(Field2D::from_index_fn(grid.nx, grid.ny, |_, _| 0.0)?),
        path => load_field_csv(path, grid),
    }
}

/// Reads an `omega` column from a CSV written in x-outer row order (the
/// layout of `field_final.csv`, so runs can be chained).
fn load_field_csv(path: &str, grid: ChannelGrid) -> Result<Field2D, CliError> {
    let file = File::open(path).map_err(|e| {
        cfg_err(
            &format!(
                "initial condition '{path}' is neither a preset \
                 (compatible-channel, shear, zero) nor a readable CSV file"
            ),
            e,
        )
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let headers = reader.headers().map_err(|e| cfg_err(path, e))?.clone();
    let omega_col = headers
        .iter()
        .position(|h| h == "omega")
        .ok_or_else(|| CliError::Config(format!("{path}: no 'omega' column in {headers:?}")))?;
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    for record in reader.records() {
        let record = record.map_err(|e| cfg_err(path, e))?;
        let cell = record
            .get(omega_col)
            .ok_or_else(|| CliError::Config(format!("{path}: short row {}", values.len() + 2)))?;
        let v: f64 = cell
            .parse()
            .map_err(|e| cfg_err(&format!("{path}: row {}", values.len() + 2), e))?;
        values.push(v);
    }
    if values.len() != grid.nx * grid.ny {
        return Err(CliError::Config(format!(
            "{path}: {} omega values for a {}x{} grid",
            values.len(),
            grid.nx,
            grid.ny
        )));
    }
    Ok(Field2D::from_index_fn(grid.nx, grid.ny, |i, j| {
        values[i * grid.ny + j]
    })?)
}

fn solver(
    nu: f64,
    bc: BoundaryCondition,
    dealias: bool,
    grid: ChannelGrid,
    dt: f64,
) -> Result<ChannelSolver, CliError> {
    Ok(ChannelSolver::new(ChannelConfig {
        nu,
        dt,
        bc,
        dealias,
        grid,
    })?)
}

/// `channel-run`: one diagnosed run; emits the diagnostics series (also on
/// abort, up to the failing step) and the final field with its velocity.
pub fn run(p: &ChannelRunParams, ctx: &RunContext) -> Result<(), CliError> {
    let grid = ChannelGrid::new(p.nx, p.ny, p.lx)?;
    let s = solver(p.nu, parse_bc(&p.bc)?, p.dealias, grid, p.dt)?;
    let omega0 = initial_field(&p.omega0, grid)?;
    let state0 = s.initial_state(&omega0, p.gamma)?;

    let mut records = Vec::new();
    let outcome = s.run_with(state0, p.t_end, p.diag_stride, |_, rec| {
        records.push(rec.clone())
    });
    write_diagnostics(ctx, "diagnostics.csv", &records)?;
    let final_state = outcome?;

    let omega = final_state.omega().to_physical();
    let (u, v) = s.velocity(&final_state);
    let (u, v) = (u.to_physical(), v.to_physical());
    let mut w = ctx.csv("field_final.csv", &["x", "y", "omega", "u", "v"])?;
    for i in 0..p.nx {
        for j in 0..p.ny {
            w.row([
                fmt(grid.x(i)),
                fmt(grid.y(j)),
                fmt(omega[(i, j)]),
                fmt(u[(i, j)]),
                fmt(v[(i, j)]),
            ])?;
        }
    }
    w.finish()?;

    println!(
        "t = {:.6}  enstrophy {}  energy {}  mean vorticity {}",
        final_state.t,
        fmt(s.enstrophy(&final_state)),
        fmt(s.energy(&final_state)),
        fmt(s.mean_vorticity(&final_state)),
    );
    Ok(())
}

/// Final physical vorticity of one sweep member.
fn evolve(
    nu: f64,
    p: &ChannelSweepParams,
    grid: ChannelGrid,
    omega0: &Field2D,
) -> Result<Array2<f64>, CliError> {
    let s = solver(nu, parse_bc(&p.bc)?, p.dealias, grid, p.dt)?;
    let state0 = s.initial_state(omega0, p.gamma)?;
    let final_state = s.run_with(state0, p.t_end, usize::MAX, |_, _| {})?;
    Ok(final_state.omega().to_physical())
}

/// `L^2` distance between two physical fields: exact in x, trapezoid in y.
fn l2_gap(a: &Array2<f64>, b: &Array2<f64>, grid: ChannelGrid) -> f64 {
    let (dy, dx) = (grid.dy(), grid.dx());
    let mut total = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let wy = if j == 0 || j == grid.ny - 1 { 0.5 } else { 1.0 };
            let d = a[(i, j)] - b[(i, j)];
            total += wy * d * d * dx * dy;
        }
    }
    total.sqrt()
}

/// `channel-sweep`: runs the inviscid reference once, then each viscosity in
/// listed order with the same step and initial data, and fits the power law
/// of the final-time vorticity gap.
pub fn sweep(p: &ChannelSweepParams, ctx: &RunContext) -> Result<(), CliError> {
    if p.nu_list.is_empty() {
        return Err(CliError::Config("nu_list must not be empty".into()));
    }
    let grid = ChannelGrid::new(p.nx, p.ny, p.lx)?;
    let omega0 = initial_field(&p.omega0, grid)?;
    let reference = evolve(0.0, p, grid, &omega0)?;

    let mut samples = Vec::new();
    let mut w = ctx.csv("sweep.csv", &["nu", "l2_gap"])?;
    for &nu in &p.nu_list {
        let final_omega = evolve(nu, p, grid, &omega0)?;
        let gap = l2_gap(&final_omega, &reference, grid);
        println!("nu {:<12} final-time vorticity gap {}", fmt(nu), fmt(gap));
        w.row([fmt(nu), fmt(gap)])?;
        samples.push((nu, gap));
    }
    w.finish()?;

    let fit = ScalingFit::from_samples(&samples)?;
    println!(
        "gap ~ nu^{:.4}  (max relative fit residual {:.2e})",
        fit.slope, fit.max_rel_residual
    );
    let mut w = ctx.csv("fit.csv", &["slope", "intercept", "max_rel_residual"])?;
    w.row([
        fmt(fit.slope),
        fmt(fit.intercept),
        fmt(fit.max_rel_residual),
    ])?;
    w.finish()
}
