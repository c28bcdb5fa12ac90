//! Boundary-layer profile experiment: presets of the half-line solve with
//! profile, layer-velocity, and decay-norm artifacts.

use crate::output::{fmt, CliError, RunContext};
use crate::params::BlProfileRunParams;
use wallflow::blprofile::{solve_bl_profile, BlProfileProblem};

fn problem(p: &BlProfileRunParams) -> Result<BlProfileProblem, CliError> {
    let mut problem = match p.preset.as_str() {
        "zero" => BlProfileProblem::quiescent(p.lx, p.nx, p.nz, p.z_max),
        "neumann-flux" => BlProfileProblem::constant_flux(p.lx, p.nx, p.nz, p.z_max, p.flux),
        other => {
            return Err(CliError::Config(format!(
                "unknown profile preset '{other}' (expected zero or neumann-flux)"
            )))
        }
    };
    problem.weight_exponent = p.weight_exponent;
    Ok(problem)
}

/// `blprofile-run`: solves the selected preset and emits the final profile
/// with its reconstructed layer velocity plus the weighted-norm history.
pub fn run(p: &BlProfileRunParams, ctx: &RunContext) -> Result<(), CliError> {
    let problem = problem(p)?;
    let solution = solve_bl_profile(&problem, p.t_end, p.dt)?;

    let u = solution.ubl();
    let mut w = ctx.csv("profile_final.csv", &["x", "z", "omega", "u_bl"])?;
    for i in 0..p.nx {
        let x = i as f64 * p.lx / p.nx as f64;
        for j in 0..p.nz {
            w.row([
                fmt(x),
                fmt(j as f64 * solution.dz),
                fmt(solution.omega[(i, j)]),
                fmt(u[(i, j)]),
            ])?;
        }
    }
    w.finish()?;

    let mut w = ctx.csv("norms.csv", &["t", "weighted_norm"])?;
    for &(t, norm) in &solution.weighted_norm_series {
        w.row([fmt(t), fmt(norm)])?;
    }
    w.finish()?;

    println!(
        "t = {:.6}  max |Omega| {}  weighted norm max {}  source bound {}",
        solution.t_end,
        fmt(solution.max_abs_omega()),
        fmt(solution.weighted_norm_max()),
        fmt(solution.source_bound),
    );
    Ok(())
}
