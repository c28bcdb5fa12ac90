//! Heat-model experiments: the corrector comparison at one viscosity and the
//! amplitude-versus-viscosity sweep.

use crate::output::{fmt, fmt_opt, CliError, RunContext};
use crate::params::{parse_bc_selection, HeatCompareParams, HeatSweepParams};
use wallflow::diagnostics::ScalingFit;
use wallflow::heat1d::{
    corrector_amplitude, decaying_exponential, outer_reference, solve_heat1d, Field1D, Heat1DConfig,
};
use wallflow::BoundaryCondition;

fn slot(bc: BoundaryCondition) -> usize {
    BoundaryCondition::ALL
        .iter()
        .position(|b| *b == bc)
        .expect("ALL is exhaustive")
}

/// `heat-compare`: solve the wall layer for each selected condition, emit the
/// profiles, the correctors against the outer solution, and their sup-norm
/// amplitudes.
pub fn compare(p: &HeatCompareParams, ctx: &RunContext) -> Result<(), CliError> {
    let selected = parse_bc_selection(&p.bc)?;
    let u0 = decaying_exponential(p.length, p.ny)?;
    let outer = outer_reference(p.t_end, p.nu, &u0);

    let mut profiles: [Option<Field1D>; 3] = [None, None, None];
    let mut amplitudes: Vec<(BoundaryCondition, f64)> = Vec::new();
    for bc in selected {
        let cfg = Heat1DConfig {
            nu: p.nu,
            dt: p.dt,
            length: p.length,
            ny: p.ny,
            bc,
            t_end: p.t_end,
        };
        let u = solve_heat1d(&u0, &cfg)?;
        let amplitude = corrector_amplitude(&u, &outer)?;
        println!("{:<14} corrector amplitude {}", bc.name(), fmt(amplitude));
        profiles[slot(bc)] = Some(u);
        amplitudes.push((bc, amplitude));
    }

    let mut w = ctx.csv(
        "profiles.csv",
        &[
            "y",
            "u_noslip",
            "u_stressfree",
            "u_diffusionfree",
            "u_outer",
        ],
    )?;
    for j in 0..p.ny {
        let mut row = vec![fmt(u0.coord(j))];
        for profile in &profiles {
            row.push(fmt_opt(profile.as_ref().map(|u| u.values()[j])));
        }
        row.push(fmt(outer.values()[j]));
        w.row(row)?;
    }
    w.finish()?;

    let mut w = ctx.csv(
        "correctors.csv",
        &[
            "y",
            "corrector_noslip",
            "corrector_stressfree",
            "corrector_diffusionfree",
        ],
    )?;
    for j in 0..p.ny {
        let mut row = vec![fmt(u0.coord(j))];
        for profile in &profiles {
            row.push(fmt_opt(
                profile.as_ref().map(|u| u.values()[j] - outer.values()[j]),
            ));
        }
        w.row(row)?;
    }
    w.finish()?;

    let mut w = ctx.csv("amplitudes.csv", &["bc", "amplitude"])?;
    for (bc, amplitude) in &amplitudes {
        w.row([bc.name().to_string(), fmt(*amplitude)])?;
    }
    w.finish()
}

/// `heat-sweep`: corrector amplitudes across a viscosity list for all three
/// wall conditions, plus the fitted amplitude-scaling exponents.
pub fn sweep(p: &HeatSweepParams, ctx: &RunContext) -> Result<(), CliError> {
    if p.nu_list.is_empty() {
        return Err(CliError::Config("nu_list must not be empty".into()));
    }
    let u0 = decaying_exponential(p.length, p.ny)?;

    let mut samples: [Vec<(f64, f64)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut sweep_rows: Vec<(f64, BoundaryCondition, f64)> = Vec::new();
    for &nu in &p.nu_list {
        let outer = outer_reference(p.t_end, nu, &u0);
        for bc in BoundaryCondition::ALL {
            let cfg = Heat1DConfig {
                nu,
                dt: p.dt,
                length: p.length,
                ny: p.ny,
                bc,
                t_end: p.t_end,
            };
            let u = solve_heat1d(&u0, &cfg)?;
            let amplitude = corrector_amplitude(&u, &outer)?;
            samples[slot(bc)].push((nu, amplitude));
            sweep_rows.push((nu, bc, amplitude));
        }
    }

    let mut w = ctx.csv("sweep.csv", &["nu", "bc", "amplitude"])?;
    for (nu, bc, amplitude) in &sweep_rows {
        w.row([fmt(*nu), bc.name().to_string(), fmt(*amplitude)])?;
    }
    w.finish()?;

    let mut w = ctx.csv(
        "slopes.csv",
        &["bc", "slope", "intercept", "max_rel_residual"],
    )?;
    for bc in BoundaryCondition::ALL {
        let fit = ScalingFit::from_samples(&samples[slot(bc)])?;
        println!(
            "{:<14} amplitude ~ nu^{:.4}  (max relative fit residual {:.2e})",
            bc.name(),
            fit.slope,
            fit.max_rel_residual
        );
        w.row([
            bc.name().to_string(),
            fmt(fit.slope),
            fmt(fit.intercept),
            fmt(fit.max_rel_residual),
        ])?;
    }
    w.finish()
}
