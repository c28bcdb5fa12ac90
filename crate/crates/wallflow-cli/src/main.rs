//! Batch experiment runner for the wallflow solvers.
//!
//! Every subcommand resolves its parameters (defaults, then `--config` JSON,
//! then flags), runs deterministically, and writes CSV artifacts plus a
//! `manifest.json` into its output directory. Exit codes: 0 success, 2
//! configuration error, 3 numerical abort.

mod experiments;
mod output;
mod params;

use clap::{Args, Parser, Subcommand};
use output::{CliError, RunContext};
use params::*;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "wallflow",
    version,
    about = "Batch experiments for wall boundary conditions in incompressible 2D flow",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare wall-layer correctors across boundary conditions (1D heat model)
    HeatCompare(HeatCompareArgs),
    /// Corrector amplitude vs viscosity sweep (1D heat model)
    HeatSweep(HeatSweepArgs),
    /// One channel run with diagnostics and a final field dump
    ChannelRun(ChannelRunArgs),
    /// Vanishing-viscosity gap sweep against an inviscid reference
    ChannelSweep(ChannelSweepArgs),
    /// One annulus run with circulation diagnostics
    AnnulusRun(AnnulusRunArgs),
    /// Boundary-layer profile solve on the half-line
    BlprofileRun(BlprofileRunArgs),
    /// Transient energy-growth identity check
    EnergyGrowth(EnergyGrowthArgs),
    /// Balance-residual report over an existing diagnostics CSV
    Report(ReportArgs),
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct CommonArgs {
    /// JSON config file; explicit flags override file values, unknown keys
    /// are errors
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory [default: wallflow-out/<subcommand>, or
    /// $WALLFLOW_OUT/<subcommand> when that variable is set]
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Seed recorded in the manifest; the built-in presets are deterministic
    /// and do not consume it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

macro_rules! override_field {
    ($params:expr, $args:expr, $($field:ident),+ $(,)?) => {
        $(if let Some(v) = $args.$field.clone() { $params.$field = v; })+
    };
}

#[derive(Args)]
struct HeatCompareArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Viscosity [default: 0.1]
    #[arg(long)]
    nu: Option<f64>,
    /// Final time [default: 0.1]
    #[arg(long)]
    t_end: Option<f64>,
    /// Time step [default: 1e-3]
    #[arg(long)]
    dt: Option<f64>,
    /// Grid points including the wall [default: 3001]
    #[arg(long)]
    ny: Option<usize>,
    /// Domain length [default: 30]
    #[arg(long)]
    length: Option<f64>,
    /// noslip | stressfree | diffusionfree | all [default: all]
    #[arg(long)]
    bc: Option<String>,
}

impl HeatCompareArgs {
    fn params(&self) -> Result<HeatCompareParams, CliError> {
        let mut p: HeatCompareParams = load(&self.common.config)?;
        override_field!(p, self, nu, t_end, dt, ny, length, bc);
        p.bc = canonical_bc_selection(&p.bc)?;
        Ok(p)
    }
}

#[derive(Args)]
struct HeatSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated viscosities [default: 1e-3,1e-4,1e-5,1e-6]
    #[arg(long, value_delimiter = ',')]
    nu_list: Option<Vec<f64>>,
    /// Final time [default: 0.1]
    #[arg(long)]
    t_end: Option<f64>,
    /// Time step [default: 5e-4]
    #[arg(long)]
    dt: Option<f64>,
    /// Grid points including the wall [default: 300001]
    #[arg(long)]
    ny: Option<usize>,
    /// Domain length [default: 30]
    #[arg(long)]
    length: Option<f64>,
}

impl HeatSweepArgs {
    fn params(&self) -> Result<HeatSweepParams, CliError> {
        let mut p: HeatSweepParams = load(&self.common.config)?;
        override_field!(p, self, nu_list, t_end, dt, ny, length);
        Ok(p)
    }
}

#[derive(Args)]
struct ChannelRunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Viscosity; 0 selects the inviscid path [default: 1e-2]
    #[arg(long)]
    nu: Option<f64>,
    /// noslip | stressfree | diffusionfree [default: diffusionfree]
    #[arg(long)]
    bc: Option<String>,
    /// Periodic points in x [default: 64]
    #[arg(long)]
    nx: Option<usize>,
    /// Wall-normal points including both walls [default: 65]
    #[arg(long)]
    ny: Option<usize>,
    /// Channel period [default: 6.283185307179586]
    #[arg(long)]
    lx: Option<f64>,
    /// Time step [default: 1e-3]
    #[arg(long)]
    dt: Option<f64>,
    /// Final time [default: 1]
    #[arg(long)]
    t_end: Option<f64>,
    /// Bulk (mean) horizontal velocity [default: 0]
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial vorticity: compatible-channel | shear | zero | CSV path
    /// [default: compatible-channel]
    #[arg(long)]
    omega0: Option<String>,
    /// Steps between diagnostics records [default: 10]
    #[arg(long)]
    diag_stride: Option<usize>,
    /// 2/3-rule dealiasing of the advection products [default: true]
    #[arg(long)]
    dealias: Option<bool>,
}

impl ChannelRunArgs {
    fn params(&self) -> Result<ChannelRunParams, CliError> {
        let mut p: ChannelRunParams = load(&self.common.config)?;
        override_field!(
            p,
            self,
            nu,
            bc,
            nx,
            ny,
            lx,
            dt,
            t_end,
            gamma,
            omega0,
            diag_stride,
            dealias
        );
        p.bc = canonical_bc(&p.bc)?;
        Ok(p)
    }
}

#[derive(Args)]
struct ChannelSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated viscosities [default: 4e-3,2e-3,1e-3,5e-4]
    #[arg(long, value_delimiter = ',')]
    nu_list: Option<Vec<f64>>,
    /// noslip | stressfree | diffusionfree [default: diffusionfree]
    #[arg(long)]
    bc: Option<String>,
    /// Periodic points in x [default: 64]
    #[arg(long)]
    nx: Option<usize>,
    /// Wall-normal points including both walls [default: 129]
    #[arg(long)]
    ny: Option<usize>,
    /// Channel period [default: 6.283185307179586]
    #[arg(long)]
    lx: Option<f64>,
    /// Time step shared by all members and the reference [default: 2.5e-4]
    #[arg(long)]
    dt: Option<f64>,
    /// Final time [default: 0.5]
    #[arg(long)]
    t_end: Option<f64>,
    /// Bulk (mean) horizontal velocity [default: 0]
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial vorticity: compatible-channel | shear | zero | CSV path
    /// [default: compatible-channel]
    #[arg(long)]
    omega0: Option<String>,
    /// 2/3-rule dealiasing of the advection products [default: true]
    #[arg(long)]
    dealias: Option<bool>,
}

impl ChannelSweepArgs {
    fn params(&self) -> Result<ChannelSweepParams, CliError> {
        let mut p: ChannelSweepParams = load(&self.common.config)?;
        override_field!(p, self, nu_list, bc, nx, ny, lx, dt, t_end, gamma, omega0, dealias);
        p.bc = canonical_bc(&p.bc)?;
        Ok(p)
    }
}

#[derive(Args)]
struct AnnulusRunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Viscosity; 0 selects the inviscid path [default: 1e-3]
    #[arg(long)]
    nu: Option<f64>,
    /// stressfree (alias lions) | diffusionfree [default: diffusionfree]
    #[arg(long)]
    bc: Option<String>,
    /// Inner wall radius [default: 1]
    #[arg(long)]
    inner_radius: Option<f64>,
    /// Outer wall radius [default: 2]
    #[arg(long)]
    outer_radius: Option<f64>,
    /// Azimuthal points [default: 256]
    #[arg(long)]
    ntheta: Option<usize>,
    /// Radial points including both walls [default: 129]
    #[arg(long)]
    nr: Option<usize>,
    /// Circulation around the inner boundary [default: 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial vorticity preset: annulus-vortex | zero
    /// [default: annulus-vortex]
    #[arg(long)]
    omega0: Option<String>,
    /// Vortex preset: blob center radius [default: 1.5]
    #[arg(long)]
    blob_radius: Option<f64>,
    /// Vortex preset: blob center angle [default: 0]
    #[arg(long)]
    blob_angle: Option<f64>,
    /// Vortex preset: blob standard deviation [default: 0.12]
    #[arg(long)]
    blob_width: Option<f64>,
    /// Final time [default: 5]
    #[arg(long)]
    t_end: Option<f64>,
    /// Time step [default: 5e-3]
    #[arg(long)]
    dt: Option<f64>,
    /// Steps between diagnostics records [default: 10]
    #[arg(long)]
    diag_stride: Option<usize>,
    /// 2/3-rule dealiasing of the advection products [default: true]
    #[arg(long)]
    dealias: Option<bool>,
}

impl AnnulusRunArgs {
    fn params(&self) -> Result<AnnulusRunParams, CliError> {
        let mut p: AnnulusRunParams = load(&self.common.config)?;
        override_field!(
            p,
            self,
            nu,
            bc,
            inner_radius,
            outer_radius,
            ntheta,
            nr,
            gamma,
            omega0,
            blob_radius,
            blob_angle,
            blob_width,
            t_end,
            dt,
            diag_stride,
            dealias
        );
        p.bc = canonical_bc(&p.bc)?;
        Ok(p)
    }
}

#[derive(Args)]
struct BlprofileRunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// zero | neumann-flux [default: neumann-flux]
    #[arg(long)]
    preset: Option<String>,
    /// Wall flux for the neumann-flux preset [default: 1]
    #[arg(long)]
    flux: Option<f64>,
    /// Horizontal period [default: 1]
    #[arg(long)]
    lx: Option<f64>,
    /// Horizontal points (even, >= 4) [default: 4]
    #[arg(long)]
    nx: Option<usize>,
    /// Wall-normal points [default: 1024]
    #[arg(long)]
    nz: Option<usize>,
    /// Truncation height [default: 30]
    #[arg(long)]
    z_max: Option<f64>,
    /// Exponent of the decay weight (1+z)^n [default: 2]
    #[arg(long)]
    weight_exponent: Option<f64>,
    /// Final time [default: 0.25]
    #[arg(long)]
    t_end: Option<f64>,
    /// Time step [default: 1e-4]
    #[arg(long)]
    dt: Option<f64>,
}

impl BlprofileRunArgs {
    fn params(&self) -> Result<BlProfileRunParams, CliError> {
        let mut p: BlProfileRunParams = load(&self.common.config)?;
        override_field!(
            p,
            self,
            preset,
            flux,
            lx,
            nx,
            nz,
            z_max,
            weight_exponent,
            t_end,
            dt
        );
        Ok(p)
    }
}

#[derive(Args)]
struct EnergyGrowthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Viscosity [default: 1e-3]
    #[arg(long)]
    nu: Option<f64>,
    /// Channel period [default: 1]
    #[arg(long)]
    lx: Option<f64>,
    /// Quadrature points (even, >= 32) [default: 256]
    #[arg(long)]
    nr: Option<usize>,
}

impl EnergyGrowthArgs {
    fn params(&self) -> Result<EnergyGrowthParams, CliError> {
        let mut p: EnergyGrowthParams = load(&self.common.config)?;
        override_field!(p, self, nu, lx, nr);
        Ok(p)
    }
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Diagnostics CSV to analyze [default: diagnostics.csv]
    #[arg(long)]
    input: Option<String>,
}

impl ReportArgs {
    fn params(&self) -> Result<ReportParams, CliError> {
        let mut p: ReportParams = load(&self.common.config)?;
        override_field!(p, self, input);
        Ok(p)
    }
}

/// Resolves parameters, runs the experiment, and always leaves a manifest
/// behind once the configuration has resolved: status `"ok"` on success, a
/// failure marker otherwise.
fn execute<P: Serialize>(
    kind: &'static str,
    common: &CommonArgs,
    params: Result<P, CliError>,
    runner: impl FnOnce(&P, &RunContext) -> Result<(), CliError>,
) -> ExitCode {
    let params = match params {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let ctx = match RunContext::create(
        kind,
        common.out_dir.clone(),
        common.seed.unwrap_or(0),
        &params,
    ) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let result = runner(&params, &ctx);
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => e.status(),
    };
    if let Err(e) = ctx.write_manifest(&status) {
        return fail(e);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("wallflow: {}", e.message());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::HeatCompare(a) => execute(
            "heat-compare",
            &a.common,
            a.params(),
            experiments::heat::compare,
        ),
        Cmd::HeatSweep(a) => execute(
            "heat-sweep",
            &a.common,
            a.params(),
            experiments::heat::sweep,
        ),
        Cmd::ChannelRun(a) => execute(
            "channel-run",
            &a.common,
            a.params(),
            experiments::channel::run,
        ),
        Cmd::ChannelSweep(a) => execute(
            "channel-sweep",
            &a.common,
            a.params(),
            experiments::channel::sweep,
        ),
        Cmd::AnnulusRun(a) => execute(
            "annulus-run",
            &a.common,
            a.params(),
            experiments::annulus::run,
        ),
        Cmd::BlprofileRun(a) => execute(
            "blprofile-run",
            &a.common,
            a.params(),
            experiments::blprofile::run,
        ),
        Cmd::EnergyGrowth(a) => execute(
            "energy-growth",
            &a.common,
            a.params(),
            experiments::reporting::energy_growth,
        ),
        Cmd::Report(a) => execute(
            "report",
            &a.common,
            a.params(),
            experiments::reporting::report,
        ),
    }
}
