//! Scalar experiments: the transient energy-growth identity and the
//! balance-residual report over an existing diagnostics CSV.

use crate::output::{cfg_err, fmt, fmt_opt, CliError, RunContext};
use crate::params::{EnergyGrowthParams, ReportParams};
use std::fs::File;
use wallflow::diagnostics::{balance_residuals, energy_growth_check, DiagnosticsRecord};

/// `energy-growth`: compares the closed-form initial energy-growth rate of
/// the built-in shear profile against its quadrature evaluation.
pub fn energy_growth(p: &EnergyGrowthParams, ctx: &RunContext) -> Result<(), CliError> {
    let (analytic, quadrature) = energy_growth_check(p.lx, p.nu, p.nr)?;
    let relative = ((quadrature - analytic) / analytic).abs();
    println!("analytic rate   {}  (lx * 20 nu / 63)", fmt(analytic));
    println!("quadrature      {}", fmt(quadrature));
    println!("relative error  {}", fmt(relative));

    let mut w = ctx.csv(
        "energy_growth.csv",
        &["analytic", "quadrature", "relative_error"],
    )?;
    w.row([fmt(analytic), fmt(quadrature), fmt(relative)])?;
    w.finish()
}

fn parse_cell(cell: &str, path: &str, row: usize, name: &str) -> Result<Option<f64>, CliError> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse()
        .map(Some)
        .map_err(|e| cfg_err(&format!("{path}: row {row}, column {name}"), e))
}

fn require(value: Option<f64>, path: &str, row: usize, name: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| {
        CliError::Config(format!(
            "{path}: row {row}: column {name} must not be empty"
        ))
    })
}

/// Reads a diagnostics CSV in the exact 12-column schema this tool writes.
pub fn read_diagnostics(path: &str) -> Result<Vec<DiagnosticsRecord>, CliError> {
    let file = File::open(path).map_err(|e| cfg_err(&format!("cannot open {path}"), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let names: Vec<&str> = DiagnosticsRecord::CSV_HEADER.split(',').collect();
    let headers = reader.headers().map_err(|e| cfg_err(path, e))?.clone();
    if headers.iter().ne(names.iter().copied()) {
        return Err(CliError::Config(format!(
            "{path}: header {headers:?} is not the diagnostics schema ({})",
            DiagnosticsRecord::CSV_HEADER
        )));
    }

    let mut records = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| cfg_err(path, e))?;
        if record.len() != names.len() {
            return Err(CliError::Config(format!(
                "{path}: row {} has {} fields, expected {}",
                idx + 3,
                record.len(),
                names.len()
            )));
        }
        let row = idx + 3;
        let mut fields = [None; 12];
        for (c, field) in fields.iter_mut().enumerate() {
            *field = parse_cell(&record[c], path, row, names[c])?;
        }
        records.push(DiagnosticsRecord {
            t: require(fields[0], path, row, names[0])?,
            enstrophy: require(fields[1], path, row, names[1])?,
            palinstrophy_integral: require(fields[2], path, row, names[2])?,
            energy: require(fields[3], path, row, names[3])?,
            mean_vorticity: require(fields[4], path, row, names[4])?,
            l1: require(fields[5], path, row, names[5])?,
            l2: require(fields[6], path, row, names[6])?,
            l4: require(fields[7], path, row, names[7])?,
            circ_inner: fields[8],
            circ_outer: fields[9],
            boundary_stress_work: fields[10],
            bulk_dissipation: fields[11],
        });
    }
    Ok(records)
}

/// `report`: reduces a diagnostics series to its worst enstrophy-ledger and
/// energy-ledger residuals.
pub fn report(p: &ReportParams, ctx: &RunContext) -> Result<(), CliError> {
    let records = read_diagnostics(&p.input)?;
    let first = records
        .first()
        .ok_or_else(|| CliError::Config(format!("{}: no data rows", p.input)))?;
    let balance = balance_residuals(&records, first.enstrophy)?;

    println!("enstrophy residual  {}", fmt(balance.enstrophy_residual));
    match balance.energy_residual {
        Some(r) => println!("energy residual     {}", fmt(r)),
        None => println!("energy residual     not available (no work/dissipation columns)"),
    }

    let mut w = ctx.csv("report.csv", &["enstrophy_residual", "energy_residual"])?;
    w.row([
        fmt(balance.enstrophy_residual),
        fmt_opt(balance.energy_residual),
    ])?;
    w.finish()
}
