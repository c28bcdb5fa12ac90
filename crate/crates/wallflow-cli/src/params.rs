//! Resolved experiment parameters: documented defaults, JSON config-file
//! loading (unknown keys are hard errors), and boundary-condition parsing.
//!
//! Resolution order: defaults, then the `--config` JSON file, then explicit
//! flags. Each subcommand's file schema is exactly its parameter struct; a
//! partial file is fine, an unrecognized key is not.

use crate::output::{cfg_err, CliError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use wallflow::BoundaryCondition;

/// Loads a parameter struct from an optional JSON file, starting from its
/// defaults. Unknown keys and malformed values are configuration errors.
pub fn load<P: DeserializeOwned + Default>(config: &Option<PathBuf>) -> Result<P, CliError> {
    match config {
        None => Ok(P::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| cfg_err(&format!("cannot read config file {}", path.display()), e))?;
            serde_json::from_str(&text)
                .map_err(|e| cfg_err(&format!("config file {}", path.display()), e))
        }
    }
}

pub fn parse_bc(name: &str) -> Result<BoundaryCondition, CliError> {
    name.parse().map_err(CliError::Config)
}

/// Either one wall condition or `"all"` (comparison order: noslip,
/// stressfree, diffusionfree).
pub fn parse_bc_selection(name: &str) -> Result<Vec<BoundaryCondition>, CliError> {
    if name == "all" {
        Ok(BoundaryCondition::ALL.to_vec())
    } else {
        Ok(vec![parse_bc(name)?])
    }
}

/// Canonical spelling recorded in the manifest, so aliases like `difffree`
/// resolve to one name before anything is written to disk.
pub fn canonical_bc(name: &str) -> Result<String, CliError> {
    Ok(parse_bc(name)?.name().to_string())
}

/// Like [`canonical_bc`] but also accepts the `all` selector.
pub fn canonical_bc_selection(name: &str) -> Result<String, CliError> {
    if name == "all" {
        Ok("all".to_string())
    } else {
        canonical_bc(name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatCompareParams {
    pub nu: f64,
    pub t_end: f64,
    pub dt: f64,
    pub ny: usize,
    pub length: f64,
    /// `noslip`, `stressfree`, `diffusionfree`, or `all`.
    pub bc: String,
}

impl Default for HeatCompareParams {
    fn default() -> Self {
        HeatCompareParams {
            nu: 0.1,
            t_end: 0.1,
            dt: 1e-3,
            ny: 3001,
            length: 30.0,
            bc: "all".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatSweepParams {
    pub nu_list: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub ny: usize,
    pub length: f64,
}

impl Default for HeatSweepParams {
    fn default() -> Self {
        HeatSweepParams {
            nu_list: vec![1e-3, 1e-4, 1e-5, 1e-6],
            t_end: 0.1,
            dt: 5e-4,
            ny: 300_001,
            length: 30.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelRunParams {
    pub nu: f64,
    /// `noslip`, `stressfree`, or `diffusionfree` (ignored when `nu == 0`).
    pub bc: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Bulk (mean) horizontal velocity.
    pub gamma: f64,
    /// Preset name (`compatible-channel`, `shear`, `zero`) or a CSV path
    /// with an `omega` column in x-outer row order.
    pub omega0: String,
    pub diag_stride: usize,
    pub dealias: bool,
}

impl Default for ChannelRunParams {
    fn default() -> Self {
        ChannelRunParams {
            nu: 1e-2,
            bc: "diffusionfree".into(),
            nx: 64,
            ny: 65,
            lx: std::f64::consts::TAU,
            dt: 1e-3,
            t_end: 1.0,
            gamma: 0.0,
            omega0: "compatible-channel".into(),
            diag_stride: 10,
            dealias: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSweepParams {
    pub nu_list: Vec<f64>,
    pub bc: String,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    /// Shared by every sweep member and the inviscid reference, so the gap
    /// isolates viscosity rather than time resolution.
    pub dt: f64,
    pub t_end: f64,
    pub gamma: f64,
    pub omega0: String,
    pub dealias: bool,
}

impl Default for ChannelSweepParams {
    fn default() -> Self {
        ChannelSweepParams {
            nu_list: vec![4e-3, 2e-3, 1e-3, 5e-4],
            bc: "diffusionfree".into(),
            nx: 64,
            ny: 129,
            lx: std::f64::consts::TAU,
            dt: 2.5e-4,
            t_end: 0.5,
            gamma: 0.0,
            omega0: "compatible-channel".into(),
            dealias: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnulusRunParams {
    pub nu: f64,
    /// `stressfree` (alias `lions`) or `diffusionfree`; pinned-velocity
    /// walls are not available in the annulus.
    pub bc: String,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub ntheta: usize,
    pub nr: usize,
    /// Circulation around the inner boundary.
    pub gamma: f64,
    /// Preset name: `annulus-vortex` or `zero`.
    pub omega0: String,
    pub blob_radius: f64,
    pub blob_angle: f64,
    pub blob_width: f64,
    pub t_end: f64,
    pub dt: f64,
    pub diag_stride: usize,
    pub dealias: bool,
}

impl Default for AnnulusRunParams {
    fn default() -> Self {
        AnnulusRunParams {
            nu: 1e-3,
            bc: "diffusionfree".into(),
            inner_radius: 1.0,
            outer_radius: 2.0,
            ntheta: 256,
            nr: 129,
            gamma: 1.0,
            omega0: "annulus-vortex".into(),
            blob_radius: 1.5,
            blob_angle: 0.0,
            blob_width: 0.12,
            t_end: 5.0,
            dt: 5e-3,
            diag_stride: 10,
            dealias: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlProfileRunParams {
    /// `zero` or `neumann-flux`.
    pub preset: String,
    /// Wall flux used by the `neumann-flux` preset.
    pub flux: f64,
    pub lx: f64,
    pub nx: usize,
    pub nz: usize,
    pub z_max: f64,
    pub weight_exponent: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for BlProfileRunParams {
    fn default() -> Self {
        BlProfileRunParams {
            preset: "neumann-flux".into(),
            flux: 1.0,
            lx: 1.0,
            nx: 4,
            nz: 1024,
            z_max: 30.0,
            weight_exponent: 2.0,
            t_end: 0.25,
            dt: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyGrowthParams {
    pub nu: f64,
    pub lx: f64,
    pub nr: usize,
}

impl Default for EnergyGrowthParams {
    fn default() -> Self {
        EnergyGrowthParams {
            nu: 1e-3,
            lx: 1.0,
            nr: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportParams {
    /// Diagnostics CSV to analyze (the 12-column schema this tool emits).
    pub input: String,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            input: "diagnostics.csv".into(),
        }
    }
}
