//! Conserved-quantity ledgers and balance-residual reports.
//!
//! Every solver in this crate produces [`DiagnosticsRecord`] rows through its
//! own `diagnostics_record` method (the quadrature must use the solver's own
//! stencils, or balance residuals would carry an O(1) scheme mismatch). This
//! module owns the record type, the CSV schema, the balance-residual reducer,
//! the power-law fit, and the transient-energy-growth verification.

use crate::error::{Result, SolverError};
use crate::numerics::{least_squares_line, simpson};

/// One row of the per-step diagnostics ledger.
///
/// `circ_inner`/`circ_outer` are `None` where the domain has no circular
/// boundary components (the channel); CSV emission renders them as empty
/// fields, not zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    /// Simulation time.
    pub t: f64,
    /// Half the squared L2 norm of vorticity.
    pub enstrophy: f64,
    /// Cumulative dissipation integral `nu * int_0^t |grad omega|^2`,
    /// accumulated by the stepper at the Crank-Nicolson midpoint states.
    pub palinstrophy_integral: f64,
    /// Half the squared L2 norm of velocity.
    pub energy: f64,
    /// Domain average of vorticity.
    pub mean_vorticity: f64,
    /// L1 norm of vorticity.
    pub l1: f64,
    /// L2 norm of vorticity.
    pub l2: f64,
    /// L4 norm of vorticity.
    pub l4: f64,
    /// Circulation around the inner boundary component, if any.
    pub circ_inner: Option<f64>,
    /// Circulation around the outer boundary component, if any.
    pub circ_outer: Option<f64>,
    /// Boundary work term `2 nu * contour_integral(D(u)n . u)`, where the
    /// solver provides one.
    pub boundary_stress_work: Option<f64>,
    /// Bulk dissipation `2 nu * int |D(u)|^2`, where the solver provides one.
    pub bulk_dissipation: Option<f64>,
}

impl DiagnosticsRecord {
    /// CSV column order (fixed schema).
    pub const CSV_HEADER: &'static str = "t,enstrophy,palinstrophy_integral,energy,mean_vorticity,l1,l2,l4,circ_inner,circ_outer,boundary_stress_work,bulk_dissipation";

    /// Fields in CSV column order; `None` renders as an empty field.
    pub fn csv_fields(&self) -> [Option<f64>; 12] {
        [
            Some(self.t),
            Some(self.enstrophy),
            Some(self.palinstrophy_integral),
            Some(self.energy),
            Some(self.mean_vorticity),
            Some(self.l1),
            Some(self.l2),
            Some(self.l4),
            self.circ_inner,
            self.circ_outer,
            self.boundary_stress_work,
            self.bulk_dissipation,
        ]
    }

    /// True when every present entry is finite.
    pub fn is_finite(&self) -> bool {
        self.csv_fields().iter().flatten().all(|v| v.is_finite())
    }
}

/// Log-log regression result for amplitude-versus-viscosity sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Fitted exponent.
    pub slope: f64,
    /// Fitted log-prefactor.
    pub intercept: f64,
    /// Largest relative deviation of any sample from the fitted power law.
    pub max_rel_residual: f64,
}

impl ScalingFit {
    /// Least-squares power-law fit through `(value, amplitude)` samples.
    /// Requires at least three samples, all strictly positive.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<ScalingFit> {
        if samples.len() < 3 {
            return Err(SolverError::TooFewSamples {
                required: 3,
                got: samples.len(),
            });
        }
        for &(x, y) in samples {
            if !(x > 0.0 && y > 0.0) {
                return Err(SolverError::InvalidConfig(format!(
                    "power-law fit needs positive samples, got ({x}, {y})"
                )));
            }
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
        let (slope, intercept) = least_squares_line(&xs, &ys);
        let max_rel_residual = samples.iter().fold(0.0_f64, |m, &(x, y)| {
            let predicted = (intercept + slope * x.ln()).exp();
            m.max((y - predicted).abs() / y)
        });
        Ok(ScalingFit {
            slope,
            intercept,
            max_rel_residual,
        })
    }
}

/// Maximum balance residuals over a diagnostics series.
#[derive(Debug, Clone, Copy)]
pub struct BalanceReport {
    /// `max_t |enstrophy(t) + palinstrophy_integral(t) - enstrophy(0)|`.
    pub enstrophy_residual: f64,
    /// `max_t |dE/dt - (boundary_stress_work - bulk_dissipation)|`, with
    /// `dE/dt` by centered differences over the sampled times. `None` when
    /// the series carries no work/dissipation columns.
    pub energy_residual: Option<f64>,
}

/// Reduces a diagnostics series to its worst enstrophy-ledger and
/// energy-ledger residuals.
///
/// `enstrophy0` is the reference initial enstrophy (normally
/// `series[0].enstrophy`). Needs at least three records for the centered
/// energy derivative.
pub fn balance_residuals(series: &[DiagnosticsRecord], enstrophy0: f64) -> Result<BalanceReport> {
    if series.len() < 3 {
        return Err(SolverError::TooFewSamples {
            required: 3,
            got: series.len(),
        });
    }
    let mut enstrophy_residual = 0.0_f64;
    for rec in series {
        enstrophy_residual =
            enstrophy_residual.max((rec.enstrophy + rec.palinstrophy_integral - enstrophy0).abs());
    }
    let mut energy_residual = None;
    for i in 1..series.len() - 1 {
        let dt2 = series[i + 1].t - series[i - 1].t;
        if dt2 <= 0.0 {
            return Err(SolverError::InvalidConfig(
                "diagnostics series is not increasing in time".into(),
            ));
        }
        let (work, dissipation) = match (series[i].boundary_stress_work, series[i].bulk_dissipation)
        {
            (Some(w), Some(d)) => (w, d),
            _ => continue,
        };
        let de_dt = (series[i + 1].energy - series[i - 1].energy) / dt2;
        let residual = (de_dt - (work - dissipation)).abs();
        energy_residual = Some(energy_residual.map_or(residual, |m: f64| m.max(residual)));
    }
    Ok(BalanceReport {
        enstrophy_residual,
        energy_residual,
    })
}

/// Shear profile of the transient-growth example:
/// `U(z) = z^5 - (5/3) z^4 - (5/3) z + 1`.
pub fn shear_profile(z: f64) -> f64 {
    z.powi(5) - (5.0 / 3.0) * z.powi(4) - (5.0 / 3.0) * z + 1.0
}

/// First derivative of [`shear_profile`].
pub fn shear_profile_slope(z: f64) -> f64 {
    5.0 * z.powi(4) - (20.0 / 3.0) * z.powi(3) - 5.0 / 3.0
}

/// Second derivative of [`shear_profile`]: `20 z^2 (z - 1)`.
pub fn shear_profile_curvature(z: f64) -> f64 {
    20.0 * z.powi(3) - 20.0 * z.powi(2)
}

/// Verifies the transient-energy-growth constant for the shear profile
/// `u0 = (U(y), 0)` on a channel of width 1 and period `lx`.
///
/// Returns `(analytic, quadrature)` where `analytic = lx * nu * 20/63` is the
/// exact initial energy growth rate `nu * int(lap(u0) . u0)` and `quadrature`
/// integrates `nu * lx * U''(y) U(y)` by composite Simpson on `nr` intervals
/// (`nr` even, `nr >= 32`).
///
/// Also re-checks by evaluation that the profile is admissible: `U''(0) =
/// U''(1) = 0` (compatible with the diffusion-free wall) and `int_0^1 U = 0`
/// (zero net flux), both exact for this polynomial.
pub fn energy_growth_check(lx: f64, nu: f64, nr: usize) -> Result<(f64, f64)> {
    if nr < 32 || !nr.is_multiple_of(2) {
        return Err(SolverError::InvalidConfig(format!(
            "energy growth quadrature needs an even interval count >= 32, got {nr}"
        )));
    }
    if !(lx > 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "period must be positive, got {lx}"
        )));
    }
    if !(nu >= 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "viscosity must be non-negative, got {nu}"
        )));
    }
    // admissibility by direct evaluation
    let curvature_wall0 = shear_profile_curvature(0.0);
    let curvature_wall1 = shear_profile_curvature(1.0);
    // antiderivative of the shear profile, evaluated at the two walls
    let antiderivative = |z: f64| z.powi(6) / 6.0 - z.powi(5) / 3.0 - 5.0 * z * z / 6.0 + z;
    let net_flux = antiderivative(1.0) - antiderivative(0.0);
    assert!(
        curvature_wall0 == 0.0 && curvature_wall1.abs() < 1e-13 && net_flux.abs() < 1e-15,
        "shear profile lost its defining identities"
    );

    let n = nr + 1;
    let h = 1.0 / nr as f64;
    let integrand: Vec<f64> = (0..n)
        .map(|j| {
            let z = j as f64 * h;
            shear_profile_curvature(z) * shear_profile(z)
        })
        .collect();
    let quadrature = nu * lx * simpson(&integrand, h);
    let analytic = lx * nu * 20.0 / 63.0;
    Ok((analytic, quadrature))
}
