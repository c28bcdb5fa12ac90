//! Wall boundary-condition families and their discrete enforcement rules.

use std::fmt;
use std::str::FromStr;

/// Wall condition applied by every solver in this crate.
///
/// The discrete enforcement rule depends on the unknown:
///
/// - 1D velocity `u` (heat model): `NoSlip` pins `u = 0` at the wall,
///   `StressFree` reflects the ghost point (`u[-1] = u[1]`, zero first
///   derivative), `DiffusionFree` extends linearly (`u[-1] = 2 u[0] - u[1]`,
///   zero second derivative).
/// - 2D vorticity `omega`: `StressFree` pins `omega = 0` on flat or circular
///   walls, `DiffusionFree` imposes a homogeneous Neumann condition through
///   mirrored ghost rows, and `NoSlip` determines wall vorticity each step by
///   the influence-matrix method so the reconstructed tangential wall velocity
///   vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// Velocity vanishes at the wall.
    NoSlip,
    /// Tangential stress vanishes at the wall. On curved walls this variant
    /// implements the zero-wall-vorticity condition (which coincides with
    /// zero tangential stress only on flat walls).
    StressFree,
    /// The viscous term is tangent to the wall: homogeneous Neumann condition
    /// on vorticity in 2D, zero second derivative of velocity in the 1D model.
    DiffusionFree,
}

impl BoundaryCondition {
    /// All variants, in the order used by comparison sweeps.
    pub const ALL: [BoundaryCondition; 3] = [
        BoundaryCondition::NoSlip,
        BoundaryCondition::StressFree,
        BoundaryCondition::DiffusionFree,
    ];

    /// Stable lowercase name used in CLI flags and CSV columns.
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::NoSlip => "noslip",
            BoundaryCondition::StressFree => "stressfree",
            BoundaryCondition::DiffusionFree => "diffusionfree",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = String;

    /// Accepts the canonical names plus common aliases (`difffree`,
    /// `diffusion-free`, `lions`, `stress-free`, `no-slip`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "noslip" | "no-slip" => Ok(BoundaryCondition::NoSlip),
            "stressfree" | "stress-free" | "lions" => Ok(BoundaryCondition::StressFree),
            "diffusionfree" | "diffusion-free" | "difffree" => Ok(BoundaryCondition::DiffusionFree),
            other => Err(format!(
                "unknown boundary condition '{other}' (expected noslip, stressfree, or diffusionfree)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_aliases() {
        assert_eq!(
            "lions".parse::<BoundaryCondition>().unwrap(),
            BoundaryCondition::StressFree
        );
        assert_eq!(
            "difffree".parse::<BoundaryCondition>().unwrap(),
            BoundaryCondition::DiffusionFree
        );
        assert_eq!(
            "no-slip".parse::<BoundaryCondition>().unwrap(),
            BoundaryCondition::NoSlip
        );
    }

    #[test]
    fn rejects_unknown_names() {
        assert!("robin".parse::<BoundaryCondition>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for bc in BoundaryCondition::ALL {
            assert_eq!(bc.name().parse::<BoundaryCondition>().unwrap(), bc);
        }
    }
}
