//! Refinement behaviour of the lowest eigenvalue across the critical charge.
//!
//! Below the critical coupling λ₁ converges to a positive value; above it the
//! quadratic form is unbounded below and λ₁ of the discrete operator keeps
//! falling as the grid reaches further out in momentum.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::ChannelSpec;
use crate::eigen::dense_spectrum;
use crate::error::{config, Result};
use crate::grid::RadialGrid;
use crate::operator::{assemble_operator, Scheme};
use crate::params::PhysParams;

/// Largest spread of λ₁/mc² over the refinement sequence counted as stable.
pub const STABILITY_TOLERANCE: f64 = 1e-4;
/// Drop of λ₁/mc² from the coarsest to the finest grid that signals collapse.
pub const COLLAPSE_DROP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalScanSettings {
    /// Grid sizes, increasing.
    pub sizes: Vec<usize>,
    /// Grid scale per unit charge.
    pub scale_per_z: f64,
    pub stretch: f64,
    pub scheme: Scheme,
}

impl Default for CriticalScanSettings {
    fn default() -> Self {
        Self {
            sizes: alloc::vec![200, 400, 800],
            scale_per_z: 64.0,
            stretch: 3.0,
            scheme: Scheme::GalerkinQuadratic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalRow {
    pub z: f64,
    pub sizes: Vec<usize>,
    /// λ₁/mc² per grid size.
    pub lambda1: Vec<f64>,
    /// max - min of `lambda1`.
    pub variation: f64,
    pub stable: bool,
    pub collapsed: bool,
    pub below_critical: bool,
}

/// λ₁ on the refinement sequence for one charge.
pub fn critical_point(z: f64, kappa: i32, settings: &CriticalScanSettings, base: &PhysParams) -> Result<CriticalRow> {
    if settings.sizes.len() < 2 || settings.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config("critical scan needs at least two increasing grid sizes"));
    }
    if !(z > 0.0) {
        return Err(config(alloc::format!("critical scan needs positive charges, got {z}")));
    }
    let params = base.with_z(z);
    params.validate()?;
    let channel = ChannelSpec::new(kappa)?;
    let mc2 = params.rest_energy();
    let mut lambda1 = Vec::with_capacity(settings.sizes.len());
    for &n in &settings.sizes {
        let grid = RadialGrid::build_stretched(n, settings.scale_per_z * z, settings.stretch)?;
        let op = assemble_operator(&grid, channel, &params, settings.scheme)?;
        lambda1.push(dense_spectrum(&op, 1)?.eigenvalues[0] / mc2);
    }
    let hi = lambda1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = lambda1.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = hi - lo;
    let first = lambda1[0];
    let last = *lambda1.last().expect("at least two sizes");
    Ok(CriticalRow {
        z,
        sizes: settings.sizes.clone(),
        stable: lo > 0.0 && variation < STABILITY_TOLERANCE,
        collapsed: last < first - COLLAPSE_DROP,
        below_critical: z < params.critical_charge(),
        lambda1,
        variation,
    })
}

pub fn critical_scan(
    z_values: &[f64],
    kappa: i32,
    settings: &CriticalScanSettings,
    base: &PhysParams,
) -> Result<Vec<CriticalRow>> {
    z_values
        .iter()
        .map(|&z| critical_point(z, kappa, settings, base))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> CriticalScanSettings {
        CriticalScanSettings {
            sizes: alloc::vec![100, 200],
            ..Default::default()
        }
    }

    #[test]
    fn moderate_charge_is_stable() {
        let row = critical_point(60.0, -1, &quick(), &PhysParams::default()).unwrap();
        assert!(row.stable && !row.collapsed && row.below_critical, "{row:?}");
        // Dirac ground state √(1 - (Z/c)²) ≈ 0.901 lies slightly below
        assert!(row.lambda1[1] > 0.89 && row.lambda1[1] < 0.95);
    }

    #[test]
    fn supercritical_charge_collapses() {
        let row = critical_point(130.0, -1, &quick(), &PhysParams::default()).unwrap();
        assert!(row.collapsed && !row.stable && !row.below_critical, "{row:?}");
    }

    #[test]
    fn rejects_bad_sizes() {
        let s = CriticalScanSettings {
            sizes: alloc::vec![200, 100],
            ..Default::default()
        };
        assert!(critical_point(60.0, -1, &s, &PhysParams::default()).is_err());
        assert!(critical_point(-1.0, -1, &quick(), &PhysParams::default()).is_err());
    }
}
