//! Binding energies against the Schrödinger levels Z²/(2n²) as c grows.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::ChannelSpec;
use crate::eigen::{dense_spectrum, nonrel_spectrum};
use crate::error::{config, Result};
use crate::grid::RadialGrid;
use crate::operator::{assemble_operator, Scheme};
use crate::params::PhysParams;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonrelSettings {
    pub n: usize,
    pub levels: usize,
    /// Multiples of the configured c to sweep.
    pub c_multipliers: Vec<f64>,
    pub scheme: Scheme,
}

impl Default for NonrelSettings {
    fn default() -> Self {
        Self {
            n: 200,
            levels: 3,
            c_multipliers: alloc::vec![1.0, 2.0, 4.0],
            scheme: Scheme::Nystrom,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonrelRow {
    pub c: f64,
    pub binding: Vec<f64>,
    /// binding - Z²/(2n²).
    pub deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NonrelReport {
    pub z: f64,
    pub kappa: i32,
    pub principal: Vec<usize>,
    pub exact: Vec<f64>,
    pub rows: Vec<NonrelRow>,
    /// Bindings of p²/2m plus the bare Coulomb kernel on the same grid.
    pub schroedinger: Vec<f64>,
    /// Allowed |deviation| at the configured c, in units of Z².
    pub tolerances: Vec<f64>,
    pub flagged: bool,
}

/// Tolerance on level k (0-based) in units of Z²: 1e-3 for the ground state,
/// 5e-4 above.
pub fn level_tolerance(k: usize) -> f64 {
    if k == 0 {
        1e-3
    } else {
        5e-4
    }
}

pub fn nonrel_limit(settings: &NonrelSettings, kappa: i32, params: &PhysParams) -> Result<NonrelReport> {
    params.validate()?;
    if !(params.z > 0.0) {
        return Err(config("nonrelativistic limit needs Z > 0"));
    }
    if settings.levels == 0 || settings.c_multipliers.is_empty() || settings.c_multipliers.iter().any(|m| !(*m > 0.0)) {
        return Err(config(
            "nonrelativistic limit needs levels >= 1 and positive c multipliers",
        ));
    }
    let channel = ChannelSpec::new(kappa)?;
    let z = params.z;
    let grid = RadialGrid::build(settings.n, z * params.m)?;
    let principal: Vec<usize> = (0..settings.levels).map(|k| channel.l_up + 1 + k).collect();
    let exact: Vec<f64> = principal
        .iter()
        .map(|&n| z * z * params.m / (2.0 * (n * n) as f64))
        .collect();
    let mut rows = Vec::with_capacity(settings.c_multipliers.len());
    for &mult in &settings.c_multipliers {
        let p = PhysParams::new(params.c * mult, params.m, z)?;
        let op = assemble_operator(&grid, channel, &p, settings.scheme)?;
        let binding = dense_spectrum(&op, settings.levels)?.binding_energies();
        let deviation = binding.iter().zip(&exact).map(|(b, e)| b - e).collect();
        rows.push(NonrelRow {
            c: p.c,
            binding,
            deviation,
        });
    }
    let schroedinger = nonrel_spectrum(&grid, z, channel.l_up, settings.levels, params.m)?
        .iter()
        .map(|e| -e)
        .collect();
    let tolerances: Vec<f64> = (0..settings.levels).map(level_tolerance).collect();
    let flagged = rows[0]
        .deviation
        .iter()
        .zip(&tolerances)
        .any(|(d, t)| !(d.abs() <= t * z * z));
    Ok(NonrelReport {
        z,
        kappa,
        principal,
        exact,
        rows,
        schroedinger,
        tolerances,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydrogen_limit() {
        let rep = nonrel_limit(&NonrelSettings::default(), -1, &PhysParams::atomic(1.0)).unwrap();
        assert!(!rep.flagged, "{rep:?}");
        // the relativistic shift of the ground state shrinks with c
        let d: Vec<f64> = rep.rows.iter().map(|r| r.deviation[0]).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        for (s, e) in rep.schroedinger.iter().zip(&rep.exact) {
            assert!((s - e).abs() < 1e-4);
        }
        let rep = nonrel_limit(
            &NonrelSettings {
                levels: 2,
                ..Default::default()
            },
            1,
            &PhysParams::atomic(1.0),
        )
        .unwrap();
        assert_eq!(rep.principal, alloc::vec![2, 3]);
        assert!(!rep.flagged, "{rep:?}");
    }
}
