//! Randomized checks of the half-space extension, the Dirichlet-to-Neumann
//! map and the trace inequality.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extension::{
    dirichlet_energy, dtn_apply, extend, minimality_check, richardson_dtn, trace_inequality_margin, BoundaryFunction,
    EnergyRoute, ExtensionField, XGrid,
};
use crate::grid::RadialGrid;
use crate::params::PhysParams;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DtnSettings {
    pub n: usize,
    pub s: f64,
    pub energy_samples: usize,
    pub minimality_samples: usize,
    pub trace_samples: usize,
    pub seed: u64,
}

impl Default for DtnSettings {
    fn default() -> Self {
        Self {
            n: 200,
            s: 1.0,
            energy_samples: 20,
            minimality_samples: 50,
            trace_samples: 50,
            seed: 42,
        }
    }
}

/// Tolerances of the checks.
pub const ENERGY_TOLERANCE: f64 = 1e-7;
pub const RICHARDSON_TOLERANCE: f64 = 1e-8;
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DtnReport {
    /// Relative difference of the two energy routes, per sample.
    pub energy_differences: Vec<f64>,
    /// (E(v + aζ) - E(v))/E(v) per perturbation; all should be ≥ 0.
    pub minimality_gains: Vec<f64>,
    /// Largest relative deviation of the finite-difference DtN from λu.
    pub richardson_residual: f64,
    /// margin/scale per randomized extension.
    pub trace_margins: Vec<f64>,
    /// margin/scale for the saturating extension e^{-mc² x}.
    pub equality_margin: f64,
    pub tail_warnings: usize,
    pub flagged: bool,
}

fn random_datum(rng: &mut ChaCha8Rng, grid: &RadialGrid, s: f64) -> BoundaryFunction {
    let a: f64 = rng.random_range(0.2..3.0);
    let b: f64 = rng.random_range(-1.0..1.0);
    let c: f64 = rng.random_range(0.5..2.0);
    let d: f64 = rng.random_range(-1.0..1.0);
    BoundaryFunction::from_fn(grid.clone(), |p| {
        let t = p / s;
        Complex64::new((-a * t * t).exp() + d * (-c * t).exp(), b / (1.0 + (c * t).powi(4)))
    })
}

pub fn dtn_check(settings: &DtnSettings, params: &PhysParams) -> Result<DtnReport> {
    params.validate()?;
    let grid = RadialGrid::build(settings.n, settings.s)?;
    let xg = XGrid::for_params(params, grid.p_max())?;
    let mc2 = params.rest_energy();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut tail_warnings = 0;

    let mut energy_differences = Vec::with_capacity(settings.energy_samples);
    let mut richardson_residual = 0.0f64;
    for _ in 0..settings.energy_samples {
        let u = random_datum(&mut rng, &grid, settings.s);
        let v = extend(&u, &xg, params)?;
        let ex = dirichlet_energy(&v, EnergyRoute::XQuadrature, params);
        let em = dirichlet_energy(&v, EnergyRoute::MomentumFormula, params);
        tail_warnings += usize::from(ex.tail_warning);
        energy_differences.push((ex.value - em.value).abs() / em.value);
        let exact = dtn_apply(&u, params);
        let scale = exact.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for (fd, ex) in richardson_dtn(&u, params).iter().zip(&exact.values) {
            richardson_residual = richardson_residual.max((fd - ex).norm() / scale);
        }
    }

    let mut minimality_gains = Vec::with_capacity(settings.minimality_samples);
    for _ in 0..settings.minimality_samples {
        let u = random_datum(&mut rng, &grid, settings.s);
        let k: f64 = rng.random_range(0.2..5.0) * mc2;
        let width: f64 = rng.random_range(0.5..3.0) * settings.s;
        let phase: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        let amplitude: f64 = rng.random_range(-1.0..1.0);
        let zeta = ExtensionField::from_fn(u.clone(), xg.clone(), |x, _, p| {
            Complex64::from_polar(x * mc2 * (-k * x).exp() / (1.0 + (p / width).powi(2)), phase)
        });
        let (e0, e1) = minimality_check(&u, &zeta, amplitude, params)?;
        minimality_gains.push((e1 - e0) / e0);
    }

    let mut trace_margins = Vec::with_capacity(settings.trace_samples);
    for _ in 0..settings.trace_samples {
        let u = random_datum(&mut rng, &grid, settings.s);
        let k1: f64 = rng.random_range(0.3..4.0) * mc2;
        let k2: f64 = rng.random_range(0.3..4.0) * mc2;
        let g: f64 = rng.random_range(-2.0..2.0);
        let phi = ExtensionField::from_fn(u.clone(), xg.clone(), |x, i, _| {
            u.values[i] * ((-k1 * x).exp() + g * mc2 * x * (-k2 * x).exp())
        });
        let m = trace_inequality_margin(&phi, params);
        trace_margins.push(m.margin / m.scale);
    }
    let u = random_datum(&mut rng, &grid, settings.s);
    let sat = ExtensionField::from_fn(u.clone(), xg.clone(), |x, i, _| u.values[i] * (-mc2 * x).exp());
    let m = trace_inequality_margin(&sat, params);
    let equality_margin = m.margin / m.scale;

    let flagged = energy_differences.iter().any(|d| !(*d < ENERGY_TOLERANCE))
        || minimality_gains.iter().any(|g| !(*g >= -1e-12))
        || !(richardson_residual < RICHARDSON_TOLERANCE)
        || trace_margins.iter().any(|m| !(*m >= -TRACE_TOLERANCE))
        || !(equality_margin.abs() < TRACE_TOLERANCE);
    Ok(DtnReport {
        energy_differences,
        minimality_gains,
        richardson_residual,
        trace_margins,
        equality_margin,
        tail_warnings,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        for params in [PhysParams::default(), PhysParams::new(1.0, 1.0, 0.0).unwrap()] {
            let settings = DtnSettings {
                energy_samples: 5,
                minimality_samples: 5,
                trace_samples: 5,
                ..Default::default()
            };
            let rep = dtn_check(&settings, &params).unwrap();
            assert!(!rep.flagged, "{rep:?}");
            assert_eq!(rep.minimality_gains.len(), 5);
            assert_eq!(rep.tail_warnings, 0);
        }
    }
}
