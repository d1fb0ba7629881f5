//! Random scans of the pointwise Foldy–Wouthuysen identities and estimates.

use core::f64::consts::{PI, SQRT_2};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dirac::{
    a_plus_minus, beta, difference_kernel_bound, dirac_symbol, fw_difference_kernel, fw_unitary, lambda_of,
    projector_symbol, EnergySign, MatrixTag, MomentumVector, SpinorMatrix4,
};
use crate::error::Result;
use crate::params::PhysParams;

/// Log-uniform sample in [lo, hi].
fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let t: f64 = rng.random_range(0.0..1.0);
    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
}

fn random_vector(rng: &mut ChaCha8Rng, magnitude: f64) -> MomentumVector {
    let ct: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    MomentumVector::spherical(magnitude, ct.acos(), phi)
}

/// Worst residuals of the pointwise algebra over random momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlgebraScan {
    pub samples: usize,
    /// max of ‖U U* - I‖ and ‖U* U - I‖ (entrywise).
    pub unitarity: f64,
    /// max ‖U D U* - λβ‖ / λ.
    pub diagonalization: f64,
    /// max over Λ±² = Λ±, Λ₊Λ₋ = 0, Λ₊ + Λ₋ = I, Λ± = Λ±*.
    pub projector: f64,
}

impl AlgebraScan {
    pub fn passed(&self) -> bool {
        self.unitarity < 1e-12 && self.diagonalization < 1e-11 && self.projector < 1e-12
    }
}

pub fn algebra_scan(samples: usize, seed: u64, params: &PhysParams) -> Result<AlgebraScan> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc = params.compton_momentum();
    let mut out = AlgebraScan {
        samples,
        unitarity: 0.0,
        diagonalization: 0.0,
        projector: 0.0,
    };
    for _ in 0..samples {
        let mag = log_uniform(&mut rng, 1e-4 * mc, 1e4 * mc);
        let p = random_vector(&mut rng, mag);
        let u = fw_unitary(&p, params, false);
        let ui = fw_unitary(&p, params, true);
        out.unitarity = out
            .unitarity
            .max(u.unitarity_defect())
            .max((u * ui - SpinorMatrix4::identity()).max_abs());
        let lam = lambda_of(mag, params)?;
        let d = u * dirac_symbol(&p, params) * ui;
        let target = SpinorMatrix4::new(beta().entries() * Complex64::from(lam), MatrixTag::General);
        out.diagonalization = out.diagonalization.max((d - target).max_abs() / lam);
        let lp = projector_symbol(&p, EnergySign::Positive, params);
        let lm = projector_symbol(&p, EnergySign::Negative, params);
        let sum = SpinorMatrix4::new(lp.entries() + lm.entries(), MatrixTag::General);
        let worst = [
            (lp * lp - lp).max_abs(),
            (lm * lm - lm).max_abs(),
            (lp * lm).max_abs(),
            (sum - SpinorMatrix4::identity()).max_abs(),
            lp.hermiticity_defect(),
            lm.hermiticity_defect(),
        ];
        out.projector = worst.iter().fold(out.projector, |m, &v| m.max(v));
    }
    Ok(out)
}

/// Largest ratio of each quantity to its analytic bound over random samples.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundScan {
    pub samples: usize,
    /// max ‖K_R(p, q)‖₂ · mcR / (5√2 |q|).
    pub kernel_ratio: f64,
    /// max |a₊(x) - 1| · 2m²c² / x².
    pub a_plus_ratio: f64,
    /// max |a₋(x)| · √2 mc / x.
    pub a_minus_ratio: f64,
}

/// Allowed excess of a bound ratio over 1.
pub const BOUND_SLACK: f64 = 1e-10;

impl BoundScan {
    pub fn passed(&self) -> bool {
        let limit = 1.0 + BOUND_SLACK;
        self.kernel_ratio <= limit && self.a_plus_ratio <= limit && self.a_minus_ratio <= limit
    }
}

/// Samples (p, q, R) with R ∈ [1, 10³] and momenta log-uniform over eight
/// decades around mc, and x = η|p| over the same range.
pub fn bound_scan(samples: usize, seed: u64, params: &PhysParams) -> Result<BoundScan> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc = params.compton_momentum();
    let mut out = BoundScan {
        samples,
        kernel_ratio: 0.0,
        a_plus_ratio: 0.0,
        a_minus_ratio: 0.0,
    };
    for _ in 0..samples {
        let r = log_uniform(&mut rng, 1.0, 1e3);
        let pm = log_uniform(&mut rng, 1e-4 * mc, 1e4 * mc);
        let qm = log_uniform(&mut rng, 1e-4 * mc, 1e4 * mc);
        let p = random_vector(&mut rng, pm);
        let q = random_vector(&mut rng, qm);
        let k = fw_difference_kernel(&p, &q, r, params)?;
        out.kernel_ratio = out
            .kernel_ratio
            .max(k.spectral_norm() / difference_kernel_bound(&q, r, params));

        let x = log_uniform(&mut rng, 1e-4 * mc, 1e4 * mc);
        let (ap, am) = a_plus_minus(x, params)?;
        // 1 - a₊ = a₋²/(1 + a₊) without cancellation
        let gap = am * am / (1.0 + ap);
        out.a_plus_ratio = out.a_plus_ratio.max(gap * 2.0 * mc * mc / (x * x));
        out.a_minus_ratio = out.a_minus_ratio.max(am * SQRT_2 * mc / x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_holds() {
        let scan = algebra_scan(1000, 7, &PhysParams::atomic(1.0)).unwrap();
        assert!(scan.passed(), "{scan:?}");
    }

    #[test]
    fn bounds_hold_and_are_nearly_sharp() {
        let scan = bound_scan(10_000, 11, &PhysParams::atomic(1.0)).unwrap();
        assert!(scan.passed(), "{scan:?}");
        // small momenta: a₋ ≈ x/(2mc), 1 - a₊ ≈ x²/(8m²c²)
        assert!(scan.a_minus_ratio > 0.7 && scan.a_minus_ratio < SQRT_2 / 2.0 + 1e-9);
        assert!(scan.a_plus_ratio > 0.24 && scan.a_plus_ratio < 0.25 + 1e-9);
        assert!(scan.kernel_ratio > 0.0);
        let again = bound_scan(10_000, 11, &PhysParams::atomic(1.0)).unwrap();
        assert_eq!(scan, again);
    }
}
