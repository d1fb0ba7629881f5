//! The η → 0 limit of the projected Coulomb form on dilated test functions.
//!
//! With φ_η(y) = η^{3/2} φ(η y) and p = ηu, q = ηv the channel form becomes
//!
//!   (φ_η, V φ_η) = -(Zη/π) ∫∫ φ̂(u) φ̂(v) u v [a₊(ηu)a₊(ηv) Q_l(z) + a₋(ηu)a₋(ηv) Q_l'(z)] du dv,
//!
//! a Coulomb term linear in η plus a remainder that starts at η³. The two
//! parts are integrated separately so the remainder keeps its own relative
//! accuracy.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::ChannelSpec;
use crate::dirac::a_plus_minus;
use crate::error::{config, Result};
use crate::experiments::commutator::fit_line;
use crate::params::PhysParams;
use crate::quadrature::{exp_sinh, tanh_sinh};
use crate::special::legendre_q_zm1;

/// Smooth radial test functions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TestFunction {
    /// φ(y) = e^{-y²/2}, whose transform is φ̂(u) = e^{-u²/2}.
    #[default]
    Gaussian,
}

impl TestFunction {
    pub fn position(&self, y: f64) -> f64 {
        match self {
            TestFunction::Gaussian => (-0.5 * y * y).exp(),
        }
    }

    pub fn momentum(&self, u: f64) -> f64 {
        match self {
            TestFunction::Gaussian => (-0.5 * u * u).exp(),
        }
    }
}

/// (φ, |y|⁻¹ φ) = ∫ φ(y)² y dy by position-space quadrature.
pub fn inverse_distance_expectation(phi: TestFunction) -> Result<f64> {
    let f = |pt: crate::quadrature::DePoint| {
        let v = phi.position(pt.x);
        [v * v * pt.x]
    };
    Ok(tanh_sinh(f, 0.0, 1.0, 1e-13)?[0] + exp_sinh(f, 1.0, 1.0, 1e-13)?[0])
}

/// ∫₀^∞ g(v) dv for an integrand log-singular at v = u, split at u and 2u.
/// `g` receives v and the exact difference u - v.
fn around<G: FnMut(f64, f64) -> f64>(u: f64, mut g: G) -> Result<f64> {
    let tol = 1e-12;
    let a = tanh_sinh(|pt| [g(pt.x, pt.from_right)], 0.0, u, tol)?[0];
    let b = tanh_sinh(|pt| [g(pt.x, -pt.from_left)], u, 2.0 * u, tol)?[0];
    let c = if 2.0 * u < 1.0 {
        // from 2u up to 1 the integrand is smooth in ln v
        let mid = tanh_sinh(
            |pt| {
                let v = pt.x.exp();
                [g(v, u - v) * v]
            },
            (2.0 * u).ln(),
            0.0,
            tol,
        )?[0];
        mid + exp_sinh(|pt| [g(pt.x, u - pt.x)], 1.0, 1.0, tol)?[0]
    } else {
        exp_sinh(|pt| [g(pt.x, u - pt.x)], 2.0 * u, u, tol)?[0]
    };
    Ok(a + b + c)
}

/// ∫₀^∞ h(u) du split at 1.
fn half_line<H: FnMut(f64) -> f64>(mut h: H) -> Result<f64> {
    let tol = 1e-11;
    let mut failure = None;
    let mut guard = |x: f64| {
        let v = h(x);
        if !v.is_finite() {
            failure.get_or_insert(x);
        }
        v
    };
    let a = tanh_sinh(|pt| [guard(pt.x)], 0.0, 1.0, tol)?[0];
    let b = exp_sinh(|pt| [guard(pt.x)], 1.0, 1.0, tol)?[0];
    match failure {
        Some(x) => Err(crate::Error::NonConvergence {
            what: alloc::format!("scaling-limit inner integral at u = {x}"),
            estimate: a + b,
            error: f64::NAN,
        }),
        None => Ok(a + b),
    }
}

fn q(l: usize, u: f64, v: f64, gap: f64) -> f64 {
    let zm1 = 0.5 * (gap / u) * (gap / v);
    legendre_q_zm1(l, 1.0 + zm1, zm1)
}

/// ∫∫ φ̂φ̂ u v Q_l(z) du dv.
fn coulomb_part(phi: TestFunction, channel: ChannelSpec) -> Result<f64> {
    half_line(|u| {
        let inner = around(u, |v, gap| phi.momentum(v) * v * q(channel.l_up, u, v, gap));
        inner.map_or(f64::NAN, |i| phi.momentum(u) * u * i)
    })
}

/// ∫∫ φ̂φ̂ u v [(a₊a₊ - 1) Q_l + a₋a₋ Q_l'] du dv at scale η.
fn remainder_part(phi: TestFunction, channel: ChannelSpec, eta: f64, params: &PhysParams) -> Result<f64> {
    let coeffs = |x: f64| {
        let (ap, am) = a_plus_minus(eta * x, params).expect("finite momentum");
        (am * am / (1.0 + ap), am)
    };
    half_line(|u| {
        let (du, mu) = coeffs(u);
        let inner = around(u, |v, gap| {
            let (dv, mv) = coeffs(v);
            // a₊(u)a₊(v) - 1 with a₊ = 1 - δ
            let upper = du * dv - du - dv;
            let mut s = upper * q(channel.l_up, u, v, gap);
            if mu * mv != 0.0 {
                s += mu * mv * q(channel.l_down, u, v, gap);
            }
            phi.momentum(v) * v * s
        });
        inner.map_or(f64::NAN, |i| phi.momentum(u) * u * i)
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingLimitReport {
    pub eta_values: Vec<f64>,
    /// (φ_η, V φ_η).
    pub form_values: Vec<f64>,
    /// Form minus its Coulomb part -Zη(φ, |y|⁻¹φ).
    pub remainder_values: Vec<f64>,
    /// η⁻² (φ_η, V φ_η).
    pub rescaled_values: Vec<f64>,
    /// A in the fit form ≈ -Aη + Bη^e.
    pub leading_coefficient: f64,
    pub remainder_coefficient: f64,
    /// e, from the log-log slope of the remainder.
    pub remainder_exponent: f64,
    /// Z·(φ, |y|⁻¹φ) from position-space quadrature.
    pub expected_leading: f64,
    pub leading_relative_error: f64,
    pub monotone_divergence: bool,
    pub flagged: bool,
}

/// Smallest remainder exponent accepted without flagging.
pub const MIN_REMAINDER_EXPONENT: f64 = 1.7;

pub fn scaling_limit(
    phi: TestFunction,
    eta_values: &[f64],
    channel: ChannelSpec,
    params: &PhysParams,
) -> Result<ScalingLimitReport> {
    params.validate()?;
    if eta_values.len() < 2
        || eta_values.windows(2).any(|w| !(w[1] < w[0]))
        || eta_values.iter().any(|&e| !(e > 0.0 && e <= 0.5))
    {
        return Err(config(
            "eta values must lie in (0, 0.5], decrease, and number at least two",
        ));
    }
    if !(params.z > 0.0) {
        return Err(config("scaling limit needs Z > 0"));
    }
    let z = params.z;
    let i0 = coulomb_part(phi, channel)?;
    let mut form_values = Vec::with_capacity(eta_values.len());
    let mut remainder_values = Vec::with_capacity(eta_values.len());
    for &eta in eta_values {
        let pref = -z * eta / PI;
        let i1 = remainder_part(phi, channel, eta, params)?;
        form_values.push(pref * (i0 + i1));
        remainder_values.push(pref * i1);
    }
    let rescaled_values: Vec<f64> = form_values.iter().zip(eta_values).map(|(f, e)| f / (e * e)).collect();

    let lx: Vec<f64> = eta_values.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = remainder_values.iter().map(|r| r.abs().ln()).collect();
    let (exponent, _, _) = fit_line(&lx, &ly);
    // least squares for (A, B) with e fixed, rows scaled by 1/η
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&eta, &f) in eta_values.iter().zip(&form_values) {
        let a = -1.0;
        let b = eta.powf(exponent - 1.0);
        let y = f / eta;
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        r1 += a * y;
        r2 += b * y;
    }
    let det = s11 * s22 - s12 * s12;
    let leading = (r1 * s22 - r2 * s12) / det;
    let remainder_coefficient = (s11 * r2 - s12 * r1) / det;

    let expected_leading = z * inverse_distance_expectation(phi)?;
    let same_sign = remainder_values
        .iter()
        .all(|r| r.signum() == remainder_values[0].signum() && *r != 0.0);
    let monotone_divergence = rescaled_values.windows(2).all(|w| w[1] < w[0]);
    let flagged = !leading.is_finite()
        || !exponent.is_finite()
        || !(leading > 0.0)
        || !(exponent >= MIN_REMAINDER_EXPONENT)
        || !same_sign
        || form_values.iter().any(|f| !(*f < 0.0));
    Ok(ScalingLimitReport {
        eta_values: eta_values.to_vec(),
        form_values,
        remainder_values,
        rescaled_values,
        leading_coefficient: leading,
        remainder_coefficient,
        remainder_exponent: exponent,
        expected_leading,
        leading_relative_error: (leading - expected_leading).abs() / expected_leading,
        monotone_divergence,
        flagged,
    })
}
