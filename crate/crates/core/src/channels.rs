//! Partial-wave reduction of momentum-space kernels.
//!
//! A radial potential commutes with rotations, so the projected Coulomb form
//! splits into channels κ. In channel κ the upper spinor component carries
//! orbital momentum `l_up` and the lower one `l_down`, and a convolution
//! kernel K(|p - q|) reduces to the scalar kernel
//! 2π ∫₋₁¹ K(√(p² + q² - 2pqt)) P_l(t) dt under the pairing ∫ · q² dq.
//!
//! Fourier transforms use the symmetric (2π)^{-3/2} convention, so
//! multiplication by -Z/|x| is convolution with -Z/(2π²|p - q|²).

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::dirac::a_pm_unchecked;
use crate::error::{config, domain, Error, Result};
use crate::grid::RadialGrid;
use crate::params::PhysParams;
use crate::quadrature::{integrate_adaptive_scalar, AdaptiveOptions};
use crate::special::{legendre_p, legendre_q_zm1, scaled_spherical_in, spherical_jn};

/// Largest |κ| supported by the channel kernels.
pub const MAX_ABS_KAPPA: i32 = 3;

/// An angular-momentum channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelSpec {
    pub kappa: i32,
    pub l_up: usize,
    pub l_down: usize,
    /// Twice the total angular momentum, 2j = 2|κ| - 1.
    pub two_j: u32,
}

impl ChannelSpec {
    pub fn new(kappa: i32) -> Result<Self> {
        if kappa == 0 {
            return Err(domain("kappa must be nonzero"));
        }
        if kappa.abs() > MAX_ABS_KAPPA {
            return Err(config(alloc::format!(
                "|kappa| <= {MAX_ABS_KAPPA} supported, got {kappa}"
            )));
        }
        Ok(Self {
            kappa,
            l_up: orbital(kappa),
            l_down: orbital(-kappa),
            two_j: 2 * kappa.unsigned_abs() - 1,
        })
    }

    pub fn j(&self) -> f64 {
        0.5 * self.two_j as f64
    }
}

fn orbital(kappa: i32) -> usize {
    if kappa > 0 {
        kappa as usize
    } else {
        (-kappa - 1) as usize
    }
}

/// Spherical harmonic Y_lm(θ, φ) with the Condon–Shortley phase.
pub fn spherical_harmonic(l: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
    let ma = m.unsigned_abs() as usize;
    if ma > l {
        return Complex64::new(0.0, 0.0);
    }
    let x = theta.cos();
    // P_l^{|m|}(x) including (-1)^m.
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 0..ma {
        pmm *= -((2 * k + 1) as f64) * s;
    }
    let plm = if l == ma {
        pmm
    } else {
        let mut a = pmm;
        let mut b = x * (2 * ma + 1) as f64 * pmm;
        for ll in (ma + 2)..=l {
            let c = ((2 * ll - 1) as f64 * x * b - (ll + ma - 1) as f64 * a) / (ll - ma) as f64;
            a = b;
            b = c;
        }
        b
    };
    let mut ratio = 1.0;
    for k in (l - ma + 1)..=(l + ma) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let y = Complex64::from_polar(norm * plm, ma as f64 * phi);
    if m < 0 {
        let sign = if ma.is_multiple_of(2) { 1.0 } else { -1.0 };
        y.conj() * sign
    } else {
        y
    }
}

/// Two-component spherical spinor Ω_{κ,m}(θ, φ), m a half-integer.
pub fn spherical_spinor(kappa: i32, m: f64, theta: f64, phi: f64) -> [Complex64; 2] {
    let l = orbital(kappa);
    let lf = l as f64;
    let den = 2.0 * lf + 1.0;
    let m_lo = (m - 0.5).round() as i32;
    let m_hi = (m + 0.5).round() as i32;
    let y_lo = spherical_harmonic(l, m_lo, theta, phi);
    let y_hi = spherical_harmonic(l, m_hi, theta, phi);
    if kappa < 0 {
        [
            y_lo * ((lf + m + 0.5) / den).sqrt(),
            y_hi * ((lf - m + 0.5) / den).sqrt(),
        ]
    } else {
        [
            -y_lo * ((lf - m + 0.5) / den).max(0.0).sqrt(),
            y_hi * ((lf + m + 0.5) / den).max(0.0).sqrt(),
        ]
    }
}

/// 2π ∫₋₁¹ K(|p - q|) P_l(t) dt by adaptive quadrature, with |p - q|
/// computed as √((p - q)² + 2pq(1 - t)).
pub fn angular_reduce<F>(kernel: F, l: usize, p: f64, q: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(p > 0.0 && q > 0.0) {
        return Err(domain(alloc::format!("angular_reduce needs p, q > 0, got {p}, {q}")));
    }
    let d = p - q;
    let opts = AdaptiveOptions {
        abs_tol: abs_tol / (2.0 * PI),
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let f = |t: f64| kernel((d * d + 2.0 * p * q * (1.0 - t)).sqrt()) * legendre_p(l, t);
    // split at t = 0 and bisect towards t = 1 where singular kernels blow up
    let mut total = 0.0;
    let mut a = -1.0;
    let mut b = 0.0;
    for _ in 0..60 {
        total += integrate_adaptive_scalar(f, a, b, opts)?;
        a = b;
        b = 0.5 * (b + 1.0);
        if 1.0 - a < 1e-15 {
            break;
        }
    }
    total += integrate_adaptive_scalar(f, a, 1.0, opts).or_else(|e| match e {
        Error::NonConvergence { estimate, .. } => Ok(estimate),
        other => Err(other),
    })?;
    Ok(2.0 * PI * total)
}

fn check_off_diagonal(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && q > 0.0) || !p.is_finite() || !q.is_finite() {
        return Err(domain(alloc::format!("kernel needs finite p, q > 0, got {p}, {q}")));
    }
    if p == q {
        return Err(Error::SingularPoint(p));
    }
    Ok(())
}

/// Q_l at z = (p² + q²)/(2pq), with z - 1 = (p - q)²/(2pq) formed directly.
#[inline]
pub(crate) fn q_of_momenta(l: usize, p: f64, q: f64) -> f64 {
    q_of_gap(l, p, q, p - q)
}

/// As [`q_of_momenta`] with the gap p - q supplied by the caller.
#[inline]
pub(crate) fn q_of_gap(l: usize, p: f64, q: f64, gap: f64) -> f64 {
    // ratios avoid under- and overflow at tiny momenta
    let zm1 = 0.5 * (gap / p) * (gap / q);
    legendre_q_zm1(l, 1.0 + zm1, zm1)
}

/// Channel-l kernel of -Z/|x|: -Z Q_l(z)/(π p q), z = (p² + q²)/(2pq).
pub fn coulomb_radial_kernel(l: usize, p: f64, q: f64, params: &PhysParams) -> Result<f64> {
    check_off_diagonal(p, q)?;
    Ok(-params.z * q_of_momenta(l, p, q) / (PI * p * q))
}

/// Channel kernel of the Foldy–Wouthuysen projected Coulomb potential:
/// a₊(p)a₊(q) k_{l_up} + a₋(p)a₋(q) k_{l_down}.
pub fn br_channel_kernel(channel: &ChannelSpec, p: f64, q: f64, params: &PhysParams) -> Result<f64> {
    check_off_diagonal(p, q)?;
    let (ap, am) = a_pm_unchecked(p, params);
    let (aq, bq) = a_pm_unchecked(q, params);
    Ok(br_kernel_from_coefficients(channel, p, q, params.z, ap * aq, am * bq))
}

#[inline]
pub(crate) fn br_kernel_from_coefficients(
    channel: &ChannelSpec,
    p: f64,
    q: f64,
    z: f64,
    upper: f64,
    lower: f64,
) -> f64 {
    let mut v = upper * q_of_momenta(channel.l_up, p, q);
    if lower != 0.0 {
        v += lower * q_of_momenta(channel.l_down, p, q);
    }
    -z * v / (PI * p * q)
}

/// Radial profile χ of a multiplication operator χ(|y|/R).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChiProfile {
    /// χ(y) = exp(-|y|²/2).
    Gaussian,
    /// A compactly supported smooth bump; it has no closed-form transform.
    Bump,
}

/// Channel-l momentum kernel of multiplication by χ(|y|/R).
///
/// For the Gaussian profile this is
/// 4π(2π)^{-3/2} R³ e^{-R²(p-q)²/2} · e^{-a} i_l(a), a = R²pq.
pub fn multiplier_channel_kernel(profile: ChiProfile, l: usize, r: f64, p: f64, q: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain(alloc::format!("scale R must be positive, got {r}")));
    }
    if !(p >= 0.0 && q >= 0.0) {
        return Err(domain("multiplier kernel needs p, q >= 0"));
    }
    match profile {
        ChiProfile::Gaussian => {
            let d = r * (p - q);
            let a = r * r * p * q;
            Ok(4.0 * PI * (2.0 * PI).powf(-1.5) * r * r * r * (-0.5 * d * d).exp() * scaled_spherical_in(l, a))
        }
        ChiProfile::Bump => Err(config(
            "chi profile `bump` has no analytic Fourier transform; use `gaussian`",
        )),
    }
}

/// Position-space value of the profile.
pub fn chi_value(profile: ChiProfile, y: f64) -> Result<f64> {
    match profile {
        ChiProfile::Gaussian => Ok((-0.5 * y * y).exp()),
        ChiProfile::Bump => {
            if y.abs() >= 1.0 {
                Ok(0.0)
            } else {
                Ok((1.0 - 1.0 / (1.0 - y * y)).exp())
            }
        }
    }
}

/// Which way a spherical Bessel transform runs. The transform is its own
/// inverse; the flag only documents intent at call sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

/// Order-l spherical Bessel transform g(k) = √(2/π) ∫ j_l(kr) f(r) r² dr,
/// sampled and evaluated on the nodes of `grid`.
pub fn spherical_bessel_transform(
    l: usize,
    grid: &RadialGrid,
    samples: &[f64],
    _direction: TransformDirection,
) -> Vec<f64> {
    assert_eq!(samples.len(), grid.len(), "sample count must match the grid");
    let pref = (2.0 / PI).sqrt();
    let nodes = grid.nodes();
    let weights = grid.weights();
    nodes
        .iter()
        .map(|&k| {
            let mut acc = 0.0;
            for ((&r, &w), &f) in nodes.iter().zip(weights).zip(samples) {
                acc += w * r * r * spherical_jn(l, k * r) * f;
            }
            pref * acc
        })
        .collect()
}

/// Which kernel a [`RadialKernel`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelKind {
    /// Plain Coulomb kernel in the upper orbital channel.
    Coulomb,
    /// Foldy–Wouthuysen projected Coulomb kernel.
    BrownRavenhall,
    /// Multiplication by χ(|y|/R) in the upper orbital channel.
    Multiplier { profile: ChiProfile, r: f64 },
}

/// A scalar kernel k(p, q) of one channel under the pairing ∫ · q² dq.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernel {
    pub channel: ChannelSpec,
    pub kind: KernelKind,
    pub params: PhysParams,
}

impl RadialKernel {
    pub fn new(channel: ChannelSpec, kind: KernelKind, params: PhysParams) -> Self {
        Self { channel, kind, params }
    }

    /// Whether the kernel is log-singular on p = q.
    pub fn singular(&self) -> bool {
        !matches!(self.kind, KernelKind::Multiplier { .. })
    }

    pub fn eval(&self, p: f64, q: f64) -> Result<f64> {
        match self.kind {
            KernelKind::Coulomb => coulomb_radial_kernel(self.channel.l_up, p, q, &self.params),
            KernelKind::BrownRavenhall => br_channel_kernel(&self.channel, p, q, &self.params),
            KernelKind::Multiplier { profile, r } => multiplier_channel_kernel(profile, self.channel.l_up, r, p, q),
        }
    }
}
