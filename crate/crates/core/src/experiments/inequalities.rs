//! Hardy, Kato and Tix constants.
//!
//! Hardy's ratio ‖|x|⁻¹ψ‖/‖∇ψ‖ is evaluated by quadrature on the family
//! ψ_ε(r) = r^{ε-1/2} e^{-r}, which concentrates at the origin as ε → 0.
//! The Kato and Tix constants are the largest eigenvalues of the symmetric
//! pencils (V, T) of the |x|⁻¹ form against |p| and λ(p)/c on a Galerkin
//! space, so they approach the sharp constants from below.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DVector;

use crate::channels::ChannelSpec;
use crate::eigen::generalized_largest;
use crate::error::{config, Result};
use crate::grid::RadialGrid;
use crate::operator::{assemble_with, ChannelPotential, Kinetic, Scheme};
use crate::params::{PhysParams, HARDY_CONSTANT, KATO_CONSTANT, TIX_CONSTANT};
use crate::quadrature::{exp_sinh, tanh_sinh};

/// Relative slack allowed above a theoretical constant.
pub const CONSTANT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    pub inequality_name: String,
    pub trial_family_description: String,
    pub max_ratio: f64,
    pub theoretical_constant: f64,
    /// theoretical_constant - max_ratio.
    pub margin: f64,
    pub sample_count: usize,
    /// One label and ratio per trial member or channel.
    pub trial_labels: Vec<String>,
    pub ratios: Vec<f64>,
    pub flagged: bool,
}

impl InequalityReport {
    fn new(name: &str, description: String, constant: f64, sample_count: usize, trials: Vec<(String, f64)>) -> Self {
        let max_ratio = trials.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        let (trial_labels, ratios) = trials.into_iter().unzip();
        Self {
            inequality_name: name.into(),
            trial_family_description: description,
            max_ratio,
            theoretical_constant: constant,
            margin: constant - max_ratio,
            sample_count,
            trial_labels,
            ratios,
            flagged: !(max_ratio <= constant * (1.0 + CONSTANT_SLACK)),
        }
    }
}

/// ‖|x|⁻¹ψ_ε‖/‖∇ψ_ε‖ for ψ_ε(r) = r^{ε-1/2} e^{-r}.
pub fn hardy_ratio(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(config(alloc::format!("Hardy exponent must be positive, got {eps}")));
    }
    let d = eps - 0.5;
    // |ψ/r|² r² = r^{2ε-1} e^{-2r}, |ψ'|² r² = (d - r)² r^{2ε-1} e^{-2r}
    // On [0, 1] u = r^{2ε} turns r^{2ε-1} dr into du/(2ε).
    let head = tanh_sinh(
        |pt| {
            let r = pt.x.powf(0.5 / eps);
            let e = (-2.0 * r).exp() / (2.0 * eps);
            [e, (d - r) * (d - r) * e]
        },
        0.0,
        1.0,
        1e-13,
    )?;
    let tail = exp_sinh(
        |pt| {
            let r = pt.x;
            let e = r.powf(2.0 * eps - 1.0) * (-2.0 * r).exp();
            [e, (d - r) * (d - r) * e]
        },
        1.0,
        1.0,
        1e-13,
    )?;
    Ok(((head[0] + tail[0]) / (head[1] + tail[1])).sqrt())
}

pub fn hardy_check(exponents: &[f64]) -> Result<InequalityReport> {
    if exponents.is_empty() {
        return Err(config("Hardy check needs at least one exponent"));
    }
    let trials = exponents
        .iter()
        .map(|&e| Ok((alloc::format!("eps={e}"), hardy_ratio(e)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::new(
        "hardy",
        "r^(eps-1/2) exp(-r), position-space quadrature".into(),
        HARDY_CONSTANT,
        exponents.len(),
        trials,
    ))
}

fn unit_coulomb(channel: ChannelSpec, relativistic: Option<PhysParams>) -> ChannelPotential {
    // strength -1 turns -Z/|x| into +1/|x|
    ChannelPotential {
        channel,
        strength: -1.0,
        relativistic,
    }
}

fn pencil_sup(grid: &RadialGrid, kernel: &ChannelPotential, kinetic: &Kinetic, scheme: Scheme) -> Result<f64> {
    let (m, kin, _) = assemble_with(grid, kernel, kinetic, scheme)?;
    generalized_largest(&(&m - &kin), &kin)
}

/// (f, |x|⁻¹ f)/(f, |p| f) for nodal values f on the grid, orbital channel l = 0.
pub fn kato_ratio(grid: &RadialGrid, scheme: Scheme, f: &[f64]) -> Result<f64> {
    let ch = ChannelSpec::new(-1)?;
    let (m, kin, basis) = assemble_with(grid, &unit_coulomb(ch, None), &Kinetic::Magnitude, scheme)?;
    let x = DVector::from_vec(basis.from_nodal(f));
    let t = x.dot(&(&kin * &x));
    Ok((x.dot(&(&m * &x)) - t) / t)
}

pub fn kato_check(grid: &RadialGrid, scheme: Scheme) -> Result<InequalityReport> {
    let ch = ChannelSpec::new(-1)?;
    let sup = pencil_sup(grid, &unit_coulomb(ch, None), &Kinetic::Magnitude, scheme)?;
    Ok(InequalityReport::new(
        "kato",
        alloc::format!("{scheme:?} space on {} nodes, orbital channel l=0", grid.len()),
        KATO_CONSTANT,
        grid.len(),
        alloc::vec![(String::from("l=0"), sup)],
    ))
}

pub fn tix_check(kappas: &[i32], grid: &RadialGrid, params: &PhysParams, scheme: Scheme) -> Result<InequalityReport> {
    if kappas.is_empty() {
        return Err(config("Tix check needs at least one channel"));
    }
    params.validate()?;
    let trials = kappas
        .iter()
        .map(|&kappa| {
            let ch = ChannelSpec::new(kappa)?;
            let sup = pencil_sup(
                grid,
                &unit_coulomb(ch, Some(*params)),
                &Kinetic::LambdaOverC(*params),
                scheme,
            )?;
            Ok((alloc::format!("kappa={kappa}"), sup))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::new(
        "tix",
        alloc::format!("{scheme:?} space on {} nodes, projected channels", grid.len()),
        TIX_CONSTANT,
        grid.len() * kappas.len(),
        trials,
    ))
}

/// Grids and families for the three checks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalitySettings {
    pub n: usize,
    pub scheme: Scheme,
    pub hardy_exponents: Vec<f64>,
    pub kato_stretch: f64,
    /// Tix grid scale in units of mc.
    pub tix_scale: f64,
    pub tix_stretch: f64,
    pub tix_kappas: Vec<i32>,
}

impl Default for InequalitySettings {
    fn default() -> Self {
        Self {
            n: 300,
            scheme: Scheme::Galerkin,
            hardy_exponents: alloc::vec![0.5, 0.25, 0.1, 0.05, 0.02, 0.01],
            kato_stretch: 1.0,
            tix_scale: 1.0,
            tix_stretch: 3.0,
            tix_kappas: alloc::vec![-1, 1],
        }
    }
}

/// Hardy, Kato and Tix reports in that order.
pub fn inequality_suite(settings: &InequalitySettings, params: &PhysParams) -> Result<Vec<InequalityReport>> {
    let kato_grid = RadialGrid::build_stretched(settings.n, 1.0, settings.kato_stretch)?;
    let tix_grid = RadialGrid::build_stretched(
        settings.n,
        settings.tix_scale * params.compton_momentum(),
        settings.tix_stretch,
    )?;
    Ok(alloc::vec![
        hardy_check(&settings.hardy_exponents)?,
        kato_check(&kato_grid, settings.scheme)?,
        tix_check(&settings.tix_kappas, &tix_grid, params, settings.scheme)?,
    ])
}
