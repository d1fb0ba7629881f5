//! Decay of the commutator [χ_R, U⁻¹]U between a smooth cutoff in position
//! space and the Foldy–Wouthuysen rotation in momentum space.
//!
//! On one channel the spinor is described by the radial pair (f, g). The
//! cutoff acts on f and g with the multiplier kernels of orbital numbers
//! l_up and l_down, and U acts pointwise in p by the channel rotation. With
//! U⁻¹ = Uᵀ the commutator is χ - Uᵀ χ U.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;

use crate::channels::{multiplier_channel_kernel, ChannelSpec, ChiProfile};
use crate::dirac::channel_rotation;
use crate::error::{config, Result};
use crate::grid::{assemble_h12_metric, RadialGrid};
use crate::params::PhysParams;

/// Largest singular value of D^{1/2} A D^{-1/2}, the norm of A as an operator
/// on the weighted space with diagonal metric D.
pub fn operator_norm_h12(a: &DMatrix<f64>, metric: &[f64]) -> Result<f64> {
    if a.nrows() != metric.len() || a.ncols() != metric.len() {
        return Err(config(alloc::format!(
            "matrix is {}x{} but the metric has {} entries",
            a.nrows(),
            a.ncols(),
            metric.len()
        )));
    }
    if metric.iter().any(|&d| !(d > 0.0)) {
        return Err(config("metric weights must be positive"));
    }
    let sq: Vec<f64> = metric.iter().map(|d| d.sqrt()).collect();
    let b = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| sq[i] * a[(i, j)] / sq[j]);
    Ok(b.singular_values().max())
}

/// Nodal matrix of χ_R on one orbital channel: (X f)(p_i) = Σ_j w_j p_j² k(p_i, p_j) f(p_j).
fn multiplier_matrix(grid: &RadialGrid, profile: ChiProfile, l: usize, r: f64) -> Result<DMatrix<f64>> {
    let p = grid.nodes();
    let w = grid.weights();
    let n = p.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = w[j] * p[j] * p[j] * multiplier_channel_kernel(profile, l, r, p[i], p[j])?;
        }
    }
    Ok(m)
}

/// Nodal 2n×2n matrix of χ_R - Uᵀ χ_R U on the pair (f, g), f first.
pub fn commutator_matrix(
    grid: &RadialGrid,
    channel: ChannelSpec,
    profile: ChiProfile,
    r: f64,
    params: &PhysParams,
) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let up = multiplier_matrix(grid, profile, channel.l_up, r)?;
    let down = multiplier_matrix(grid, profile, channel.l_down, r)?;
    let rot = grid
        .nodes()
        .iter()
        .map(|&p| channel_rotation(p, channel.kappa, params))
        .collect::<Result<Vec<_>>>()?;
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (ri, rj) = (&rot[i], &rot[j]);
            let (ku, kd) = (up[(i, j)], down[(i, j)]);
            // (Uᵀ χ U)_{ab} = Σ_c R_i[c][a] K_c R_j[c][b]
            for a in 0..2 {
                for b in 0..2 {
                    let conj = ri[(0, a)] * ku * rj[(0, b)] + ri[(1, a)] * kd * rj[(1, b)];
                    let chi = match (a, b) {
                        (0, 0) => ku,
                        (1, 1) => kd,
                        _ => 0.0,
                    };
                    c[(a * n + i, b * n + j)] = chi - conj;
                }
            }
        }
    }
    Ok(c)
}

/// Commutator norms over a sweep of scales with a log-log fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommutatorDecayReport {
    pub r_values: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    /// Root-mean-square residual of the fit in ln(norm).
    pub fit_residual: f64,
    pub flagged: bool,
}

/// Fit threshold above which a decay report is flagged.
pub const COMMUTATOR_FIT_RESIDUAL_LIMIT: f64 = 0.1;

/// Least-squares line through (x, y): (slope, intercept, rms residual).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

pub fn commutator_decay(
    r_values: &[f64],
    grid: &RadialGrid,
    channel: ChannelSpec,
    profile: ChiProfile,
    params: &PhysParams,
) -> Result<CommutatorDecayReport> {
    if r_values.len() < 2 || r_values.windows(2).any(|w| !(w[0] < w[1])) || r_values[0] <= 0.0 {
        return Err(config("R values must be positive, increasing and at least two"));
    }
    let h = assemble_h12_metric(grid);
    let metric: Vec<f64> = h.weights.iter().chain(&h.weights).copied().collect();
    let mut norms = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let c = commutator_matrix(grid, channel, profile, r, params)?;
        norms.push(operator_norm_h12(&c, &metric)?);
    }
    let lx: Vec<f64> = r_values.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let (slope, intercept, residual) = fit_line(&lx, &ly);
    Ok(CommutatorDecayReport {
        r_values: r_values.to_vec(),
        flagged: !(residual <= COMMUTATOR_FIT_RESIDUAL_LIMIT) || norms.iter().any(|v| !(*v > 0.0)),
        norms,
        fitted_slope: slope,
        fitted_intercept: intercept,
        fit_residual: residual,
    })
}
