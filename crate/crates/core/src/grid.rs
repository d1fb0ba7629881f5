//! Radial momentum grids on (0, ∞).

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{config, Result};
use crate::quadrature::gauss_legendre;

/// Smallest node count accepted by [`RadialGrid::build`].
pub const MIN_NODES: usize = 16;

/// Quadrature nodes and weights for ∫₀^∞ · dp, from Gauss–Legendre nodes
/// t_i mapped by p = s(1 + t)/(1 - t).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scale: f64,
}

impl RadialGrid {
    pub fn build(n: usize, s: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(config(alloc::format!("grid.n must be >= {MIN_NODES}, got {n}")));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(config(alloc::format!("grid.s must be positive, got {s}")));
        }
        let (t, w) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&t, &w) in t.iter().zip(&w) {
            let om = 1.0 - t;
            nodes.push(s * (1.0 + t) / om);
            weights.push(w * 2.0 * s / (om * om));
        }
        Ok(Self {
            nodes,
            weights,
            scale: s,
        })
    }

    /// Gauss–Legendre nodes mapped by p = s((1 + t)/(1 - t))^β. β = 1 is
    /// [`RadialGrid::build`]; larger β reaches further into the tail.
    pub fn build_stretched(n: usize, s: f64, beta: f64) -> Result<Self> {
        let base = Self::build(n, 1.0)?;
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(config(alloc::format!("grid stretch must be >= 1, got {beta}")));
        }
        let (t, w) = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for ((&t, &w), &r) in t.iter().zip(&w).zip(base.nodes()) {
            // dp/dt = β p · 2/(1 - t²)
            let p = s * r.powf(beta);
            nodes.push(p);
            weights.push(w * beta * p * 2.0 / ((1.0 - t) * (1.0 + t)));
        }
        Ok(Self {
            nodes,
            weights,
            scale: s,
        })
    }

    /// Stretched grid whose largest node is `p_max`: the exponent β of
    /// [`RadialGrid::build_stretched`] is chosen to hit it, but never below 1.
    pub fn build_spanning(n: usize, s: f64, p_max: f64) -> Result<Self> {
        let base = Self::build(n, 1.0)?;
        if !(p_max > s) || !p_max.is_finite() {
            return Err(config(alloc::format!("grid.p_max must exceed the scale, got {p_max}")));
        }
        let beta = ((p_max / s).ln() / base.p_max().ln()).max(1.0);
        Self::build_stretched(n, s, beta)
    }

    /// Grid from explicit nodes and weights (strictly increasing positive
    /// nodes, positive weights).
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, scale: f64) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(config("grid nodes and weights must be nonempty and equally long"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(config("grid nodes must be positive and strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(config("grid weights must be positive"));
        }
        Ok(Self { nodes, weights, scale })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn p_max(&self) -> f64 {
        *self.nodes.last().expect("grid is nonempty")
    }

    /// ∫₀^∞ f(p) dp.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    /// Discrete L² weights w_i p_i² for ∫ |f|² p² dp.
    pub fn l2_metric(&self) -> Vec<f64> {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * p * p).collect()
    }
}

/// Diagonal H^{1/2} weights (1 + p_i) w_i p_i².
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricH12 {
    pub weights: Vec<f64>,
}

impl MetricH12 {
    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, f)| w * f * f).sum()
    }
}

pub fn assemble_h12_metric(grid: &RadialGrid) -> MetricH12 {
    MetricH12 {
        weights: grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&p, &w)| (1.0 + p) * w * p * p)
            .collect(),
    }
}
