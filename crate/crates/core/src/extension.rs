//! The half-space extension of boundary data and the Dirichlet-to-Neumann map.
//!
//! A boundary datum u(p) of one channel extends to the half-space as
//! v(x, p) = u(p) e^{-λ(p) x}, x ≥ 0. Its Dirichlet energy
//! ∬ (|∂ₓv|² + λ(p)²|v|²) p² dp dx equals ∫ λ(p)|u(p)|² p² dp, and the
//! outward normal derivative -∂ₓv(0, p) = λ(p)u(p) is the DtN operator.
//! Energies are computed both ways: by the closed form in momentum space and
//! by quadrature in x on a panel grid with spectral differentiation.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dirac::lambda_unchecked;
use crate::error::{config, Error, Result};
use crate::grid::RadialGrid;
use crate::params::PhysParams;
use crate::quadrature::gauss_lobatto;

/// Boundary datum: complex nodal values of a channel radial function.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryFunction {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

impl BoundaryFunction {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(config("boundary values must match the grid size"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("boundary values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn real(grid: RadialGrid, values: &[f64]) -> Self {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F) -> Self {
        let values = grid.nodes().iter().map(|&p| f(p)).collect();
        Self { grid, values }
    }

    /// ∫ |u|² p² dp.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid
            .l2_metric()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum()
    }

    /// ∫ (1 + p)|u|² p² dp.
    pub fn h12_norm_sq(&self) -> f64 {
        let m = crate::grid::assemble_h12_metric(&self.grid);
        m.weights.iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).sum()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    /// a·self + b·other on the same grid.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(config("boundary functions live on different grids"));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, w)| u * a + w * b)
                .collect(),
        })
    }
}

/// Composite Gauss–Lobatto grid on [0, X_max] with geometrically growing
/// panels sharing their end points.
#[derive(Debug, Clone, PartialEq)]
pub struct XGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Panel boundaries, `panels + 1` values.
    pub breaks: Vec<f64>,
    order: usize,
    reference_diff: DMatrix<f64>,
}

impl XGrid {
    /// `panels` panels of `order` Lobatto points; the first panel has
    /// length `first` and the lengths grow geometrically to reach `x_max`.
    pub fn geometric(x_max: f64, first: f64, panels: usize, order: usize) -> Result<Self> {
        if !(x_max > 0.0 && first > 0.0 && first < x_max) || panels == 0 || order < 2 {
            return Err(config(
                "invalid x-grid: need 0 < first < x_max, panels >= 1, order >= 2",
            ));
        }
        let ratio = if panels == 1 {
            1.0
        } else {
            // solve first·(r^N - 1)/(r - 1) = x_max for r
            let total = |r: f64| {
                if (r - 1.0).abs() < 1e-12 {
                    first * panels as f64
                } else {
                    first * (r.powi(panels as i32) - 1.0) / (r - 1.0)
                }
            };
            let (mut lo, mut hi) = (1e-3, 2.0);
            while total(hi) < x_max {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if total(mid) < x_max {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut breaks = vec![0.0];
        let mut h = if panels == 1 { x_max } else { first };
        for k in 0..panels {
            let next = if k + 1 == panels { x_max } else { breaks[k] + h };
            breaks.push(next);
            h *= ratio;
        }
        let (t, w) = gauss_lobatto(order);
        let mut nodes = vec![0.0];
        let mut weights = vec![0.0];
        for k in 0..panels {
            let (a, b) = (breaks[k], breaks[k + 1]);
            let half = 0.5 * (b - a);
            for j in 0..order {
                let x = if j == order - 1 { b } else { a + half * (1.0 + t[j]) };
                let wj = half * w[j];
                if j == 0 {
                    *weights.last_mut().expect("nonempty") += wj;
                } else {
                    nodes.push(x);
                    weights.push(wj);
                }
            }
        }
        Ok(Self {
            nodes,
            weights,
            breaks,
            order,
            reference_diff: lagrange_diff_matrix(&t),
        })
    }

    /// The default grid for the given parameters and largest momentum:
    /// X_max = 40/(mc²), first panel 0.5/λ(p_max), 40 panels of 11 points.
    pub fn for_params(params: &PhysParams, p_max: f64) -> Result<Self> {
        let x_max = 40.0 / params.rest_energy();
        let first = (0.5 / lambda_unchecked(p_max, params)).min(0.01 * x_max);
        Self::geometric(x_max, first, 40, 11)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        *self.breaks.last().expect("nonempty")
    }

    /// Derivative of nodal samples by differentiating the interpolant on each
    /// panel. Shared end points take the average of the two one-sided values.
    pub fn differentiate(&self, f: &[Complex64]) -> Vec<Complex64> {
        let m = self.order - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut count = vec![0u8; f.len()];
        for k in 0..self.breaks.len() - 1 {
            let scale = 2.0 / (self.breaks[k + 1] - self.breaks[k]);
            let base = k * m;
            for i in 0..self.order {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..self.order {
                    acc += f[base + j] * self.reference_diff[(i, j)];
                }
                out[base + i] += acc * scale;
                count[base + i] += 1;
            }
        }
        for (o, c) in out.iter_mut().zip(count) {
            *o /= c as f64;
        }
        out
    }
}

fn lagrange_diff_matrix(t: &[f64]) -> DMatrix<f64> {
    let n = t.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| 1.0 / (0..n).filter(|&k| k != j).map(|k| t[j] - t[k]).product::<f64>())
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (t[i] - t[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Field values v(x_a, p_i) on an x-grid times the radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionField {
    pub boundary: BoundaryFunction,
    pub x_grid: XGrid,
    /// Row-major: `values[a * n_p + i]`.
    pub values: Vec<Complex64>,
}

impl ExtensionField {
    pub fn from_fn<F>(boundary: BoundaryFunction, x_grid: XGrid, f: F) -> Self
    where
        F: Fn(f64, usize, f64) -> Complex64,
    {
        let np = boundary.grid.len();
        let mut values = Vec::with_capacity(np * x_grid.len());
        for &x in &x_grid.nodes {
            for (i, &p) in boundary.grid.nodes().iter().enumerate() {
                values.push(f(x, i, p));
            }
        }
        Self {
            boundary,
            x_grid,
            values,
        }
    }

    pub fn at(&self, a: usize, i: usize) -> Complex64 {
        self.values[a * self.boundary.grid.len() + i]
    }

    /// The slice x ↦ v(x, p_i).
    pub fn mode(&self, i: usize) -> Vec<Complex64> {
        let np = self.boundary.grid.len();
        (0..self.x_grid.len()).map(|a| self.values[a * np + i]).collect()
    }

    /// The trace v(0, ·).
    pub fn trace(&self) -> &[Complex64] {
        &self.values[..self.boundary.grid.len()]
    }
}

/// v(x, p) = u(p) e^{-λ(p)x}.
pub fn extend(u: &BoundaryFunction, x_grid: &XGrid, params: &PhysParams) -> Result<ExtensionField> {
    if x_grid.nodes.first() != Some(&0.0) || x_grid.nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(config("x-grid must start at 0 and increase"));
    }
    let lam: Vec<f64> = u.grid.nodes().iter().map(|&p| lambda_unchecked(p, params)).collect();
    let values = u.values.clone();
    Ok(ExtensionField::from_fn(u.clone(), x_grid.clone(), |x, i, _| {
        if x == 0.0 {
            values[i]
        } else {
            values[i] * (-lam[i] * x).exp()
        }
    }))
}

/// 𝒯u = λ(p)u(p).
pub fn dtn_apply(u: &BoundaryFunction, params: &PhysParams) -> BoundaryFunction {
    BoundaryFunction {
        grid: u.grid.clone(),
        values: u
            .grid
            .nodes()
            .iter()
            .zip(&u.values)
            .map(|(&p, v)| v * lambda_unchecked(p, params))
            .collect(),
    }
}

/// -∂ₓv(0, p) from centred differences of the multiplier extension at steps
/// h and h/2 with one Richardson step, h = 0.01/λ(p).
pub fn richardson_dtn(u: &BoundaryFunction, params: &PhysParams) -> Vec<Complex64> {
    u.grid
        .nodes()
        .iter()
        .zip(&u.values)
        .map(|(&p, &v)| {
            let lam = lambda_unchecked(p, params);
            let field = |x: f64| v * (-lam * x).exp();
            let d = |h: f64| (field(-h) - field(h)) / (2.0 * h);
            let h = 0.01 / lam;
            (d(0.5 * h) * 4.0 - d(h)) / 3.0
        })
        .collect()
}

/// Which formula a Dirichlet energy is computed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnergyRoute {
    XQuadrature,
    MomentumFormula,
}

/// A Dirichlet energy with the analytic bound on the neglected x-tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    pub value: f64,
    /// e^{-2λ(p_min) X_max}, relative size of the truncated tail.
    pub tail_bound: f64,
    /// Set when the tail bound exceeds 1e-12.
    pub tail_warning: bool,
}

/// ∬ (|∂ₓv|² + λ(p)²|v|²) p² dp dx, either by quadrature of the field or by
/// ∫ λ|u|² p² dp for the trace.
pub fn dirichlet_energy(field: &ExtensionField, route: EnergyRoute, params: &PhysParams) -> EnergyValue {
    let grid = &field.boundary.grid;
    let lam_min = lambda_unchecked(grid.nodes()[0], params);
    let tail_bound = (-2.0 * lam_min * field.x_grid.x_max()).exp();
    let value = match route {
        EnergyRoute::MomentumFormula => grid
            .l2_metric()
            .iter()
            .zip(grid.nodes())
            .zip(field.trace())
            .map(|((w, &p), u)| w * lambda_unchecked(p, params) * u.norm_sqr())
            .sum(),
        EnergyRoute::XQuadrature => {
            let metric = grid.l2_metric();
            let mut total = 0.0;
            for (i, &p) in grid.nodes().iter().enumerate() {
                let lam = lambda_unchecked(p, params);
                total += metric[i] * mode_energy(field, i, lam * lam);
            }
            total
        }
    };
    EnergyValue {
        value,
        tail_bound,
        tail_warning: tail_bound > 1e-12,
    }
}

/// ∫ (|f'|² + k²|f|²) dx for the x-slice of mode `i`.
fn mode_energy(field: &ExtensionField, i: usize, k2: f64) -> f64 {
    let f = field.mode(i);
    let df = field.x_grid.differentiate(&f);
    field
        .x_grid
        .weights
        .iter()
        .zip(f.iter().zip(&df))
        .map(|(w, (f, d))| w * (d.norm_sqr() + k2 * f.norm_sqr()))
        .sum()
}

/// Energies of the multiplier extension of `u` and of the competitor
/// v + a·ζ for a zero-trace perturbation ζ.
pub fn minimality_check(
    u: &BoundaryFunction,
    perturbation: &ExtensionField,
    amplitude: f64,
    params: &PhysParams,
) -> Result<(f64, f64)> {
    let scale = perturbation.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if perturbation
        .trace()
        .iter()
        .any(|v| v.norm() > 1e-14 * scale.max(f64::MIN_POSITIVE))
    {
        return Err(Error::Precondition("perturbation must vanish at x = 0".into()));
    }
    if perturbation.boundary.grid != u.grid {
        return Err(config("perturbation lives on a different momentum grid"));
    }
    let v = extend(u, &perturbation.x_grid, params)?;
    let w = ExtensionField {
        boundary: u.clone(),
        x_grid: v.x_grid.clone(),
        values: v
            .values
            .iter()
            .zip(&perturbation.values)
            .map(|(a, b)| a + b * amplitude)
            .collect(),
    };
    let e0 = dirichlet_energy(&v, EnergyRoute::XQuadrature, params).value;
    let e1 = dirichlet_energy(&w, EnergyRoute::XQuadrature, params).value;
    Ok((e0, e1))
}

/// Margin of the trace inequality and the scale it is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceMargin {
    /// ∬ (|∂ₓφ|² + m²c⁴|φ|²) - mc² ∫ |φ(0, ·)|².
    pub margin: f64,
    /// ∬ |∂ₓφ|² + m²c⁴ ∬ |φ|².
    pub scale: f64,
}

pub fn trace_inequality_margin(phi: &ExtensionField, params: &PhysParams) -> TraceMargin {
    let mc2 = params.rest_energy();
    let grid = &phi.boundary.grid;
    let metric = grid.l2_metric();
    let mut bulk = 0.0;
    let mut trace = 0.0;
    for (i, w) in metric.iter().enumerate() {
        bulk += w * mode_energy(phi, i, mc2 * mc2);
        trace += w * phi.at(0, i).norm_sqr();
    }
    TraceMargin {
        margin: bulk - mc2 * trace,
        scale: bulk,
    }
}
