//! Assembly of the discrete channel operator f ↦ T(p) f + ∫ k(p, q) f(q) q² dq.
//!
//! The default scheme is Nyström collocation on the radial grid with the log
//! singularity of k on p = q removed by subtracting f(p)·φ_p(q),
//! φ_p(q) = 2p²/(p² + q²), whose integral against the kernel is computed
//! per node by double-exponential quadrature. In the coordinates
//! x_i = √w_i p_i f(p_i) the matrix is symmetric and the discrete L² norm is
//! the Euclidean norm.
//!
//! The alternative scheme is a Galerkin method with piecewise-linear hat
//! functions (or piecewise quadratics), see [`crate::galerkin`].

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::channels::{q_of_gap, ChannelSpec};
use crate::dirac::{a_pm_unchecked, lambda_unchecked};
use crate::error::Result;
use crate::galerkin::{GalerkinMatrices, Order};
use crate::grid::RadialGrid;
use crate::params::PhysParams;
use crate::quadrature::{exp_sinh, tanh_sinh};

/// Fraction of the critical charge above which Nyström results are unreliable.
pub const NYSTROM_COUPLING_LIMIT: f64 = 0.85;

/// Discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    #[default]
    Nystrom,
    Galerkin,
    /// Galerkin with piecewise-quadratic trial functions.
    GalerkinQuadratic,
}

/// A channel potential kernel with an explicit gap argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPotential {
    pub channel: ChannelSpec,
    /// Overall factor multiplying -Q_l/(π p q); Z for the Coulomb potential.
    pub strength: f64,
    /// Projected kernel with a±-coefficients, or `None` for the bare upper
    /// channel (a₊ ≡ 1, a₋ ≡ 0).
    pub relativistic: Option<PhysParams>,
}

impl ChannelPotential {
    /// The projected Coulomb potential of charge `params.z`.
    pub fn brown_ravenhall(channel: ChannelSpec, params: PhysParams) -> Self {
        Self {
            channel,
            strength: params.z,
            relativistic: Some(params),
        }
    }

    /// The bare Coulomb kernel in the upper orbital channel.
    pub fn coulomb(channel: ChannelSpec, z: f64) -> Self {
        Self {
            channel,
            strength: z,
            relativistic: None,
        }
    }

    /// k(p, q) with the gap p - q supplied separately.
    #[inline]
    pub fn eval_gap(&self, p: f64, q: f64, gap: f64) -> f64 {
        self.angular(p, q, gap) / (p * q)
    }

    /// k(p, q) q², finite even where 1/(p q) overflows.
    #[inline]
    pub fn eval_gap_q2(&self, p: f64, q: f64, gap: f64) -> f64 {
        self.angular(p, q, gap) * (q / p)
    }

    #[inline]
    fn angular(&self, p: f64, q: f64, gap: f64) -> f64 {
        let v = match self.relativistic {
            None => q_of_gap(self.channel.l_up, p, q, gap),
            Some(params) => {
                let (ap, am) = a_pm_unchecked(p, &params);
                let (aq, bq) = a_pm_unchecked(q, &params);
                let mut v = ap * aq * q_of_gap(self.channel.l_up, p, q, gap);
                let lower = am * bq;
                if lower != 0.0 {
                    v += lower * q_of_gap(self.channel.l_down, p, q, gap);
                }
                v
            }
        };
        -self.strength * v / PI
    }

    #[inline]
    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.eval_gap(p, q, p - q)
    }
}

/// Subtraction profile φ_p(q) = 2p²/(p² + q²).
#[inline]
pub fn subtraction_profile(p: f64, q: f64) -> f64 {
    2.0 * p * p / (p * p + q * q)
}

/// I(p) = ∫₀^∞ k(p, q) φ_p(q) q² dq.
pub fn subtraction_integral(kernel: &ChannelPotential, p: f64) -> Result<f64> {
    let tol = 1e-13;
    let left = tanh_sinh(
        |pt| {
            let q = pt.x;
            [kernel.eval_gap_q2(p, q, pt.from_right) * subtraction_profile(p, q)]
        },
        0.0,
        p,
        tol,
    )?[0];
    let right = exp_sinh(
        |pt| {
            let q = pt.x;
            [kernel.eval_gap_q2(p, q, -pt.from_left) * subtraction_profile(p, q)]
        },
        p,
        p,
        tol,
    )?[0];
    Ok(left + right)
}

/// Kinetic multiplier of the discrete operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kinetic {
    /// λ(p) = √(c²p² + m²c⁴).
    Relativistic(PhysParams),
    /// p²/(2m).
    NonRelativistic { m: f64 },
    /// |p|.
    Magnitude,
    /// λ(p)/c.
    LambdaOverC(PhysParams),
}

impl Kinetic {
    pub fn eval(&self, p: f64) -> f64 {
        match *self {
            Kinetic::Relativistic(params) => lambda_unchecked(p, &params),
            Kinetic::NonRelativistic { m } => 0.5 * p * p / m,
            Kinetic::Magnitude => p,
            Kinetic::LambdaOverC(params) => lambda_unchecked(p, &params) / params.c,
        }
    }
}

/// Nyström potential matrix in metric-normalized coordinates.
pub fn nystrom_potential(grid: &RadialGrid, kernel: &ChannelPotential) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let p = grid.nodes();
    let w = grid.weights();
    let sw: Vec<f64> = w.iter().zip(p).map(|(w, p)| w.sqrt() * p).collect();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = kernel.eval(p[i], p[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut sub = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let kij = k[(i, j)];
            sub += w[j] * p[j] * p[j] * kij * subtraction_profile(p[i], p[j]);
            m[(i, j)] = sw[i] * sw[j] * kij;
        }
        m[(i, i)] = subtraction_integral(kernel, p[i])? - sub;
    }
    Ok(m)
}

/// Discrete representation of one channel of the projected operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    /// Full symmetric matrix in coordinates orthonormal for the discrete L² product.
    pub matrix: DMatrix<f64>,
    /// Kinetic part in the same coordinates.
    pub kinetic: DMatrix<f64>,
    pub grid: RadialGrid,
    pub channel: ChannelSpec,
    pub params: PhysParams,
    /// Discrete L² weights w_i p_i² of the grid.
    pub metric: Vec<f64>,
    pub scheme: Scheme,
    /// Map from coordinates to nodal values f(p_i).
    pub basis: Basis,
    pub warnings: Vec<String>,
}

/// How coordinates relate to nodal values.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// f(p_i) = x_i / s_i.
    Scaled(Vec<f64>),
    /// Galerkin hat coefficients c = L⁻ᵀ x with M = L Lᵀ the mass matrix.
    Cholesky(DMatrix<f64>),
}

impl Basis {
    pub fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Basis::Scaled(s) => x.iter().zip(s).map(|(x, s)| x / s).collect(),
            Basis::Cholesky(l) => {
                let y = DVector::from_column_slice(x);
                let c = l
                    .transpose()
                    .solve_upper_triangular(&y)
                    .expect("Cholesky factor has a positive diagonal");
                c.iter().copied().collect()
            }
        }
    }

    pub fn from_nodal(&self, f: &[f64]) -> Vec<f64> {
        match self {
            Basis::Scaled(s) => f.iter().zip(s).map(|(f, s)| f * s).collect(),
            Basis::Cholesky(l) => {
                let c = DVector::from_column_slice(f);
                (l.transpose() * c).iter().copied().collect()
            }
        }
    }
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Potential part (matrix minus kinetic part).
    pub fn potential(&self) -> DMatrix<f64> {
        &self.matrix - &self.kinetic
    }

    /// max |M_ij - M_ji| / max |M|.
    pub fn symmetry_defect(&self) -> f64 {
        let m = &self.matrix;
        let scale = m.amax();
        (m - m.transpose()).amax() / scale.max(f64::MIN_POSITIVE)
    }
}

/// Assembles the projected Coulomb operator of `channel` on `grid`.
pub fn assemble_operator(
    grid: &RadialGrid,
    channel: ChannelSpec,
    params: &PhysParams,
    scheme: Scheme,
) -> Result<DiscreteOperator> {
    params.validate()?;
    let mut warnings = Vec::new();
    if !params.in_form_bound_window() {
        warnings.push(alloc::format!(
            "Z = {} lies outside the form-bound window Z < {:.4}",
            params.z,
            params.critical_charge()
        ));
    }
    if scheme == Scheme::Nystrom && params.z > NYSTROM_COUPLING_LIMIT * params.critical_charge() {
        warnings.push(alloc::format!(
            "Z = {} is close to the critical charge; the Nystrom scheme is not variational there, use galerkin",
            params.z
        ));
    }
    let kernel = ChannelPotential::brown_ravenhall(channel, *params);
    let kinetic = Kinetic::Relativistic(*params);
    let (matrix, kin, basis) = assemble_with(grid, &kernel, &kinetic, scheme)?;
    Ok(DiscreteOperator {
        matrix,
        kinetic: kin,
        grid: grid.clone(),
        channel,
        params: *params,
        metric: grid.l2_metric(),
        scheme,
        basis,
        warnings,
    })
}

/// Kinetic plus potential matrices for an arbitrary kernel and kinetic
/// multiplier, in L²-orthonormal coordinates.
pub fn assemble_with(
    grid: &RadialGrid,
    kernel: &ChannelPotential,
    kinetic: &Kinetic,
    scheme: Scheme,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Basis)> {
    match scheme {
        Scheme::Nystrom => {
            let kin = DMatrix::from_diagonal(&DVector::from_iterator(
                grid.len(),
                grid.nodes().iter().map(|&p| kinetic.eval(p)),
            ));
            let mut m = if kernel.strength == 0.0 {
                DMatrix::zeros(grid.len(), grid.len())
            } else {
                nystrom_potential(grid, kernel)?
            };
            m += &kin;
            let s = grid
                .nodes()
                .iter()
                .zip(grid.weights())
                .map(|(p, w)| w.sqrt() * p)
                .collect();
            Ok((m, kin, Basis::Scaled(s)))
        }
        Scheme::Galerkin | Scheme::GalerkinQuadratic => {
            let order = if scheme == Scheme::Galerkin {
                Order::Linear
            } else {
                Order::Quadratic
            };
            let g = GalerkinMatrices::assemble(grid, kernel, kinetic, order)?;
            g.orthonormalized()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_adaptive_scalar, AdaptiveOptions};

    #[test]
    fn free_operator_is_diagonal() {
        let grid = RadialGrid::build(64, 1.0).unwrap();
        let params = PhysParams::atomic(0.0);
        let op = assemble_operator(&grid, ChannelSpec::new(-1).unwrap(), &params, Scheme::Nystrom).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                let want = if i == j {
                    lambda_unchecked(grid.nodes()[i], &params)
                } else {
                    0.0
                };
                assert_eq!(op.matrix[(i, j)], want);
            }
        }
    }

    #[test]
    fn subtraction_integral_matches_reference() {
        // Bare l = 0 kernel with Z = 1: the reference
        // I(p) = -(p/π) ∫₀^∞ Q₀((1+t²)/(2t)) · 2t/(1+t²) dt, t = q/p,
        // from adaptive Gauss–Kronrod on split intervals.
        let ch = ChannelSpec::new(-1).unwrap();
        let k = ChannelPotential::coulomb(ch, 1.0);
        let integrand = |t: f64| {
            let zm1 = (1.0 - t) * (1.0 - t) / (2.0 * t);
            0.5 * ((2.0 + zm1) / zm1).ln() * 2.0 * t / (1.0 + t * t)
        };
        let opts = AdaptiveOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_intervals: 5000,
        };
        let mut reference = 0.0;
        // substitute t = 1 ∓ e^{-u} near the singular point and t = 1/s beyond
        let edges = [0.0, 0.5, 0.9, 0.99, 0.999, 1.0 - 1e-5, 1.0 - 1e-8, 1.0 - 1e-12];
        for w in edges.windows(2) {
            reference += integrate_adaptive_scalar(integrand, w[0], w[1], opts).unwrap();
            reference +=
                integrate_adaptive_scalar(|s: f64| integrand(1.0 / s) / (s * s), w[0].max(1e-300), w[1], opts).unwrap();
        }
        // the untreated slivers contribute O(1e-12 · |ln 1e-12|)
        for p in [0.01, 1.0, 37.0] {
            let got = subtraction_integral(&k, p).unwrap();
            let want = -(p / PI) * reference;
            assert!((got - want).abs() < 1e-9 * want.abs(), "p={p} got={got} want={want}");
        }
    }

    #[test]
    fn symmetric_assembly() {
        let grid = RadialGrid::build(80, 1.0).unwrap();
        for kappa in [-1, 1, -2] {
            let op = assemble_operator(
                &grid,
                ChannelSpec::new(kappa).unwrap(),
                &PhysParams::atomic(3.0),
                Scheme::Nystrom,
            )
            .unwrap();
            assert!(op.symmetry_defect() < 1e-12);
            assert!(op.warnings.is_empty());
        }
        let op = assemble_operator(
            &grid,
            ChannelSpec::new(-1).unwrap(),
            &PhysParams::atomic(130.0),
            Scheme::Nystrom,
        )
        .unwrap();
        assert_eq!(op.warnings.len(), 2);
        let op = assemble_operator(
            &grid,
            ChannelSpec::new(-1).unwrap(),
            &PhysParams::atomic(115.0),
            Scheme::Nystrom,
        )
        .unwrap();
        assert!(op.warnings[0].contains("galerkin"));
        let op = assemble_operator(
            &grid,
            ChannelSpec::new(-1).unwrap(),
            &PhysParams::atomic(115.0),
            Scheme::Galerkin,
        )
        .unwrap();
        assert!(op.warnings.is_empty());
    }

    #[test]
    fn basis_round_trip() {
        let grid = RadialGrid::build(32, 1.0).unwrap();
        let op = assemble_operator(
            &grid,
            ChannelSpec::new(-1).unwrap(),
            &PhysParams::atomic(1.0),
            Scheme::Nystrom,
        )
        .unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|p| (-p).exp()).collect();
        let back = op.basis.to_nodal(&op.basis.from_nodal(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-15 * a.abs().max(1e-300));
        }
    }
}
