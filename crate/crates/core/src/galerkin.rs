//! Piecewise-linear Galerkin discretization.
//!
//! The trial space is spanned by hat functions h_i centred on the grid nodes,
//! with h_1 ≡ 1 on [0, p_1] and all functions vanishing beyond p_n. Element
//! pairs are integrated according to their distance: coincident elements by
//! nested tanh–sinh split at the outer point, elements sharing a vertex by
//! nested tanh–sinh with exact distances to the vertex, and separated
//! elements by tensor Gauss–Legendre.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::operator::{Basis, ChannelPotential, Kinetic};
use crate::quadrature::{gauss_legendre, tanh_sinh};

const FAR_POINTS: usize = 12;
const MASS_POINTS: usize = 10;
const INNER_TOL: f64 = 1e-12;
const OUTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// h ≡ 1 on [0, p_1].
    Constant,
    Linear,
    /// Lagrange quadratic through a, `mid`, b.
    Quadratic {
        mid: f64,
    },
}

#[derive(Debug, Clone, Copy)]
struct Element {
    a: f64,
    b: f64,
    shape: Shape,
    /// Basis indices of the local shapes: left end (or the constant), then
    /// right end for linear elements, or midpoint and right end for
    /// quadratic ones.
    dofs: [Option<usize>; 3],
}

impl Element {
    #[inline]
    fn shapes(&self, x: f64) -> [f64; 3] {
        let (a, b) = (self.a, self.b);
        match self.shape {
            Shape::Constant => [1.0, 0.0, 0.0],
            Shape::Linear => {
                let s = (x - a) / (b - a);
                [1.0 - s, s, 0.0]
            }
            Shape::Quadratic { mid: m } => [
                (x - m) * (x - b) / ((a - m) * (a - b)),
                (x - a) * (x - b) / ((m - a) * (m - b)),
                (x - a) * (x - m) / ((b - a) * (b - m)),
            ],
        }
    }
}

/// Polynomial degree of the Galerkin trial functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Linear,
    Quadratic,
}

fn elements(grid: &RadialGrid, order: Order) -> Vec<Element> {
    let p = grid.nodes();
    let n = p.len();
    let mut out = Vec::with_capacity(n);
    out.push(Element {
        a: 0.0,
        b: p[0],
        shape: Shape::Constant,
        dofs: [Some(0), None, None],
    });
    let mut k = 0;
    while k + 1 < n {
        if order == Order::Quadratic && k + 2 < n {
            out.push(Element {
                a: p[k],
                b: p[k + 2],
                shape: Shape::Quadratic { mid: p[k + 1] },
                dofs: [Some(k), Some(k + 1), Some(k + 2)],
            });
            k += 2;
        } else {
            out.push(Element {
                a: p[k],
                b: p[k + 1],
                shape: Shape::Linear,
                dofs: [Some(k), Some(k + 1), None],
            });
            k += 1;
        }
    }
    out
}

/// Mass, weighted-mass and potential matrices in the hat basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinMatrices {
    /// ∫ h_i h_j p² dp.
    pub mass: DMatrix<f64>,
    /// ∫ h_i h_j T(p) p² dp.
    pub kinetic: DMatrix<f64>,
    /// ∫∫ h_i(p) k(p, q) h_j(q) p² q² dp dq.
    pub potential: DMatrix<f64>,
}

impl GalerkinMatrices {
    pub fn assemble(grid: &RadialGrid, kernel: &ChannelPotential, kinetic: &Kinetic, order: Order) -> Result<Self> {
        let els = elements(grid, order);
        let n = grid.len();
        let mut mass = DMatrix::zeros(n, n);
        let mut kin = DMatrix::zeros(n, n);
        let (gt, gw) = gauss_legendre(MASS_POINTS);
        for e in &els {
            let half = 0.5 * (e.b - e.a);
            let mid = 0.5 * (e.a + e.b);
            for (t, w) in gt.iter().zip(&gw) {
                let p = mid + half * t;
                let sh = e.shapes(p);
                let base = w * half * p * p;
                let tk = kinetic.eval(p);
                for (x, dx) in e.dofs.iter().enumerate() {
                    let Some(i) = dx else { continue };
                    for (y, dy) in e.dofs.iter().enumerate() {
                        let Some(j) = dy else { continue };
                        mass[(*i, *j)] += base * sh[x] * sh[y];
                        kin[(*i, *j)] += base * sh[x] * sh[y] * tk;
                    }
                }
            }
        }
        let potential = if kernel.strength == 0.0 {
            DMatrix::zeros(n, n)
        } else {
            potential_matrix(&els, n, kernel)?
        };
        Ok(Self {
            mass,
            kinetic: kin,
            potential,
        })
    }

    /// Kinetic-plus-potential and kinetic matrices in coordinates orthonormal
    /// for the mass matrix, with the Cholesky factor as basis map.
    pub fn orthonormalized(&self) -> Result<(DMatrix<f64>, DMatrix<f64>, Basis)> {
        let l = Cholesky::new(self.mass.clone())
            .ok_or_else(|| Error::Precondition("Galerkin mass matrix is not positive definite".into()))?
            .l();
        let a = &self.kinetic + &self.potential;
        let transform = |m: &DMatrix<f64>| -> DMatrix<f64> {
            let y = l.solve_lower_triangular(m).expect("positive diagonal");
            let z = l.solve_lower_triangular(&y.transpose()).expect("positive diagonal");
            let z2 = z.transpose();
            (&z2 + z2.transpose()) * 0.5
        };
        Ok((transform(&a), transform(&self.kinetic), Basis::Cholesky(l)))
    }
}

fn potential_matrix(els: &[Element], n: usize, kernel: &ChannelPotential) -> Result<DMatrix<f64>> {
    let mut v = DMatrix::<f64>::zeros(n, n);
    let (gt, gw) = gauss_legendre(FAR_POINTS);
    for (ie, e) in els.iter().enumerate() {
        for (jf, f) in els.iter().enumerate().skip(ie) {
            let block = if ie == jf {
                same_element(e, kernel)?
            } else if jf == ie + 1 {
                adjacent(e, f, kernel)?
            } else {
                separated(e, f, kernel, &gt, &gw)
            };
            for (x, dx) in e.dofs.iter().enumerate() {
                let Some(i) = dx else { continue };
                for (y, dy) in f.dofs.iter().enumerate() {
                    let Some(j) = dy else { continue };
                    let val = block[x][y];
                    v[(*i, *j)] += val;
                    if ie != jf {
                        v[(*j, *i)] += val;
                    }
                }
            }
        }
    }
    Ok((&v + v.transpose()) * 0.5)
}

fn separated(e: &Element, f: &Element, kernel: &ChannelPotential, gt: &[f64], gw: &[f64]) -> Block {
    let (he, me) = (0.5 * (e.b - e.a), 0.5 * (e.a + e.b));
    let (hf, mf) = (0.5 * (f.b - f.a), 0.5 * (f.a + f.b));
    let mut out = [[0.0; 3]; 3];
    for (t, w) in gt.iter().zip(gw) {
        let p = me + he * t;
        let sp = e.shapes(p);
        let wp = w * he * p * p;
        for (u, v) in gt.iter().zip(gw) {
            let q = mf + hf * u;
            let sq = f.shapes(q);
            let k = kernel.eval(p, q) * wp * v * hf * q * q;
            for x in 0..3 {
                for y in 0..3 {
                    out[x][y] += sp[x] * k * sq[y];
                }
            }
        }
    }
    out
}

type Block = [[f64; 3]; 3];

fn outer(w: f64, s: [f64; 3], inner: [f64; 3]) -> [f64; 9] {
    core::array::from_fn(|k| w * s[k / 3] * inner[k % 3])
}

fn unflatten(v: [f64; 9]) -> Block {
    core::array::from_fn(|x| core::array::from_fn(|y| v[3 * x + y]))
}

fn same_element(e: &Element, kernel: &ChannelPotential) -> Result<Block> {
    let mut failure = None;
    let total = tanh_sinh(
        |pt| {
            let p = pt.x;
            // inner integral over [a, p] and [p, b] with exact gaps
            let left = tanh_sinh(
                |qt| {
                    let q = qt.x;
                    let k = kernel.eval_gap_q2(p, q, qt.from_right);
                    let s = e.shapes(q);
                    [k * s[0], k * s[1], k * s[2]]
                },
                e.a,
                p,
                INNER_TOL,
            );
            // On an element reaching down to 0 the kernel decays like 1/q for
            // q >> p over many decades, smooth in ln q.
            let split = if e.b > 4.0 * p { 2.0 * p } else { e.b };
            let near = tanh_sinh(
                |qt| {
                    let q = qt.x;
                    let k = kernel.eval_gap_q2(p, q, -qt.from_left);
                    let s = e.shapes(q);
                    [k * s[0], k * s[1], k * s[2]]
                },
                p,
                split,
                INNER_TOL,
            );
            let right = if split < e.b {
                near.and_then(|n| {
                    let far = tanh_sinh(
                        |ut| {
                            let q = ut.x.exp();
                            let k = kernel.eval_gap_q2(p, q, p - q) * q;
                            let s = e.shapes(q);
                            [k * s[0], k * s[1], k * s[2]]
                        },
                        split.ln(),
                        e.b.ln(),
                        INNER_TOL,
                    )?;
                    Ok(core::array::from_fn(|k| n[k] + far[k]))
                })
            } else {
                near
            };
            let inner = match (left, right) {
                (Ok(l), Ok(r)) => core::array::from_fn(|k| l[k] + r[k]),
                (Err(err), _) | (_, Err(err)) => {
                    failure.get_or_insert(err);
                    [0.0; 3]
                }
            };
            outer(p * p, e.shapes(p), inner)
        },
        e.a,
        e.b,
        OUTER_TOL,
    )?;
    match failure {
        Some(err) => Err(err),
        None => Ok(unflatten(total)),
    }
}

fn adjacent(e: &Element, f: &Element, kernel: &ChannelPotential) -> Result<Block> {
    debug_assert_eq!(e.b, f.a);
    let mut failure = None;
    let total = tanh_sinh(
        |pt| {
            let p = pt.x;
            let to_vertex = pt.from_right;
            let inner = tanh_sinh(
                |qt| {
                    let q = qt.x;
                    let k = kernel.eval_gap_q2(p, q, -(to_vertex + qt.from_left));
                    let s = f.shapes(q);
                    [k * s[0], k * s[1], k * s[2]]
                },
                f.a,
                f.b,
                INNER_TOL,
            );
            let inner = inner.unwrap_or_else(|err| {
                failure.get_or_insert(err);
                [0.0; 3]
            });
            outer(p * p, e.shapes(p), inner)
        },
        e.a,
        e.b,
        OUTER_TOL,
    )?;
    match failure {
        Some(err) => Err(err),
        None => Ok(unflatten(total)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelSpec;
    #[allow(unused_imports)]
    use num_traits::Float;

    #[test]
    fn mass_reproduces_integrals() {
        let grid = RadialGrid::build(40, 1.0).unwrap();
        let ch = ChannelSpec::new(-1).unwrap();
        let g = GalerkinMatrices::assemble(
            &grid,
            &ChannelPotential::coulomb(ch, 0.0),
            &Kinetic::Magnitude,
            Order::Linear,
        )
        .unwrap();
        // the constant-one combination integrates p² over [0, p_1] plus hats
        let ones = nalgebra::DVector::from_element(40, 1.0);
        let total = (ones.transpose() * &g.mass * &ones)[(0, 0)];
        let pn = grid.p_max();
        // Σ h_i ≡ 1 on [0, p_n]
        assert!((total - pn.powi(3) / 3.0).abs() < 1e-10 * total);
        let tk = (ones.transpose() * &g.kinetic * &ones)[(0, 0)];
        assert!((tk - pn.powi(4) / 4.0).abs() < 1e-10 * tk);
    }

    #[test]
    fn potential_is_symmetric_and_negative() {
        let grid = RadialGrid::build(24, 1.0).unwrap();
        let ch = ChannelSpec::new(-1).unwrap();
        let g = GalerkinMatrices::assemble(
            &grid,
            &ChannelPotential::coulomb(ch, 1.0),
            &Kinetic::Magnitude,
            Order::Linear,
        )
        .unwrap();
        let v = &g.potential;
        assert!((v - v.transpose()).amax() <= 1e-14 * v.amax());
        let ev = v.clone().symmetric_eigen().eigenvalues;
        assert!(ev.max() < 1e-14 * ev.amax(), "{}", ev);
    }

    #[test]
    fn interpolated_forms_converge_at_element_order() {
        // hydrogen 1s in momentum space, normalized: M = 1, T = 1/2, V = -1
        let ch = ChannelSpec::new(-1).unwrap();
        let norm = (32.0 / core::f64::consts::PI).sqrt();
        let errors = |order, n| {
            let grid = RadialGrid::build(n, 1.0).unwrap();
            let kin = Kinetic::NonRelativistic { m: 1.0 };
            let g = GalerkinMatrices::assemble(&grid, &ChannelPotential::coulomb(ch, 1.0), &kin, order).unwrap();
            let c = nalgebra::DVector::from_iterator(n, grid.nodes().iter().map(|p| norm / (1.0 + p * p).powi(2)));
            [
                (c.dot(&(&g.mass * &c)) - 1.0).abs(),
                (c.dot(&(&g.kinetic * &c)) - 0.5).abs(),
                (c.dot(&(&g.potential * &c)) + 1.0).abs(),
            ]
        };
        let (l1, l2) = (errors(Order::Linear, 40), errors(Order::Linear, 80));
        let (q1, q2) = (errors(Order::Quadratic, 40), errors(Order::Quadratic, 80));
        for k in 0..3 {
            let lin = l1[k] / l2[k];
            let quad = q1[k] / q2[k];
            assert!(lin > 3.5 && lin < 4.5, "linear rate {lin}");
            assert!(quad > 10.0, "quadratic rate {quad}");
            assert!(q2[k] < l2[k] / 10.0);
        }
    }
}
