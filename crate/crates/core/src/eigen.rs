//! Eigenvalues of the discrete operator by two independent routes.
//!
//! The dense route diagonalizes the symmetric matrix. The variational route
//! minimizes the Rayleigh energy (x, A x) over unit vectors orthogonal to the
//! previously found eigenvectors, one level at a time, by preconditioned
//! projected gradient descent with Barzilai–Borwein steps and Armijo
//! backtracking.

use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::ChannelSpec;
use crate::error::{config, Error, Result};
use crate::extension::BoundaryFunction;
use crate::grid::RadialGrid;
use crate::operator::{assemble_operator, assemble_with, ChannelPotential, DiscreteOperator, Kinetic, Scheme};
use crate::params::PhysParams;

/// Relative distance below mc² under which an eigenvalue counts as bound.
pub const BOUND_STATE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolverRoute {
    Dense,
    Variational,
}

/// Description of the grid a result was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridMeta {
    pub n: usize,
    pub s: f64,
    pub p_max: f64,
    pub scheme: Scheme,
}

impl GridMeta {
    pub fn of(op: &DiscreteOperator) -> Self {
        Self {
            n: op.grid.len(),
            s: op.grid.scale(),
            p_max: op.grid.p_max(),
            scheme: op.scheme,
        }
    }
}

/// Ascending eigenpairs of one channel.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// Nodal values of each eigenfunction.
    pub eigenvectors: Vec<BoundaryFunction>,
    /// Eigenvectors in the L²-orthonormal coordinates of the operator.
    pub coordinates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Number of leading eigenvalues below mc²(1 - 1e-9).
    pub bound_states: usize,
    pub channel: ChannelSpec,
    pub params: PhysParams,
    pub route: SolverRoute,
    pub grid: GridMeta,
}

impl SpectralResult {
    /// mc² - λ_k for each eigenvalue.
    pub fn binding_energies(&self) -> Vec<f64> {
        let mc2 = self.params.rest_energy();
        self.eigenvalues.iter().map(|e| mc2 - e).collect()
    }
}

fn residual_norm(a: &DMatrix<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    (a * x - x * lambda).norm() / x.norm()
}

fn count_bound(eigenvalues: &[f64], params: &PhysParams) -> usize {
    let edge = params.rest_energy() * (1.0 - BOUND_STATE_MARGIN);
    eigenvalues.iter().take_while(|&&e| e < edge).count()
}

fn pack(op: &DiscreteOperator, values: Vec<f64>, coords: Vec<DVector<f64>>, route: SolverRoute) -> SpectralResult {
    let residuals = values
        .iter()
        .zip(&coords)
        .map(|(&l, x)| residual_norm(&op.matrix, x, l))
        .collect();
    let eigenvectors = coords
        .iter()
        .map(|x| BoundaryFunction::real(op.grid.clone(), &op.basis.to_nodal(x.as_slice())))
        .collect();
    SpectralResult {
        bound_states: count_bound(&values, &op.params),
        eigenvalues: values,
        eigenvectors,
        coordinates: coords.iter().map(|x| x.iter().copied().collect()).collect(),
        residuals,
        channel: op.channel,
        params: op.params,
        route,
        grid: GridMeta::of(op),
    }
}

/// Eigenvalues with their unit eigenvectors.
pub type EigenPairs = (Vec<f64>, Vec<DVector<f64>>);

/// The `k` smallest eigenpairs of a symmetric matrix, ascending.
pub fn symmetric_lowest(a: &DMatrix<f64>, k: usize) -> Result<EigenPairs> {
    let n = a.nrows();
    if k > n {
        return Err(config(alloc::format!("requested {k} eigenvalues of a {n}x{n} matrix")));
    }
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0).ok_or_else(|| Error::NonConvergence {
        what: "symmetric eigensolver".into(),
        estimate: f64::NAN,
        error: f64::NAN,
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let v = eig.eigenvectors.column(i).into_owned();
        // fix the sign so the largest component is positive
        let imax = v.iamax();
        let v = if v[imax] < 0.0 { -v } else { v };
        values.push(eig.eigenvalues[i]);
        vectors.push(v);
    }
    Ok((values, vectors))
}

/// Largest eigenvalue of the symmetric-definite pencil (K, T).
pub fn generalized_largest(k: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64> {
    let l = nalgebra::Cholesky::new(t.clone())
        .ok_or_else(|| Error::Precondition("denominator matrix is not positive definite".into()))?
        .l();
    let y = l.solve_lower_triangular(k).expect("positive diagonal");
    let z = l.solve_lower_triangular(&y.transpose()).expect("positive diagonal");
    let s = (&z + z.transpose()) * 0.5;
    let n = s.nrows();
    let (vals, _) = symmetric_lowest(&(-s), 1.min(n))?;
    Ok(-vals[0])
}

/// The `k` smallest eigenpairs of a positive definite matrix as the largest
/// ones of its inverse. The inverse has the wanted eigenvalues at the top of
/// its spectrum, so they come out with relative accuracy even when the
/// matrix norm is many orders of magnitude above them. `None` when the
/// matrix is not positive definite.
pub fn inverse_lowest(a: &DMatrix<f64>, k: usize) -> Option<Result<EigenPairs>> {
    let n = a.nrows();
    // Jacobi scaling keeps the factorization well conditioned on graded grids.
    let d: DVector<f64> = a.diagonal().map(|x| if x > 0.0 { 1.0 / x.sqrt() } else { f64::NAN });
    if d.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| d[i] * a[(i, j)] * d[j]);
    let chol = nalgebra::Cholesky::new(scaled)?;
    let inv = chol.inverse();
    // (D Â D)⁻¹ with Â = D A D, back to A⁻¹ = D Â⁻¹ D
    let ainv = DMatrix::from_fn(n, n, |i, j| d[i] * inv[(i, j)] * d[j]);
    let sym = (&ainv + ainv.transpose()) * 0.5;
    Some(symmetric_lowest(&(-sym), k).map(|(mu, vecs)| {
        let values = mu.iter().map(|m| -1.0 / m).collect();
        (values, vecs)
    }))
}

/// Dense route: the `k` smallest eigenpairs of the operator.
pub fn dense_spectrum(op: &DiscreteOperator, k: usize) -> Result<SpectralResult> {
    let (values, vectors) = match inverse_lowest(&op.matrix, k) {
        Some(r) => r?,
        None => symmetric_lowest(&op.matrix, k)?,
    };
    // One step of Rayleigh-quotient refinement of each pair.
    let mut refined_values = Vec::with_capacity(k);
    let mut refined_vectors = Vec::with_capacity(k);
    for (l, v) in values.into_iter().zip(vectors) {
        let (l2, v2) = refine_pair(&op.matrix, l, v);
        refined_values.push(l2);
        refined_vectors.push(v2);
    }
    Ok(pack(op, refined_values, refined_vectors, SolverRoute::Dense))
}

fn refine_pair(a: &DMatrix<f64>, lambda: f64, v: DVector<f64>) -> (f64, DVector<f64>) {
    let rq = v.dot(&(a * &v)) / v.norm_squared();
    let r0 = residual_norm(a, &v, rq);
    let n = a.nrows();
    let shift = rq - 1e-10 * rq.abs().max(1.0);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let Some(lu) = m.lu().solve(&v) else {
        return (lambda, v);
    };
    let w = lu.normalize();
    let w = if w.dot(&v) < 0.0 { -w } else { w };
    let rq2 = w.dot(&(a * &w));
    if residual_norm(a, &w, rq2) < r0 {
        (rq2, w)
    } else {
        (rq, v)
    }
}

/// Neumann residual ‖(A - λ_k) φ_k‖ / ‖φ_k‖ of the k-th pair (0-based).
pub fn neumann_residual(op: &DiscreteOperator, result: &SpectralResult, index: usize) -> Result<f64> {
    let x = result
        .coordinates
        .get(index)
        .ok_or_else(|| config(alloc::format!("eigenpair index {index} out of range")))?;
    let x = DVector::from_column_slice(x);
    Ok(residual_norm(&op.matrix, &x, result.eigenvalues[index]))
}

/// Per-iteration record of a constrained minimization.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimizationTrace {
    pub energies: Vec<f64>,
    pub gradient_norms: Vec<f64>,
    pub multiplier_estimates: Vec<f64>,
    pub converged: bool,
}

/// Options of the constrained minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimizeOptions {
    /// Tolerance on the Euclidean norm of the projected gradient (A - ρ)x.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            seed: 0x5eed,
        }
    }
}

/// Error returned when the minimizer exhausts its iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeFailure {
    pub error: Error,
    pub trace: MinimizationTrace,
}

fn project_out(x: &mut DVector<f64>, prior: &[DVector<f64>]) {
    // twice is enough
    for _ in 0..2 {
        for p in prior {
            let c = p.dot(x);
            x.axpy(-c, p, 1.0);
        }
    }
}

/// Diagonal preconditioner approximating (A - λ) on the orthogonal
/// complement: kinetic diagonal minus the rest energy plus a binding scale.
fn preconditioner(op: &DiscreteOperator) -> DVector<f64> {
    let mc2 = op.params.rest_energy();
    let z = op.params.z.max(1e-3 * op.params.c);
    let delta = 0.5 * op.params.m * z * z;
    DVector::from_iterator(
        op.dim(),
        (0..op.dim()).map(|i| (op.kinetic[(i, i)] - mc2).max(0.0) + delta),
    )
}

/// Deflated constrained minimization for level `k` (1-based) given the
/// orthonormal coordinate vectors of levels 1..k-1.
pub fn minimize_pk(
    op: &DiscreteOperator,
    k: usize,
    prior: &[Vec<f64>],
    opts: &MinimizeOptions,
) -> core::result::Result<(f64, Vec<f64>, MinimizationTrace), MinimizeFailure> {
    let fail = |e: Error, trace: MinimizationTrace| MinimizeFailure { error: e, trace };
    if k == 0 || prior.len() != k - 1 {
        return Err(fail(
            Error::Precondition(alloc::format!(
                "level {k} needs exactly {} prior vectors",
                k.saturating_sub(1)
            )),
            MinimizationTrace::default(),
        ));
    }
    let a = &op.matrix;
    let prior: Vec<DVector<f64>> = prior.iter().map(|v| DVector::from_column_slice(v)).collect();
    for (i, p) in prior.iter().enumerate() {
        for (j, q) in prior.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (p.dot(q) - want).abs() > 1e-8 {
                return Err(fail(
                    Error::Precondition("prior vectors must be orthonormal".into()),
                    MinimizationTrace::default(),
                ));
            }
        }
    }
    let dinv = preconditioner(op).map(|d| 1.0 / d);

    // Random start shaped like a bound state: x_i ∝ √w_i p_i f(p_i),
    // f(p) = u_i / (1 + (p/s)²)².
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let s = op.grid.scale();
    let nodes = op.grid.nodes();
    let f0: Vec<f64> = nodes
        .iter()
        .map(|&p| {
            let u: f64 = rng.random_range(-1.0..1.0);
            u / (1.0 + (p / s) * (p / s)).powi(2)
        })
        .collect();
    let mut x = DVector::from_vec(op.basis.from_nodal(&f0));
    project_out(&mut x, &prior);
    x /= x.norm();

    let mut trace = MinimizationTrace::default();
    let mut ax = a * &x;
    let mut rho = x.dot(&ax);
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    let mut tau = 1.0;
    for _ in 0..opts.max_iter {
        let mut r = &ax - &x * rho;
        project_out(&mut r, &prior);
        let gnorm = r.norm();
        trace.energies.push(rho);
        trace.multiplier_estimates.push(rho);
        trace.gradient_norms.push(gnorm);
        if gnorm < opts.tol {
            trace.converged = true;
            return Ok((rho, x.iter().copied().collect(), trace));
        }
        // BB step length in the preconditioned metric.
        if let Some((xp, rp)) = &prev {
            let sv = &x - xp;
            let yv = &r - rp;
            let sy = sv.dot(&yv);
            let sds = sv.component_div(&dinv).dot(&sv);
            if sy > 0.0 && sds > 0.0 {
                tau = (sds / sy).clamp(1e-6, 1e6);
            }
        }
        let mut d = -r.component_mul(&dinv);
        project_out(&mut d, &prior);
        let xd = x.dot(&d);
        d.axpy(-xd, &x, 1.0);
        let dr = d.dot(&r);
        if !(dr < 0.0) {
            // the preconditioned direction is no longer a descent direction
            // at round-off level
            trace.converged = gnorm < 1e3 * opts.tol;
            break;
        }
        let ad = a * &d;
        let dad = d.dot(&ad);
        let dd = d.norm_squared();
        let delta_e = |t: f64| (2.0 * t * dr + t * t * (dad - rho * dd)) / (1.0 + t * t * dd);
        let mut t = tau;
        let mut accepted = false;
        for _ in 0..60 {
            let de = delta_e(t);
            if de <= 1e-4 * t * dr {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            trace.converged = false;
            break;
        }
        prev = Some((x.clone(), r));
        let norm = (1.0 + t * t * dd).sqrt();
        let new_x = (&x + &d * t) / norm;
        let new_ax = (&ax + &ad * t) / norm;
        x = new_x;
        ax = new_ax;
        // re-orthogonalize against the constraint set
        let before = x.clone();
        project_out(&mut x, &prior);
        let nx = x.norm();
        x /= nx;
        if (&x - &before).norm() > 1e-14 {
            ax = a * &x;
        }
        rho = x.dot(&ax);
        tau = t.max(1e-6);
    }
    let best = trace.energies.last().copied().unwrap_or(rho);
    Err(fail(
        Error::NonConvergence {
            what: alloc::format!("constrained minimization for level {k}"),
            estimate: best,
            error: trace.gradient_norms.last().copied().unwrap_or(f64::NAN),
        },
        trace,
    ))
}

/// Variational route: levels 1..=k by successive deflated minimization.
pub fn variational_spectrum(
    op: &DiscreteOperator,
    k: usize,
    opts: &MinimizeOptions,
) -> core::result::Result<(SpectralResult, Vec<MinimizationTrace>), MinimizeFailure> {
    let mut prior: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut traces = Vec::with_capacity(k);
    for level in 1..=k {
        let (e, x, trace) = minimize_pk(op, level, &prior, opts)?;
        values.push(e);
        prior.push(x);
        traces.push(trace);
    }
    // Levels found in order are ascending up to degeneracies; sort for safety.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let vals: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vecs: Vec<DVector<f64>> = order.iter().map(|&i| DVector::from_column_slice(&prior[i])).collect();
    let traces = order.iter().map(|&i| traces[i].clone()).collect();
    Ok((pack(op, vals, vecs, SolverRoute::Variational), traces))
}

/// Eigenvalues of p²/(2m) plus the bare Coulomb kernel of orbital channel l.
pub fn nonrel_spectrum(grid: &RadialGrid, z: f64, l: usize, k: usize, m: f64) -> Result<Vec<f64>> {
    if !(z > 0.0) {
        return Err(config(alloc::format!("nonrelativistic spectrum needs Z > 0, got {z}")));
    }
    let channel = ChannelSpec::new(-(l as i32) - 1)?;
    let kernel = ChannelPotential::coulomb(channel, z);
    let (a, _, _) = assemble_with(grid, &kernel, &Kinetic::NonRelativistic { m }, Scheme::Nystrom)?;
    Ok(symmetric_lowest(&a, k)?.0)
}

/// One row of a binding curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BindingRow {
    pub z: f64,
    pub eigenvalues: Vec<f64>,
    pub binding: Vec<f64>,
    pub bound_states: usize,
    pub warnings: Vec<String>,
}

/// Dense spectra over a list of charges, each on the grid produced by
/// `grid_for(z)`.
pub fn binding_curve<G>(
    z_values: &[f64],
    channel: ChannelSpec,
    k: usize,
    base: &PhysParams,
    scheme: Scheme,
    mut grid_for: G,
) -> Result<Vec<BindingRow>>
where
    G: FnMut(f64) -> Result<RadialGrid>,
{
    let mut rows = Vec::with_capacity(z_values.len());
    for &z in z_values {
        if !(z > 0.0) {
            return Err(config(alloc::format!("binding curve needs positive charges, got {z}")));
        }
        let params = base.with_z(z);
        let grid = grid_for(z)?;
        let op = assemble_operator(&grid, channel, &params, scheme)?;
        let res = dense_spectrum(&op, k)?;
        rows.push(BindingRow {
            z,
            binding: res.binding_energies(),
            eigenvalues: res.eigenvalues,
            bound_states: res.bound_states,
            warnings: op.warnings,
        });
    }
    Ok(rows)
}

/// Max |xᵢ·xⱼ - δᵢⱼ| over a set of coordinate vectors.
pub fn orthonormality_defect(vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).abs());
        }
    }
    worst
}
