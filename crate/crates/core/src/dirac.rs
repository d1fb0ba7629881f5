//! Pointwise algebra of the free Dirac symbol and the Foldy–Wouthuysen
//! transformation.
//!
//! In momentum space the free Dirac operator is multiplication by the 4×4
//! matrix D(p) = c α·p + mc² β. The Foldy–Wouthuysen unitary
//! U(p) = a₊(p) I + a₋(p) β α·p̂ brings it to β λ(p), so that the positive
//! spectral projector becomes the projection onto the upper two components.

use core::ops::{Mul, Sub};
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::params::PhysParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A real momentum 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentumVector(pub [f64; 3]);

impl MomentumVector {
    pub const ZERO: Self = Self([0.0; 3]);

    /// Builds a vector, rejecting non-finite components.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(domain(alloc::format!("non-finite momentum ({x}, {y}, {z})")));
        }
        Ok(Self([x, y, z]))
    }

    /// Vector of magnitude `r` along spherical angles (θ, φ).
    pub fn spherical(r: f64, theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self([r * st * cp, r * st * sp, r * ct])
    }

    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.0;
        libm::hypot(libm::hypot(x, y), z)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a, b, c] = self.0;
        let [d, e, f] = o.0;
        Self([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    /// Unit vector, or `None` at the origin.
    pub fn unit(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

impl Sub for MomentumVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// Structural property a [`SpinorMatrix4`] is expected to have by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MatrixTag {
    General,
    Hermitian,
    Unitary,
}

/// A 4×4 complex matrix tagged with the property it is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorMatrix4 {
    entries: Matrix4<Complex64>,
    tag: MatrixTag,
}

impl SpinorMatrix4 {
    pub fn new(entries: Matrix4<Complex64>, tag: MatrixTag) -> Self {
        Self { entries, tag }
    }

    pub fn identity() -> Self {
        Self::new(Matrix4::identity(), MatrixTag::Unitary)
    }

    pub fn zeros() -> Self {
        Self::new(Matrix4::zeros(), MatrixTag::Hermitian)
    }

    pub fn entries(&self) -> &Matrix4<Complex64> {
        &self.entries
    }

    pub fn tag(&self) -> MatrixTag {
        self.tag
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.entries.adjoint(), self.tag)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// max |A - A*|.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.entries - self.entries.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// max |A A* - I|.
    pub fn unitarity_defect(&self) -> f64 {
        (self.entries * self.entries.adjoint() - Matrix4::identity())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Defect of the property named by the construction tag (0 for `General`).
    pub fn tag_defect(&self) -> f64 {
        match self.tag {
            MatrixTag::General => 0.0,
            MatrixTag::Hermitian => self.hermiticity_defect(),
            MatrixTag::Unitary => self.unitarity_defect(),
        }
    }

    /// Ascending eigenvalues of the Hermitian part (A + A*)/2.
    pub fn hermitian_eigenvalues(&self) -> [f64; 4] {
        let h = (self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: [f64; 4] = SymmetricEigen::new(h).eigenvalues.into();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Operator 2-norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        let g = Self::new(self.entries.adjoint() * self.entries, MatrixTag::Hermitian);
        g.hermitian_eigenvalues()[3].max(0.0).sqrt()
    }

    /// Numerical rank: singular values above `tol` times the largest.
    pub fn rank(&self, tol: f64) -> usize {
        let g = Self::new(self.entries.adjoint() * self.entries, MatrixTag::Hermitian);
        let ev = g.hermitian_eigenvalues();
        let cut = tol * tol * ev[3].max(0.0);
        ev.iter().filter(|&&s| s > cut).count()
    }

    /// Upper-left 2×2 block.
    pub fn upper_block(&self) -> Matrix2<Complex64> {
        self.entries.fixed_view::<2, 2>(0, 0).into_owned()
    }
}

impl Mul for SpinorMatrix4 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let tag = if self.tag == MatrixTag::Unitary && o.tag == MatrixTag::Unitary {
            MatrixTag::Unitary
        } else {
            MatrixTag::General
        };
        Self::new(self.entries * o.entries, tag)
    }
}

impl Sub for SpinorMatrix4 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let tag = if self.tag == MatrixTag::Hermitian && o.tag == MatrixTag::Hermitian {
            MatrixTag::Hermitian
        } else {
            MatrixTag::General
        };
        Self::new(self.entries - o.entries, tag)
    }
}

/// Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// σ·v for a real 3-vector.
pub fn sigma_dot(v: &MomentumVector) -> Matrix2<Complex64> {
    let s = pauli();
    s[0] * Complex64::from(v.0[0]) + s[1] * Complex64::from(v.0[1]) + s[2] * Complex64::from(v.0[2])
}

fn block(
    a: Matrix2<Complex64>,
    b: Matrix2<Complex64>,
    c: Matrix2<Complex64>,
    d: Matrix2<Complex64>,
) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&d);
    m
}

/// The Dirac β matrix diag(1, 1, -1, -1).
pub fn beta() -> SpinorMatrix4 {
    let e = Matrix2::identity();
    SpinorMatrix4::new(block(e, Matrix2::zeros(), Matrix2::zeros(), -e), MatrixTag::Hermitian)
}

/// α·v = [[0, σ·v], [σ·v, 0]].
pub fn alpha_dot(v: &MomentumVector) -> SpinorMatrix4 {
    let s = sigma_dot(v);
    SpinorMatrix4::new(block(Matrix2::zeros(), s, s, Matrix2::zeros()), MatrixTag::Hermitian)
}

fn check_magnitude(p_mag: f64) -> Result<()> {
    if !(p_mag >= 0.0) || !p_mag.is_finite() {
        return Err(domain(alloc::format!(
            "momentum magnitude must be finite and >= 0, got {p_mag}"
        )));
    }
    Ok(())
}

/// Relativistic dispersion λ(p) = √(c²p² + m²c⁴).
pub fn lambda_of(p_mag: f64, params: &PhysParams) -> Result<f64> {
    check_magnitude(p_mag)?;
    Ok(lambda_unchecked(p_mag, params))
}

#[inline]
pub(crate) fn lambda_unchecked(p_mag: f64, params: &PhysParams) -> f64 {
    libm::hypot(params.c * p_mag, params.m * params.c * params.c)
}

/// Foldy–Wouthuysen coefficients (a₊, a₋) = (√(½(1 + mc²/λ)), √(½(1 - mc²/λ))).
///
/// a₋ is formed from λ - mc² = c²p²/(λ + mc²) so it keeps full relative
/// accuracy at small momenta.
pub fn a_plus_minus(p_mag: f64, params: &PhysParams) -> Result<(f64, f64)> {
    check_magnitude(p_mag)?;
    Ok(a_pm_unchecked(p_mag, params))
}

#[inline]
pub(crate) fn a_pm_unchecked(p_mag: f64, params: &PhysParams) -> (f64, f64) {
    let mc2 = params.rest_energy();
    let lam = lambda_unchecked(p_mag, params);
    let cp = params.c * p_mag;
    let minus = (cp / (lam + mc2)) * cp;
    let a_plus = ((lam + mc2) / (2.0 * lam)).sqrt();
    let a_minus = (minus / (2.0 * lam)).sqrt();
    (a_plus, a_minus)
}

/// D(p) = c α·p + mc² β.
pub fn dirac_symbol(p: &MomentumVector, params: &PhysParams) -> SpinorMatrix4 {
    let m = alpha_dot(p).entries * Complex64::from(params.c) + beta().entries * Complex64::from(params.rest_energy());
    SpinorMatrix4::new(m, MatrixTag::Hermitian)
}

/// U(p) = a₊ I + a₋ β α·p̂, or its inverse U(p)* = a₊ I - a₋ β α·p̂.
/// U(0) = I.
pub fn fw_unitary(p: &MomentumVector, params: &PhysParams, inverse: bool) -> SpinorMatrix4 {
    let Some(unit) = p.unit() else {
        return SpinorMatrix4::identity();
    };
    let (ap, am) = a_pm_unchecked(p.norm(), params);
    let sign = if inverse { -1.0 } else { 1.0 };
    let ba = beta().entries * alpha_dot(&unit).entries;
    let m = Matrix4::identity() * Complex64::from(ap) + ba * Complex64::from(sign * am);
    SpinorMatrix4::new(m, MatrixTag::Unitary)
}

/// Sign selecting the positive or negative spectral subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EnergySign {
    Positive,
    Negative,
}

/// Λ±(p) = U(p)⁻¹ (I ± β)/2 U(p).
pub fn projector_symbol(p: &MomentumVector, sign: EnergySign, params: &PhysParams) -> SpinorMatrix4 {
    let s = match sign {
        EnergySign::Positive => 1.0,
        EnergySign::Negative => -1.0,
    };
    let half = (Matrix4::identity() + beta().entries * Complex64::from(s)) * Complex64::from(0.5);
    let u = fw_unitary(p, params, false).entries;
    let ui = fw_unitary(p, params, true).entries;
    SpinorMatrix4::new(ui * half * u, MatrixTag::Hermitian)
}

/// Upper 2×2 block of U(p)·s·U⁻¹(q) in closed form:
/// s·[a₊(p)a₊(q) I + a₋(p)a₋(q)(σ·p̂)(σ·q̂)].
pub fn fw_block_upper(
    p: &MomentumVector,
    q: &MomentumVector,
    scalar: Complex64,
    params: &PhysParams,
) -> Result<Matrix2<Complex64>> {
    let (Some(pu), Some(qu)) = (p.unit(), q.unit()) else {
        return Err(domain("fw_block_upper needs nonzero momenta"));
    };
    let (ap, am) = a_pm_unchecked(p.norm(), params);
    let (aq, bq) = a_pm_unchecked(q.norm(), params);
    let m = Matrix2::identity() * Complex64::from(ap * aq) + sigma_dot(&pu) * sigma_dot(&qu) * Complex64::from(am * bq);
    Ok(m * scalar)
}

/// K_R(p, q) = U(p/R) - U((p - q)/R).
pub fn fw_difference_kernel(
    p: &MomentumVector,
    q: &MomentumVector,
    r: f64,
    params: &PhysParams,
) -> Result<SpinorMatrix4> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(alloc::format!("scale R must be positive, got {r}")));
    }
    let d = *p - *q;
    if p.norm() == 0.0 || d.norm() == 0.0 {
        return Err(domain("fw_difference_kernel needs |p| > 0 and |p - q| > 0"));
    }
    let a = fw_unitary(&p.scale(1.0 / r), params, false);
    let b = fw_unitary(&d.scale(1.0 / r), params, false);
    Ok(SpinorMatrix4::new(a.entries - b.entries, MatrixTag::General))
}

/// The bound 5√2|q|/(mcR) on ‖K_R(p, q)‖₂.
pub fn difference_kernel_bound(q: &MomentumVector, r: f64, params: &PhysParams) -> f64 {
    5.0 * core::f64::consts::SQRT_2 * q.norm() / (params.m * params.c * r)
}

/// Action of U(p) on the radial pair (f, g) of channel κ, where the spinor is
/// (f(p) Ω_κ(p̂), g(p) Ω_{-κ}(p̂)). Uses σ·p̂ Ω_κ = -Ω_{-κ}.
pub fn channel_rotation(p_mag: f64, kappa: i32, params: &PhysParams) -> Result<Matrix2<f64>> {
    if kappa == 0 {
        return Err(domain("kappa must be nonzero"));
    }
    check_magnitude(p_mag)?;
    let (ap, am) = a_pm_unchecked(p_mag, params);
    Ok(Matrix2::new(ap, -am, am, ap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::spherical_spinor;
    use proptest::prelude::*;

    fn unit() -> PhysParams {
        PhysParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn vec_strategy() -> impl Strategy<Value = MomentumVector> {
        (1e-6f64..1e3, 0.0f64..core::f64::consts::PI, 0.0f64..6.3)
            .prop_map(|(r, t, f)| MomentumVector::spherical(r, t, f))
    }

    #[test]
    fn lambda_examples() {
        let p = unit();
        assert_eq!(lambda_of(0.0, &p).unwrap(), 1.0);
        assert!((lambda_of(1.0, &p).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let q = PhysParams::new(2.0, 0.5, 0.0).unwrap();
        assert!((lambda_of(3.0, &q).unwrap() - 40f64.sqrt()).abs() < 1e-14);
        assert!(lambda_of(-1.0, &p).is_err());
    }

    #[test]
    fn a_pm_examples() {
        let p = unit();
        assert_eq!(a_plus_minus(0.0, &p).unwrap(), (1.0, 0.0));
        let (a, b) = a_plus_minus(1.0, &p).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((a - ((1.0 + s) / 2.0).sqrt()).abs() < 1e-15);
        assert!((b - ((1.0 - s) / 2.0).sqrt()).abs() < 1e-15);
        let (a, b) = a_plus_minus(1e12, &p).unwrap();
        assert!((a - s).abs() < 1e-11 && (b - s).abs() < 1e-11);
    }

    #[test]
    fn symbol_at_rest_is_beta() {
        let p = PhysParams::default();
        let d = dirac_symbol(&MomentumVector::ZERO, &p);
        let diff = d - SpinorMatrix4::new(
            beta().entries() * Complex64::from(p.rest_energy()),
            MatrixTag::Hermitian,
        );
        assert_eq!(diff.max_abs(), 0.0);
        assert_eq!(fw_unitary(&MomentumVector::ZERO, &p, false), SpinorMatrix4::identity());
        let lp = projector_symbol(&MomentumVector::ZERO, EnergySign::Positive, &p);
        let want = Matrix4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ZERO, ZERO));
        assert_eq!(lp.entries(), &want);
    }

    #[test]
    fn symbol_traceless() {
        let d = dirac_symbol(&MomentumVector([1.0, 0.0, 0.0]), &unit());
        assert_eq!(d.trace(), ZERO);
    }

    #[test]
    fn block_parallel_and_perpendicular() {
        let params = unit();
        let p = MomentumVector([0.3, -0.2, 0.9]);
        let b = fw_block_upper(&p, &p, ONE, &params).unwrap();
        assert!((b - Matrix2::identity()).iter().all(|z| z.norm() < 1e-15));

        let p = MomentumVector([2.0, 0.0, 0.0]);
        let q = MomentumVector([0.0, 0.5, 0.0]);
        let (a1, b1) = a_pm_unchecked(2.0, &params);
        let (a2, b2) = a_pm_unchecked(0.5, &params);
        let n = p.unit().unwrap().cross(&q.unit().unwrap());
        let want = Matrix2::identity() * Complex64::from(a1 * a2) + sigma_dot(&n) * (I * (b1 * b2));
        let got = fw_block_upper(&p, &q, ONE, &params).unwrap();
        assert!((got - want).iter().all(|z| z.norm() < 1e-15));
        assert!(fw_block_upper(&MomentumVector::ZERO, &q, ONE, &params).is_err());
    }

    #[test]
    fn difference_kernel_vanishes_for_zero_shift() {
        let p = MomentumVector([1.0, 2.0, 3.0]);
        let k = fw_difference_kernel(&p, &MomentumVector::ZERO, 3.0, &unit()).unwrap();
        assert_eq!(k.max_abs(), 0.0);
        assert!(fw_difference_kernel(&p, &p, 3.0, &unit()).is_err());
        assert!(fw_difference_kernel(&p, &p, -1.0, &unit()).is_err());
    }

    #[test]
    fn channel_rotation_basic() {
        let p = PhysParams::default();
        assert_eq!(channel_rotation(0.0, -1, &p).unwrap(), Matrix2::identity());
        assert!(channel_rotation(1.0, 0, &p).is_err());
        for x in [1e-3, 1.0, 1e3, 1e6] {
            let r = channel_rotation(x, 2, &p).unwrap();
            assert!((r.determinant() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn channel_rotation_matches_spinor_action() {
        // Build the 4-spinor (f Ω_κ, g Ω_{-κ}) from spherical harmonics, apply
        // the 4×4 unitary and read back the radial pair.
        let params = unit();
        for kappa in [-1, 1, -2, 2] {
            for (theta, phi) in [(0.0, 0.0), (0.7, 1.1), (2.5, -0.4)] {
                let pm = 0.8;
                let p = MomentumVector::spherical(pm, theta, phi);
                let (f, g) = (0.6, -1.3);
                let up = spherical_spinor(kappa, 0.5, theta, phi);
                let dn = spherical_spinor(-kappa, 0.5, theta, phi);
                let psi = nalgebra::Vector4::new(up[0] * f, up[1] * f, dn[0] * g, dn[1] * g);
                let out = fw_unitary(&p, &params, false).entries() * psi;
                let rot = channel_rotation(pm, kappa, &params).unwrap();
                let (f2, g2) = (rot[(0, 0)] * f + rot[(0, 1)] * g, rot[(1, 0)] * f + rot[(1, 1)] * g);
                let want = nalgebra::Vector4::new(up[0] * f2, up[1] * f2, dn[0] * g2, dn[1] * g2);
                let dev = (out - want).iter().fold(0.0f64, |m, z| m.max(z.norm()));
                assert!(dev < 1e-12, "kappa={kappa} theta={theta} dev={dev}");
            }
        }
    }

    proptest! {
        #[test]
        fn fw_unitary_and_diagonalizes(p in vec_strategy()) {
            let params = PhysParams::default();
            let u = fw_unitary(&p, &params, false);
            let ui = fw_unitary(&p, &params, true);
            prop_assert!(u.unitarity_defect() < 1e-12);
            prop_assert!((u * ui).unitarity_defect() < 1e-12);
            let lam = lambda_of(p.norm(), &params).unwrap();
            let d = u.entries() * dirac_symbol(&p, &params).entries() * ui.entries();
            let dev = (d - beta().entries() * Complex64::from(lam)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            prop_assert!(dev < 1e-11 * lam);
        }

        #[test]
        fn dirac_eigenvalues_are_pm_lambda(p in vec_strategy()) {
            let params = unit();
            let ev = dirac_symbol(&p, &params).hermitian_eigenvalues();
            let lam = lambda_of(p.norm(), &params).unwrap();
            for (k, s) in [-1.0, -1.0, 1.0, 1.0].iter().enumerate() {
                prop_assert!((ev[k] - s * lam).abs() < 1e-10 * lam);
            }
        }

        #[test]
        fn projector_algebra(p in vec_strategy()) {
            let params = PhysParams::default();
            let lp = projector_symbol(&p, EnergySign::Positive, &params);
            let lm = projector_symbol(&p, EnergySign::Negative, &params);
            prop_assert!((lp * lp - lp).max_abs() < 1e-12);
            prop_assert!(lp.hermiticity_defect() < 1e-12);
            prop_assert!((lp * lm).max_abs() < 1e-12);
            let sum = SpinorMatrix4::new(lp.entries() + lm.entries(), MatrixTag::General);
            prop_assert!((sum - SpinorMatrix4::identity()).max_abs() < 1e-12);
            prop_assert_eq!(lp.rank(1e-6), 2);
            let lam = lambda_of(p.norm(), &params).unwrap();
            let d = dirac_symbol(&p, &params);
            let lhs = lp * d * lp;
            let rhs = SpinorMatrix4::new(lp.entries() * Complex64::from(lam), MatrixTag::General);
            prop_assert!((lhs - rhs).max_abs() < 1e-12 * lam);
        }

        #[test]
        fn block_closed_form_matches_product(p in vec_strategy(), q in vec_strategy(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let params = unit();
            let s = Complex64::new(re, im);
            let full = fw_unitary(&p, &params, false).entries() * s * fw_unitary(&q, &params, true).entries();
            let direct = full.fixed_view::<2, 2>(0, 0).into_owned();
            let closed = fw_block_upper(&p, &q, s, &params).unwrap();
            prop_assert!((direct - closed).iter().all(|z| z.norm() < 1e-13));
        }
    }
}
