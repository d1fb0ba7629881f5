//! Special functions: Legendre P_l and Q_l, spherical Bessel j_l and the
//! exponentially scaled modified spherical Bessel e^{-x} i_l.

use crate::error::{domain, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Legendre polynomial P_l(t).
pub fn legendre_p(l: usize, t: f64) -> f64 {
    crate::quadrature::legendre_with_derivative(l, t).0
}

/// Legendre function of the second kind Q_l(z) for real z > 1.
pub fn legendre_q(l: usize, z: f64) -> Result<f64> {
    if !(z > 1.0) || !z.is_finite() {
        return Err(domain(alloc::format!("Legendre Q_l needs z > 1, got {z}")));
    }
    Ok(legendre_q_zm1(l, z, z - 1.0))
}

/// Q_l(z) given both z and the separately computed z - 1 > 0.
///
/// Near z = 1 the logarithmic singularity is driven by `zm1` so callers that
/// know z - 1 exactly (for instance (p-q)²/(2pq)) avoid cancellation.
pub fn legendre_q_zm1(l: usize, z: f64, zm1: f64) -> f64 {
    if z > 1.5 {
        return legendre_q_series(l, z);
    }
    let q0 = 0.5 * ((2.0 + zm1).ln() - zm1.ln());
    if l == 0 {
        return q0;
    }
    // Upward recurrence; on 1 < z <= 1.5 the amplification of rounding is
    // at most (z + sqrt(z²-1))^(2l), harmless for the small l used here.
    let mut qm = q0;
    let mut q = z * q0 - 1.0;
    for k in 1..l {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * z * q - kf * qm) / (kf + 1.0);
        qm = q;
        q = next;
    }
    q
}

/// Hypergeometric representation
/// Q_l(z) = l!(l+1)! 2^(l+1) / ((2l+2)! z^(l+1)) · 2F1((l+1)/2, (l+2)/2; l+3/2; 1/z²).
fn legendre_q_series(l: usize, z: f64) -> f64 {
    let mut pref = 2.0;
    for k in 1..=l {
        pref *= (k * (k + 1)) as f64 * 2.0;
    }
    for k in 1..=(2 * l + 2) {
        pref /= k as f64;
    }
    pref /= z.powi(l as i32 + 1);
    let lf = l as f64;
    let (a, b, c) = (0.5 * (lf + 1.0), 0.5 * (lf + 2.0), lf + 1.5);
    let x = 1.0 / (z * z);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..400 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    pref * sum
}

/// Spherical Bessel function j_l(x).
pub fn spherical_jn(l: usize, x: f64) -> f64 {
    let ax = x.abs();
    let sign = if x < 0.0 && l % 2 == 1 { -1.0 } else { 1.0 };
    sign * if ax < l as f64 + 2.0 {
        spherical_jn_series(l, ax)
    } else {
        let mut jm = ax.sin() / ax;
        if l == 0 {
            return sign * jm;
        }
        let mut j = jm / ax - ax.cos() / ax;
        for k in 1..l {
            let next = (2.0 * k as f64 + 1.0) / ax * j - jm;
            jm = j;
            j = next;
        }
        j
    }
}

fn spherical_jn_series(l: usize, x: f64) -> f64 {
    let mut pref = 1.0;
    for k in 0..l {
        pref *= x / (2.0 * k as f64 + 3.0);
    }
    // x^l / (2l+1)!!
    let mut term = 1.0;
    let mut sum = 1.0;
    let y = -0.5 * x * x;
    for k in 1..200 {
        term *= y / (k as f64 * (2.0 * (l + k) as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    pref * sum
}

/// Exponentially scaled modified spherical Bessel function e^{-x} i_l(x), x >= 0.
pub fn scaled_spherical_in(l: usize, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 2.0 {
        let mut pref = 1.0;
        for k in 0..l {
            pref *= x / (2.0 * k as f64 + 3.0);
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        let y = 0.5 * x * x;
        for k in 1..200 {
            term *= y / (k as f64 * (2.0 * (l + k) as f64 + 1.0));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        return (-x).exp() * pref * sum;
    }
    // e^{-x} i_l(x) = (1/2x)[Σ (-1)^k c_k/(2x)^k - (-1)^l e^{-2x} Σ c_k/(2x)^k],
    // c_k = (l+k)!/(k!(l-k)!).
    let inv = 1.0 / (2.0 * x);
    let mut ck = 1.0;
    let mut pow = 1.0;
    let mut alt = 0.0;
    let mut plain = 0.0;
    for k in 0..=l {
        if k > 0 {
            ck *= ((l + k) * (l + 1 - k)) as f64 / k as f64;
            pow *= inv;
        }
        let t = ck * pow;
        alt += if k % 2 == 0 { t } else { -t };
        plain += t;
    }
    let sgn = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    inv * (alt - sgn * (-2.0 * x).exp() * plain)
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q_closed(l: usize, z: f64) -> f64 {
        let q0 = 0.5 * ((z + 1.0) / (z - 1.0)).ln();
        match l {
            0 => q0,
            1 => z * q0 - 1.0,
            2 => 0.5 * (3.0 * z * z - 1.0) * q0 - 1.5 * z,
            3 => 0.5 * (5.0 * z * z * z - 3.0 * z) * q0 - 2.5 * z * z + 2.0 / 3.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn q_matches_closed_forms_away_from_cancellation() {
        for l in 0..=3 {
            for z in [1.0001, 1.01, 1.2, 1.49, 1.51, 2.0] {
                let got = legendre_q(l, z).unwrap();
                let want = q_closed(l, z);
                assert!(
                    (got - want).abs() < 1e-10 * want.abs().max(1e-3),
                    "l={l} z={z} {got} {want}"
                );
            }
        }
    }

    #[test]
    fn q_large_argument_asymptotics() {
        // Q_l(z) ~ l!/(2l+1)!! · z^-(l+1)
        let z = 1e6;
        assert!((legendre_q(0, z).unwrap() * z - 1.0).abs() < 1e-10);
        assert!((legendre_q(1, z).unwrap() * 3.0 * z * z - 1.0).abs() < 1e-10);
        assert!((legendre_q(2, z).unwrap() * 7.5 * z.powi(3) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn q_rejects_bad_argument() {
        assert!(legendre_q(0, 1.0).is_err());
        assert!(legendre_q(0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn q_series_and_recurrence_agree(l in 0usize..4, z in 1.3f64..1.7) {
            let a = legendre_q_series(l, z);
            let b = {
                let q0 = 0.5 * ((2.0 + (z - 1.0)).ln() - (z - 1.0).ln());
                let mut qm = q0;
                let mut q = z * q0 - 1.0;
                if l == 0 { q = q0; }
                for k in 1..l {
                    let kf = k as f64;
                    let n = ((2.0 * kf + 1.0) * z * q - kf * qm) / (kf + 1.0);
                    qm = q; q = n;
                }
                q
            };
            prop_assert!((a - b).abs() < 1e-11 * a.abs());
        }

        #[test]
        fn q_wronskian(l in 1usize..4, z in 1.05f64..20.0) {
            // P_l Q_{l-1} - P_{l-1} Q_l = 1/l
            let w = legendre_p(l, z) * legendre_q(l - 1, z).unwrap()
                - legendre_p(l - 1, z) * legendre_q(l, z).unwrap();
            prop_assert!((w * l as f64 - 1.0).abs() < 1e-8);
        }

        #[test]
        fn jn_recurrence(l in 1usize..4, x in 0.01f64..30.0) {
            let lhs = spherical_jn(l - 1, x) + spherical_jn(l + 1, x);
            let rhs = (2 * l + 1) as f64 / x * spherical_jn(l, x);
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn scaled_in_branches_agree(l in 0usize..4, x in 1.9f64..2.1) {
            // both branches evaluated near the switch must be continuous
            let a = scaled_spherical_in(l, x);
            let h = 1e-7;
            let b = scaled_spherical_in(l, x + h);
            prop_assert!((a - b).abs() < 1e-6 * a);
        }
    }

    #[test]
    fn jn_closed_forms() {
        for x in [0.1, 1.0, 2.5, 7.0, 40.0] {
            let (s, c) = (f64::sin(x), f64::cos(x));
            assert!((spherical_jn(0, x) - s / x).abs() < 1e-14);
            assert!((spherical_jn(1, x) - (s / (x * x) - c / x)).abs() < 1e-13);
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert!((spherical_jn(2, x) - j2).abs() < 1e-12, "x={x}");
        }
        assert_eq!(spherical_jn(0, 0.0), 1.0);
        assert_eq!(spherical_jn(2, 0.0), 0.0);
    }

    #[test]
    fn scaled_in_closed_forms() {
        for x in [0.05, 0.7, 1.99, 2.0, 5.0, 60.0] {
            let e = (-x).exp();
            let i0 = if x < 20.0 { e * x.sinh() / x } else { 0.5 / x };
            assert!(
                (scaled_spherical_in(0, x) - i0).abs() < 1e-14 * i0.abs().max(1.0),
                "x={x}"
            );
            let i1 = if x < 20.0 {
                e * (x * x.cosh() - x.sinh()) / (x * x)
            } else {
                0.5 / x * (1.0 - 1.0 / x)
            };
            assert!((scaled_spherical_in(1, x) - i1).abs() < 1e-13, "x={x}");
        }
    }
}
