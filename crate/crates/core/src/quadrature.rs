//! Quadrature rules.
//!
//! Fixed Gauss–Legendre and Gauss–Lobatto rules, a globally adaptive
//! Gauss–Kronrod (7/15) integrator, and double-exponential rules for
//! integrands with endpoint singularities. The double-exponential rules pass
//! the exact distance to the nearest endpoint to the integrand so that
//! log-singular kernels can be evaluated without cancellation in `q - p`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on (-1, 1), nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 * x.abs().max(1e-3) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        t.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&w| half * w).collect(),
    )
}

/// Gauss–Lobatto nodes and weights on [-1, 1] with `n >= 2` points,
/// including both endpoints.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Lobatto rule needs at least two nodes");
    let m = n - 1;
    let mf = m as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    let w_end = 2.0 / (mf * (mf + 1.0));
    weights[0] = w_end;
    weights[m] = w_end;
    // Interior nodes are the roots of P'_m; Newton on (1-x²)P'_m.
    for i in 1..m {
        let mut x = -(PI * i as f64 / mf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            // f = (1-x²)P'_m, f' = -m(m+1) P_m
            let f = (1.0 - x * x) * dp;
            let df = -mf * (mf + 1.0) * p;
            let dx = f / df;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, _) = legendre_with_derivative(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / (mf * (mf + 1.0) * p * p);
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) }
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7-point weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Options for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64) -> ([f64; N], f64)
where
    F: FnMut(f64) -> [f64; N],
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let fc = f(mid);
    for c in 0..N {
        kronrod[c] = GK15_WEIGHTS[7] * fc[c];
        gauss[c] = G7_WEIGHTS[3] * fc[c];
    }
    for j in 0..7 {
        let dx = half * GK15_NODES[j];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            kronrod[c] += GK15_WEIGHTS[j] * s;
            if j % 2 == 1 {
                gauss[c] += G7_WEIGHTS[j / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for c in 0..N {
        kronrod[c] *= half;
        gauss[c] *= half;
        err = err.max((kronrod[c] - gauss[c]).abs());
        if !kronrod[c].is_finite() {
            err = f64::INFINITY;
        }
    }
    (kronrod, err)
}

/// Globally adaptive Gauss–Kronrod integration of a vector-valued integrand
/// over the finite interval [a, b].
///
/// The error estimate is the maximum over components. On failure the
/// returned [`Error::NonConvergence`] carries the best estimate of the first
/// component.
pub fn integrate_adaptive<const N: usize, F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    let (value, error) = gk15(&mut f, a, b);
    let mut intervals = vec![Interval { a, b, value, error }];
    loop {
        let mut total = [0.0; N];
        let mut total_err = 0.0;
        let mut worst = 0;
        for (k, iv) in intervals.iter().enumerate() {
            for (t, v) in total.iter_mut().zip(&iv.value) {
                *t += v;
            }
            total_err += iv.error;
            if iv.error > intervals[worst].error {
                worst = k;
            }
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * scale);
        if total_err <= target {
            return Ok(total);
        }
        let iv = intervals[worst];
        let mid = 0.5 * (iv.a + iv.b);
        if intervals.len() >= opts.max_intervals || !(mid > iv.a && mid < iv.b) {
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Kronrod quadrature".into(),
                estimate: total[0],
                error: total_err,
            });
        }
        let (lv, le) = gk15(&mut f, iv.a, mid);
        let (rv, re) = gk15(&mut f, mid, iv.b);
        intervals[worst] = Interval {
            a: iv.a,
            b: mid,
            value: lv,
            error: le,
        };
        intervals.push(Interval {
            a: mid,
            b: iv.b,
            value: rv,
            error: re,
        });
    }
}

/// Scalar convenience wrapper around [`integrate_adaptive`].
pub fn integrate_adaptive_scalar<F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_adaptive(|x| [f(x)], a, b, opts).map(|v| v[0])
}

/// A quadrature abscissa of a double-exponential rule.
///
/// `from_left` and `from_right` are the distances to the interval ends,
/// computed without rounding through `x`. `from_right` is infinite on
/// half-lines.
#[derive(Debug, Clone, Copy)]
pub struct DePoint {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
}

const DE_MAX_LEVEL: usize = 12;

/// Tanh–sinh quadrature on the finite interval [a, b].
///
/// Converges double-exponentially for integrands analytic inside the interval
/// even with algebraic or logarithmic endpoint singularities.
pub fn tanh_sinh<const N: usize, F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<[f64; N]>
where
    F: FnMut(DePoint) -> [f64; N],
{
    let len = b - a;
    let half = 0.5 * len;
    let mut eval = |t: f64| -> Option<([f64; N], f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let from_left = len / (1.0 + (-2.0 * u).exp());
        let from_right = len / (1.0 + (2.0 * u).exp());
        if from_left <= 0.0 || from_right <= 0.0 || !from_left.is_finite() {
            return None;
        }
        let cu = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 || !w.is_finite() {
            return None;
        }
        let x = if from_left < from_right {
            a + from_left
        } else {
            b - from_right
        };
        Some((
            f(DePoint {
                x,
                from_left,
                from_right,
            }),
            w,
        ))
    };
    de_sum(&mut eval, 4.5, rel_tol, "tanh-sinh quadrature")
}

/// Exp–sinh quadrature on the half line [a, ∞), with abscissae
/// x = a + scale·exp(π/2·sinh t).
pub fn exp_sinh<const N: usize, F>(mut f: F, a: f64, scale: f64, rel_tol: f64) -> Result<[f64; N]>
where
    F: FnMut(DePoint) -> [f64; N],
{
    let mut eval = |t: f64| -> Option<([f64; N], f64)> {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        let from_left = scale * e;
        if from_left <= 1e-300 || !from_left.is_finite() || from_left > 1e300 {
            return None;
        }
        let w = FRAC_PI_2 * t.cosh() * from_left;
        Some((
            f(DePoint {
                x: a + from_left,
                from_left,
                from_right: f64::INFINITY,
            }),
            w,
        ))
    };
    de_sum(&mut eval, 5.0, rel_tol, "exp-sinh quadrature")
}

fn de_sum<const N: usize, E>(eval: &mut E, t_max: f64, rel_tol: f64, what: &str) -> Result<[f64; N]>
where
    E: FnMut(f64) -> Option<([f64; N], f64)>,
{
    let mut h = 0.5;
    let mut sum = [0.0; N];
    // Σ|w f| bounds the rounding error of the sum.
    let mut abs_sum = 0.0f64;
    // Level 0: all points k·h.
    let kmax = (t_max / h) as i64;
    for k in -kmax..=kmax {
        if let Some((v, w)) = eval(k as f64 * h) {
            for c in 0..N {
                sum[c] += w * v[c];
                abs_sum = abs_sum.max((w * v[c]).abs());
            }
        }
    }
    let mut prev: [f64; N] = core::array::from_fn(|c| sum[c] * h);
    for _level in 1..=DE_MAX_LEVEL {
        h *= 0.5;
        let kmax = (t_max / h) as i64;
        let mut k = -kmax + if kmax % 2 == 0 { 1 } else { 0 };
        while k <= kmax {
            if let Some((v, w)) = eval(k as f64 * h) {
                for c in 0..N {
                    sum[c] += w * v[c];
                    abs_sum = abs_sum.max((w * v[c]).abs());
                }
            }
            k += 2;
        }
        let cur: [f64; N] = core::array::from_fn(|c| sum[c] * h);
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for c in 0..N {
            diff = diff.max((cur[c] - prev[c]).abs());
            scale = scale.max(cur[c].abs());
        }
        // Convergence is quadratic in the level, so a small change at this
        // level means the current value is already much better than `diff`.
        let noise = 1e3 * f64::EPSILON * abs_sum * h * (2.0 * t_max / h);
        if _level >= 3 && diff <= (rel_tol * scale).max(noise).max(1e-300) {
            return Ok(cur);
        }
        if _level >= 3 && scale == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    let scale = prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(prev);
    }
    Err(Error::NonConvergence {
        what: what.into(),
        estimate: prev[0],
        error: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 101, 400] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n} sum={total}");
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 1 { 2.0 / deg as f64 } else { 0.0 };
            // ∫ x^(2n-2) = 2/(2n-1)
            let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            assert!((val - exact).abs() < 1e-12, "n={n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn lobatto_contains_endpoints_and_is_exact() {
        for n in [2, 3, 6, 11] {
            let (x, w) = gauss_lobatto(n);
            assert_eq!(x[0], -1.0);
            assert_eq!(x[n - 1], 1.0);
            // exact for degree 2n-3
            let deg = 2 * n - 4;
            let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((val - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = integrate_adaptive_scalar(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, AdaptiveOptions::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn adaptive_reports_failure() {
        let opts = AdaptiveOptions {
            max_intervals: 3,
            ..Default::default()
        };
        let r = integrate_adaptive_scalar(|x| (x - 0.3).abs().ln(), -1.0, 1.0, opts);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn tanh_sinh_log_endpoint() {
        // ∫_0^1 ln(x) dx = -1, using the exact distance to the left end.
        let v = tanh_sinh(|p| [p.from_left.ln()], 0.0, 1.0, 1e-14).unwrap()[0];
        assert!((v + 1.0).abs() < 1e-13, "{v}");
        // ∫_0^1 x^-0.5 = 2
        let v = tanh_sinh(|p| [p.from_left.powf(-0.5)], 0.0, 1.0, 1e-12).unwrap()[0];
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn exp_sinh_half_line() {
        let v = exp_sinh(|p| [(-p.x).exp()], 0.0, 1.0, 1e-14).unwrap()[0];
        assert!((v - 1.0).abs() < 1e-13);
        // ∫_1^∞ ln(x-1) e^{1-x} dx = -γ
        let v = exp_sinh(|p| [p.from_left.ln() * (-p.from_left).exp()], 1.0, 1.0, 1e-13).unwrap()[0];
        assert!((v + 0.577_215_664_901_532_9).abs() < 1e-11, "{v}");
    }
}
