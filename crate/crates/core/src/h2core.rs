//! Coefficient-sequence algebra for H^2.
//!
//! A [`CoeffFun`] stores the first `N` Taylor coefficients of a function in
//! the Hardy space. The `exact` flag records that every coefficient beyond the
//! stored order is zero (a polynomial), which lets tail estimates return 0.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orders at or below this use direct convolution.
pub const FFT_CROSSOVER: usize = 512;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffFun {
    coeffs: Vec<Complex64>,
    exact: bool,
}

impl CoeffFun {
    /// Truncated series with an unknown tail.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "CoeffFun needs order >= 1");
        Self { coeffs, exact: false }
    }

    /// Polynomial: all coefficients past the stored order are zero.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "CoeffFun needs order >= 1");
        Self { coeffs, exact: true }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::polynomial(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(order: usize) -> Self {
        Self::polynomial(vec![ZERO; order.max(1)])
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut v = vec![ZERO; order.max(1)];
        v[0] = c;
        Self::polynomial(v)
    }

    /// z^k stored at order `order` (which must exceed k).
    pub fn monomial(k: usize, order: usize) -> Self {
        assert!(k < order, "monomial z^{k} does not fit in order {order}");
        let mut v = vec![ZERO; order];
        v[k] = ONE;
        Self::polynomial(v)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn with_exact(mut self, exact: bool) -> Self {
        self.exact = exact;
        self
    }

    /// Coefficient n, zero past the stored order.
    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Index of the last nonzero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != ZERO)
    }

    /// Truncate or zero-pad to `order`.
    pub fn resized(&self, order: usize) -> Self {
        let order = order.max(1);
        let mut v = self.coeffs.clone();
        let dropped_nonzero = v.iter().skip(order).any(|c| *c != ZERO);
        v.resize(order, ZERO);
        Self { coeffs: v, exact: self.exact && !dropped_nonzero }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().max(other.order());
        let v = (0..n).map(|i| self.get(i) + other.get(i)).collect();
        Self { coeffs: v, exact: self.exact && other.exact }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().max(other.order());
        let v = (0..n).map(|i| self.get(i) - other.get(i)).collect();
        Self { coeffs: v, exact: self.exact && other.exact }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect(), exact: self.exact }
    }

    /// First `order` coefficients of the product.
    pub fn mul_trunc(&self, other: &Self, order: usize) -> Self {
        let v = convolve(&self.coeffs, &other.coeffs, order.max(1));
        let exact = self.exact
            && other.exact
            && match (self.degree(), other.degree()) {
                (Some(a), Some(b)) => a + b < order,
                _ => true,
            };
        Self { coeffs: v, exact }
    }
}

/// Parameters of (1 - z)^mu log^j(1 - z); Re mu > -1/2 is enforced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLogParams {
    mu: Complex64,
    j: usize,
}

impl PowerLogParams {
    pub fn new(mu: Complex64, j: usize) -> Result<Self> {
        if !(mu.re > -0.5) {
            return Err(Error::InvalidParameter(format!(
                "Re mu must exceed -1/2 for H^2 membership, got {mu}"
            )));
        }
        Ok(Self { mu, j })
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn j(&self) -> usize {
        self.j
    }
}

/// Sum of a_n conj(b_n) over the common range.
pub fn inner_product(f: &CoeffFun, g: &CoeffFun) -> Complex64 {
    f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b.conj()).sum()
}

/// First N coefficients of (1 - z)^mu, principal branch.
pub fn power_series(mu: Complex64, n: usize) -> CoeffFun {
    let n = n.max(1);
    let mut c = Vec::with_capacity(n);
    let mut cur = ONE;
    for k in 0..n {
        c.push(cur);
        cur = cur * (k as f64 - mu) / (k as f64 + 1.0);
    }
    let exact = mu.im == 0.0 && mu.re >= 0.0 && mu.re.fract() == 0.0 && (mu.re as usize) < n;
    CoeffFun { coeffs: c, exact }
}

/// log(1 - z) = -sum z^n / n.
pub fn log_series(n: usize) -> CoeffFun {
    let n = n.max(1);
    let c = (0..n)
        .map(|k| if k == 0 { ZERO } else { Complex64::new(-1.0 / k as f64, 0.0) })
        .collect();
    CoeffFun::new(c)
}

/// Coefficients of (1 - z)^mu log^j(1 - z).
pub fn power_log_series(p: PowerLogParams, n: usize) -> CoeffFun {
    let n = n.max(1);
    let mut out = power_series(p.mu, n);
    if p.j > 0 {
        let log = log_series(n);
        for _ in 0..p.j {
            out = out.mul_trunc(&log, n);
        }
        out.exact = false;
    }
    out
}

/// Horner evaluation of the stored polynomial.
pub fn eval(f: &CoeffFun, z: Complex64) -> Complex64 {
    f.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Reproducing kernel k_lambda(z) = 1/(1 - conj(lambda) z).
pub fn cauchy_kernel(lambda: Complex64, n: usize) -> CoeffFun {
    let n = n.max(1);
    let lb = lambda.conj();
    let mut c = Vec::with_capacity(n);
    let mut cur = ONE;
    for _ in 0..n {
        c.push(cur);
        cur *= lb;
    }
    CoeffFun { coeffs: c, exact: lambda == ZERO }
}

/// Upper estimate of the l^2 tail past the stored order, assuming
/// |a_n| <= c n^(-s) with c fitted on the last quarter of the stored range.
pub fn tail_bound(f: &CoeffFun, decay_exponent: f64) -> Result<f64> {
    if f.exact {
        return Ok(0.0);
    }
    let s = decay_exponent;
    if !(s > 0.5) {
        return Err(Error::NotSquareSummable(s));
    }
    let n = f.order();
    let lo = (3 * n / 4).max(1);
    let c = (lo..n)
        .map(|k| f.coeffs[k].norm() * (k as f64).powf(s))
        .fold(0.0, f64::max);
    let nf = n as f64;
    Ok(c * (nf.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0)).sqrt())
}

/// First `n` coefficients of the Cauchy product of `a` and `b`.
pub fn convolve(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let a = &a[..a.len().min(n)];
    let b = &b[..b.len().min(n)];
    if a.is_empty() || b.is_empty() {
        return vec![ZERO; n];
    }
    if n <= FFT_CROSSOVER || a.len().min(b.len()) <= 32 {
        return convolve_direct(a, b, n);
    }
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let (fwd, inv) = fft_pair(size);
    let mut fa = padded(a, size);
    let mut fb = padded(b, size);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    let mut out: Vec<Complex64> = fa.into_iter().take(n).map(|x| x * scale).collect();
    out.resize(n, ZERO);
    out
}

/// out_k = sum_j conj(u_j) f_{j+k} for k < n (the co-analytic Toeplitz action).
pub fn correlate(u: &[Complex64], f: &[Complex64], n: usize) -> Vec<Complex64> {
    let lf = f.len();
    if lf == 0 || u.is_empty() {
        return vec![ZERO; n];
    }
    // Reverse f so the correlation becomes a convolution.
    let rev: Vec<Complex64> = f.iter().rev().copied().collect();
    let ub: Vec<Complex64> = u.iter().take(lf).map(|c| c.conj()).collect();
    let full = convolve(&ub, &rev, lf);
    // full[m] = sum_j conj(u_j) f_{lf-1-m+j}; k = lf-1-m
    let mut out = vec![ZERO; n];
    for (k, slot) in out.iter_mut().enumerate().take(lf) {
        *slot = full[lf - 1 - k];
    }
    out
}

fn convolve_direct(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == ZERO {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn padded(x: &[Complex64], size: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(size);
    v.extend_from_slice(x);
    v.resize(size, ZERO);
    v
}

pub(crate) fn fft_pair(size: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(size), planner.plan_fft_inverse(size))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn inner_product_examples() {
        let one = CoeffFun::constant(ONE, 4);
        assert_eq!(inner_product(&one, &one), ONE);
        let z = CoeffFun::monomial(1, 4);
        assert_eq!(inner_product(&z, &one), ZERO);
    }

    #[test]
    fn sqrt_series_norm_against_brute_force() {
        let f = power_series(c(0.5), 1 << 12);
        let ours = inner_product(&f, &f).re;
        // Oracle: 10^6 terms of the real recurrence, summed independently.
        let mut cur = 1.0f64;
        let mut s = 0.0f64;
        for k in 0..1_000_000u32 {
            if (k as usize) < (1 << 12) {
                s += cur * cur;
            }
            cur *= (k as f64 - 0.5) / (k as f64 + 1.0);
        }
        assert!((ours - s).abs() <= 1e-13 * s);
    }

    #[test]
    fn power_series_examples() {
        assert_eq!(power_series(c(1.0), 4).coeffs(), &[c(1.0), c(-1.0), c(0.0), c(0.0)]);
        assert_eq!(power_series(c(2.0), 4).coeffs(), &[c(1.0), c(-2.0), c(1.0), c(0.0)]);
        let half = power_series(c(0.5), 4);
        assert!(close(half.coeffs(), &[c(1.0), c(-0.5), c(-0.125), c(-0.0625)], 1e-16));
        assert!(power_series(c(2.0), 4).is_exact());
        assert!(!half.is_exact());
    }

    #[test]
    fn generalized_binomial_against_direct_product() {
        let mu = Complex64::new(0.3, -0.7);
        let f = power_series(mu, 20);
        for n in 0..20 {
            // (-1)^n C(mu, n) = (-1)^n prod_{k<n} (mu - k) / n!
            let mut p = ONE;
            for k in 0..n {
                p *= (mu - k as f64) / (k as f64 + 1.0);
            }
            if n % 2 == 1 {
                p = -p;
            }
            assert!((f.get(n) - p).norm() < 1e-15);
        }
    }

    #[test]
    fn power_log_examples() {
        let l = power_log_series(PowerLogParams::new(c(0.0), 1).unwrap(), 4);
        assert!(close(l.coeffs(), &[c(0.0), c(-1.0), c(-0.5), c(-1.0 / 3.0)], 1e-16));
        let id = power_log_series(PowerLogParams::new(c(0.0), 0).unwrap(), 3);
        assert_eq!(id.coeffs(), &[c(1.0), c(0.0), c(0.0)]);
        // (1 - z) log(1 - z) = -z + z^2/2 + ...
        let m = power_log_series(PowerLogParams::new(c(1.0), 1).unwrap(), 3);
        assert!(close(m.coeffs(), &[c(0.0), c(-1.0), c(0.5)], 1e-16));
        assert!(PowerLogParams::new(c(-0.5), 0).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&CoeffFun::from_real(&[1.0, -1.0]), c(0.5)), c(0.5));
        assert_eq!(eval(&CoeffFun::constant(ONE, 5), Complex64::new(0.3, 0.9)), ONE);
        let f = power_series(c(0.5), 10_000);
        let err = (eval(&f, c(0.3)) - c(0.7f64.sqrt())).norm();
        // The tail past N at z = 0.3 is geometric; far below the l^2 tail bound.
        assert!(err <= tail_bound(&f, 1.5).unwrap());
        assert!(err < 1e-15);
    }

    #[test]
    fn cauchy_kernel_examples() {
        assert_eq!(cauchy_kernel(ZERO, 3).coeffs(), &[ONE, ZERO, ZERO]);
        assert_eq!(cauchy_kernel(c(0.5), 3).coeffs(), &[c(1.0), c(0.5), c(0.25)]);
        let f = CoeffFun::polynomial(vec![
            Complex64::new(0.2, 1.0),
            Complex64::new(-1.0, 0.5),
            Complex64::new(0.0, 3.0),
        ]);
        let lam = Complex64::new(0.4, -0.3);
        let k = cauchy_kernel(lam, 3);
        assert!((inner_product(&f, &k) - eval(&f, lam)).norm() < 1e-15);
    }

    #[test]
    fn tail_bound_examples() {
        let log = log_series(1_000_000);
        let b = tail_bound(&log, 1.0).unwrap();
        assert!(b <= 1e-3 * (1.0 + 1e-12));
        let sq = CoeffFun::new((0..1000).map(|k| c(if k == 0 { 0.0 } else { 1.0 / (k * k) as f64 })).collect());
        let b2 = tail_bound(&sq, 2.0).unwrap();
        assert!((b2 - (1e-9f64 / 3.0).sqrt()).abs() < 1e-9 * 1e-5);
        assert_eq!(tail_bound(&CoeffFun::from_real(&[1.0, 2.0]), 1.0).unwrap(), 0.0);
        assert!(matches!(tail_bound(&log, 0.5), Err(Error::NotSquareSummable(_))));
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let a: Vec<Complex64> = (0..900).map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let b: Vec<Complex64> = (0..700).map(|k| Complex64::new(1.0 / (k + 1) as f64, 0.1)).collect();
        let fast = convolve(&a, &b, 1200);
        let slow = convolve_direct(&a, &b, 1200);
        let scale: f64 = slow.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(close(&fast, &slow, 1e-12 * scale));
    }

    #[test]
    fn correlation_matches_definition() {
        let u: Vec<Complex64> = (0..40).map(|k| Complex64::new(0.9f64.powi(k), 0.1 * k as f64)).collect();
        let f: Vec<Complex64> = (0..600).map(|k| Complex64::new((k as f64).cos(), 1.0)).collect();
        let got = correlate(&u, &f, 600);
        for k in [0usize, 1, 17, 599] {
            let want: Complex64 = (0..u.len()).filter(|j| j + k < f.len()).map(|j| u[j].conj() * f[j + k]).sum();
            assert!((got[k] - want).norm() < 1e-11);
        }
    }

    #[test]
    fn mu_derivative_matches_log_series() {
        let mu = Complex64::new(0.4, 0.2);
        let h = 1e-5;
        let n = 64;
        let plus = power_series(mu + h, n);
        let minus = power_series(mu - h, n);
        let dlog = power_log_series(PowerLogParams::new(mu, 1).unwrap(), n);
        for k in 0..n {
            let fd = (plus.get(k) - minus.get(k)) / (2.0 * h);
            assert!((fd - dlog.get(k)).norm() < 1e-8, "k={k}");
        }
    }
}
