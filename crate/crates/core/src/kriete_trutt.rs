//! The Kriete-Trutt transform (K f)(w) = <f, q_conj(w)>, q_w = (1 - z)^{w/(1-w)},
//! which carries I - C to multiplication by w, and the function U_alpha.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cesaro_ops::{apply_c, apply_c_star};
use crate::error::{Error, Result};
use crate::h2core::{cauchy_kernel, power_series, CoeffFun};
use crate::quadrature::Integrator;
use crate::report::{CheckReport, Provenance};
use crate::special::gamma;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative size of the last-quarter partial sum that counts as stagnation.
pub const STAGNATION_TOL: f64 = 1e-10;

/// A point w of the disc with nu = w/(1 - w).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KTPoint {
    w: Complex64,
    nu: Complex64,
}

impl KTPoint {
    pub fn new(w: Complex64) -> Result<Self> {
        if !(w.norm() < 1.0) {
            return Err(Error::OutsideDisk(w));
        }
        let nu = w / (1.0 - w);
        assert!(nu.re > -0.5, "Re nu = {} for |w| < 1", nu.re);
        Ok(Self { w, nu })
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn nu(&self) -> Complex64 {
        self.nu
    }
}

/// sum a_n q_n with q = power_series(nu); a polynomial f gives the exact
/// finite sum, otherwise the last quarter of the partial sums must stagnate.
pub fn kt_transform(f: &CoeffFun, w: KTPoint) -> Result<Complex64> {
    let q = power_series(w.nu, f.order());
    let terms: Vec<Complex64> = f.coeffs().iter().zip(q.coeffs()).map(|(a, b)| a * b).collect();
    let total: Complex64 = terms.iter().sum();
    if !f.is_exact() {
        let lo = 3 * terms.len() / 4;
        let last: Complex64 = terms[lo..].iter().sum();
        if last.norm() > STAGNATION_TOL * total.norm().max(1.0) {
            return Err(Error::NoStagnation { increment: last.norm() });
        }
    }
    Ok(total)
}

/// K k_lambda (w) = (1 - conj(lambda))^{w/(1-w)}.
pub fn kt_cauchy_closed_form(lambda: Complex64, w: KTPoint) -> Complex64 {
    (1.0 - lambda.conj()).powc(w.nu)
}

/// integral over [0, 1] of (1 - z)^nu dz by Gauss-Jacobi endpoint quadrature.
pub fn power_integral(nu: Complex64) -> Result<Complex64> {
    let f = |x: f64| Complex64::new(x, 0.0).powc(nu);
    Ok(Integrator::default().integrate_endpoint(&f, 0.0, 1.0, nu.re)?.value)
}

/// K(C f)(w) for a polynomial f. Past the degree, (C f)_n = f(1)/(n + 1), and
/// the tail sum f(1) sum_{n >= N} q_n/(n + 1) is closed by the integral of (1 - z)^nu.
pub fn kt_of_cesaro(f: &CoeffFun, w: KTPoint) -> Result<Complex64> {
    if !f.is_exact() {
        return Err(Error::InvalidParameter("kt_of_cesaro needs a polynomial".into()));
    }
    let n = f.order();
    let cf = apply_c(f);
    let q = power_series(w.nu, n);
    let head: Complex64 = cf.coeffs().iter().zip(q.coeffs()).map(|(a, b)| a * b).sum();
    let f1: Complex64 = f.coeffs().iter().sum();
    let partial: Complex64 = q.coeffs().iter().enumerate().map(|(k, b)| b / (k + 1) as f64).sum();
    Ok(head + f1 * (power_integral(w.nu)? - partial))
}

/// max over the points of |K(C f)(w) - (1 - w) K f(w)| for a polynomial f.
pub fn intertwine_residual(f: &CoeffFun, points: &[KTPoint]) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in points {
        let lhs = kt_of_cesaro(f, *w)?;
        let rhs = (1.0 - w.w) * kt_transform(f, *w)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Truncated C* q_a - (1 - a) q_a with the C* tail sum_{k >= N} q_k/(k + 1)
/// closed by the integral of (1 - z)^nu_a, then paired with q at each point.
pub fn eigen_at_kt_points(a: Complex64, n: usize, points: &[KTPoint]) -> Result<f64> {
    let pa = KTPoint::new(a)?;
    let q = power_series(pa.nu, n);
    let mut cq = apply_c_star(&q);
    if !q.is_exact() {
        let partial: Complex64 = q.coeffs().iter().enumerate().map(|(k, b)| b / (k + 1) as f64).sum();
        let tail = power_integral(pa.nu)? - partial;
        cq = CoeffFun::new(cq.coeffs().iter().map(|c| c + tail).collect());
    }
    let r = cq.sub(&q.scale(1.0 - a)).with_exact(true);
    let mut worst = 0.0f64;
    for w in points {
        worst = worst.max(kt_transform(&r, *w)?.norm());
    }
    Ok(worst)
}

/// |p(I - C) 1| over the first N coefficients, the pullback of the norm of p.
pub fn h2mu_norm(p: &[Complex64], n: usize) -> f64 {
    let one = CoeffFun::constant(ONE, n);
    let mut acc = CoeffFun::zeros(n);
    for c in p.iter().rev() {
        let t = acc.sub(&apply_c(&acc));
        acc = t.add(&one.scale(*c));
    }
    acc.norm()
}

/// U_alpha(w) = 2^nu / Gamma(nu + 1) * integral_0^alpha e^{-t} t^nu dt, nu = w/(1 - w).
pub fn u_alpha(alpha: f64, w: KTPoint) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    let nu = w.nu;
    // t = alpha u
    let f = |u: f64| (-alpha * u).exp() * Complex64::new(u, 0.0).powc(nu);
    let integral = Integrator::default().integrate_endpoint(&f, 0.0, 1.0, nu.re)?.value;
    let scale = (nu + 1.0) * Complex64::new(alpha, 0.0).ln();
    Ok(Complex64::new(2.0, 0.0).powc(nu) / gamma(nu + 1.0) * scale.exp() * integral)
}

/// min |U_alpha| over the points, with the minimizing point.
pub fn u_alpha_grid_min(alpha: f64, points: &[Complex64]) -> Result<(f64, Complex64)> {
    let mut best = (f64::INFINITY, ZERO);
    for w in points {
        let v = u_alpha(alpha, KTPoint::new(*w)?)?.norm();
        if v < best.0 {
            best = (v, *w);
        }
    }
    Ok(best)
}

/// Integral mean ((1/2 pi) integral |U_alpha(r e^{i theta})|^2 d theta)^{1/2} by
/// the trapezoid rule on `m` points.
pub fn u_alpha_mean(alpha: f64, r: f64, m: usize) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..m {
        let w = Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / m as f64);
        s += u_alpha(alpha, KTPoint::new(w)?)?.norm_sqr();
    }
    Ok((s / m as f64).sqrt())
}

/// M_2(r_k) at r_k = 1 - 2^-k for the given k, with enough trapezoid points to
/// resolve the peak near w = 1 (width about 1 - r).
pub fn u_alpha_mean_sequence(alpha: f64, ks: &[u32]) -> Result<Vec<f64>> {
    ks.iter()
        .map(|&k| {
            let r = 1.0 - 0.5f64.powi(k as i32);
            let m = (64usize << k).max(256);
            u_alpha_mean(alpha, r, m)
        })
        .collect()
}

/// S* f - f.
pub fn backward_shift(f: &CoeffFun) -> CoeffFun {
    let mut v: Vec<Complex64> = f.coeffs()[1..].to_vec();
    v.push(ZERO);
    CoeffFun::new(v).with_exact(f.is_exact())
}

/// max over the points of |K(S* f - f)(z) + K f(1/(2 - z))|.
pub fn sstar_identity(f: &CoeffFun, points: &[Complex64]) -> Result<f64> {
    let d = backward_shift(f).sub(f);
    let mut worst = 0.0f64;
    for z in points {
        let lhs = kt_transform(&d, KTPoint::new(*z)?)?;
        let rhs = kt_transform(f, KTPoint::new(1.0 / (2.0 - z))?)?;
        worst = worst.max((lhs + rhs).norm());
    }
    Ok(worst)
}

/// g_n(z) = prod_{j<n} (z - j/(j+1)) / (1 - z)^n.
pub fn kt_basis_g(n: usize, z: Complex64) -> Result<Complex64> {
    if z == ONE {
        return Err(Error::InvalidParameter("g_n is singular at z = 1".into()));
    }
    let mut v = ONE;
    for j in 0..n {
        v *= (z - j as f64 / (j + 1) as f64) / (1.0 - z);
    }
    Ok(v)
}

/// The circle gamma_n = {|z - n/(n+1)| = 1/(n+1)} with mu(gamma_n) = 2^{-n-1}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuCircle {
    pub n: usize,
    pub center: f64,
    pub radius: f64,
    pub mass: f64,
}

pub fn mu_circle(n: usize) -> MuCircle {
    let d = (n + 1) as f64;
    MuCircle { n, center: n as f64 / d, radius: 1.0 / d, mass: 0.5f64.powi(n as i32 + 1) }
}

/// Points of the disc of radius `r` as KT points.
pub fn kt_points(points: &[Complex64]) -> Result<Vec<KTPoint>> {
    points.iter().map(|w| KTPoint::new(*w)).collect()
}

/// Intertwining over monomials and seeded polynomials of degree <= 8.
pub fn intertwine_check(points: &[Complex64], seed: u64) -> Result<CheckReport> {
    use rand::{Rng, SeedableRng};
    let pts = kt_points(points)?;
    let mut worst = intertwine_residual(&CoeffFun::zeros(1), &pts)?;
    for k in 0..=8 {
        worst = worst.max(intertwine_residual(&CoeffFun::monomial(k, k + 1), &pts)?);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let p = CoeffFun::polynomial((0..9).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
        worst = worst.max(intertwine_residual(&p, &pts)? / p.norm());
    }
    Ok(CheckReport::new("kt_intertwining", "K(I - C)K* = M_z, i.e. K(C f)(w) = (1 - w) K f(w)", Provenance::Reference)
        .param("points", points.len())
        .param("max_degree", 8)
        .param("seed", seed)
        .computed(vec![worst])
        .tolerance(1e-8)
        .judge_at_most())
}

/// max over lambda and the points of |K k_lambda(w) - (1 - conj(lambda))^nu|.
pub fn cauchy_closed_form_check(lambdas: &[Complex64], points: &[Complex64], n: usize) -> Result<CheckReport> {
    let pts = kt_points(points)?;
    let mut worst = 0.0f64;
    for &l in lambdas {
        let k = cauchy_kernel(l, n);
        for w in &pts {
            worst = worst.max((kt_transform(&k, *w)? - kt_cauchy_closed_form(l, *w)).norm());
        }
    }
    Ok(CheckReport::new("kt_cauchy_kernel", "K k_lambda (w) = (1 - conj(lambda))^{w/(1-w)}", Provenance::Reference)
        .param("lambdas", lambdas.iter().map(|l| vec![l.re, l.im]).collect::<Vec<_>>())
        .param("points", points.len())
        .param("N", n)
        .computed(vec![worst])
        .tolerance(1e-9)
        .judge_at_most())
}

/// S*-identity for a Cauchy kernel and a fixed polynomial.
pub fn sstar_check(points: &[Complex64], n: usize) -> Result<CheckReport> {
    let k = cauchy_kernel(Complex64::new(0.5, 0.2), n);
    let p = CoeffFun::polynomial((0..9).map(|j| Complex64::new((j as f64).cos(), 0.1 * j as f64)).collect());
    let a = sstar_identity(&k, points)?;
    let b = sstar_identity(&p, points)? / p.norm();
    Ok(CheckReport::new("kt_sstar_identity", "K(S* f - f)(z) = -K f(1/(2 - z))", Provenance::Reference)
        .param("points", points.len())
        .param("N", n)
        .computed(vec![a, b])
        .tolerance(1e-8)
        .judge_at_most())
}

/// h2mu_norm(z) over the sizes: monotone, and within 1e-6 of sqrt(pi^2/6 - 1)
/// at the largest.
pub fn pullback_norm_check(sizes: &[usize]) -> CheckReport {
    let z = [ZERO, ONE];
    let v: Vec<f64> = sizes.iter().map(|&n| h2mu_norm(&z, n)).collect();
    let want = (PI * PI / 6.0 - 1.0).sqrt();
    let monotone = v.windows(2).all(|w| w[1] >= w[0]);
    let last = *v.last().unwrap_or(&f64::NAN);
    CheckReport::new("pullback_norm", "|(I - C) 1|^2 = pi^2/6 - 1", Provenance::Derived)
        .param("sizes", sizes.to_vec())
        .computed(v)
        .reference(vec![want])
        .tolerance(1e-6)
        .pass(monotone && (last - want).abs() <= 1e-6)
}

pub fn eigen_points_check(a_values: &[f64], n: usize, points: &[Complex64]) -> Result<CheckReport> {
    let pts = kt_points(points)?;
    let worst = a_values
        .iter()
        .map(|a| eigen_at_kt_points(Complex64::new(*a, 0.0), n, &pts))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CheckReport::new("kt_eigen_points", "K(C* q_a - (1 - a) q_a) = 0", Provenance::Reference)
        .param("a", a_values.to_vec())
        .param("N", n)
        .param("points", points.len())
        .computed(vec![worst])
        .tolerance(1e-8)
        .judge_at_most())
}

/// (-1)^n binom(nu, n) from the recurrence against Gamma(n - nu)/(Gamma(-nu) n!).
pub fn binomial_gamma_check(nu: Complex64, n: usize) -> CheckReport {
    let q = power_series(nu, n + 1);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let want = gamma(n as f64 - nu) / (gamma(-nu) * fact);
    let rel = (q.get(n) - want).norm() / want.norm();
    CheckReport::new("binomial_gamma_ratio", "(-1)^n binom(nu, n) = Gamma(n - nu)/(Gamma(-nu) n!)", Provenance::Trivial)
        .param("nu_re", nu.re)
        .param("nu_im", nu.im)
        .param("n", n)
        .computed(vec![rel])
        .tolerance(1e-12)
        .judge_at_most()
}

pub fn u_alpha_origin_check(alpha: f64) -> Result<CheckReport> {
    let v = u_alpha(alpha, KTPoint::new(ZERO)?)?;
    let dev = (v - (1.0 - (-alpha).exp())).norm();
    Ok(CheckReport::new("u_alpha_origin", "U_alpha(0) = 1 - e^{-alpha}", Provenance::Trivial)
        .param("alpha", alpha)
        .computed(vec![dev])
        .tolerance(1e-10)
        .judge_at_most())
}

pub fn u_alpha_zero_free_check(alpha: f64, points: &[Complex64]) -> Result<CheckReport> {
    let (m, at) = u_alpha_grid_min(alpha, points)?;
    Ok(CheckReport::new("u_alpha_zero_free", "U_alpha has no zeros in the disc", Provenance::Reference)
        .param("alpha", alpha)
        .param("points", points.len())
        .param("radius", points.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .computed(vec![m])
        .note(format!("minimum at {at}"))
        .pass(m > 0.0 && m.is_finite()))
}

/// Integral means at r = 1 - 2^-k: strictly increasing with every ratio >= 1.05.
pub fn u_alpha_growth_check(alpha: f64, ks: &[u32]) -> Result<CheckReport> {
    let v = u_alpha_mean_sequence(alpha, ks)?;
    let grows = v.windows(2).all(|w| w[1] >= 1.05 * w[0]);
    Ok(CheckReport::new("u_alpha_not_in_h2", "U_alpha is not in H^2", Provenance::Derived)
        .param("alpha", alpha)
        .param("k", ks.to_vec())
        .computed(v)
        .tolerance(1.05)
        .note("integral means M_2(1 - 2^-k); growth is evidence, not proof")
        .pass(grows))
}
