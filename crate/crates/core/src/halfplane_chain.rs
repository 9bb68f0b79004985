//! The right half-plane: normalized Laplace transform, the Cayley unitaries
//! between H^2(D) and H^2(C+), the weight w and the chain of closed-form test
//! pairs carried from the weighted line to the disc.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cesaro_ops::{apply_composition, AffineSelfMap};
use crate::error::{Error, Result};
use crate::h2core::{eval, CoeffFun};
use crate::quadrature::{integrate_half_line, integrate_real_line, Integrator, QuadScheme};
use crate::report::{CheckReport, Provenance};
use crate::special::gamma_derivative;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// w(y) = exp(-2(e^y - 1)).
pub fn weight_w(y: f64) -> f64 {
    (2.0 - 2.0 * y.exp()).exp()
}

/// (1/sqrt(2 pi)) * integral over (0, infinity) of f(x) e^{-s x}.
pub fn laplace_quad<F: Fn(f64) -> Complex64>(f: &F, s: Complex64, scheme: &QuadScheme) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidParameter(format!("Re s = {} must be positive", s.re)));
    }
    let g = |x: f64| {
        let v = f(x);
        if v == ZERO {
            ZERO
        } else {
            v * (-s * x).exp()
        }
    };
    Ok(integrate_half_line(&g, scheme)? / (2.0 * PI).sqrt())
}

/// (s - 1)/(s + 1): C+ onto D.
pub fn cayley_to_disk(s: Complex64) -> Complex64 {
    (s - 1.0) / (s + 1.0)
}

/// (1 + z)/(1 - z): D onto C+.
pub fn cayley_to_half_plane(z: Complex64) -> Complex64 {
    (1.0 + z) / (1.0 - z)
}

/// (U g)(s) = g((s - 1)/(s + 1)) / (sqrt(pi) (1 + s)).
///
/// Boundary points Re s = 0 are accepted for polynomials, whose boundary values
/// are the continuous extension.
pub fn unitary_u(g: &CoeffFun, s: Complex64) -> Result<Complex64> {
    let w = cayley_to_disk(s);
    let r = w.norm();
    if !r.is_finite() || r > 1.0 + 1e-14 || (r >= 1.0 && !g.is_exact()) {
        return Err(Error::OutsideDisk(w));
    }
    Ok(eval(g, w) / (PI.sqrt() * (1.0 + s)))
}

/// U applied to a function given by its values in the open disc.
pub fn unitary_u_fn<G: Fn(Complex64) -> Complex64>(g: &G, s: Complex64) -> Result<Complex64> {
    let w = cayley_to_disk(s);
    if !(w.norm() < 1.0) {
        return Err(Error::OutsideDisk(w));
    }
    Ok(g(w) / (PI.sqrt() * (1.0 + s)))
}

/// (U^-1 G)(z) = 2 sqrt(pi) G((1 + z)/(1 - z)) / (1 - z).
pub fn unitary_u_inv(g: &HalfPlaneFun, z: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisk(z));
    }
    Ok(2.0 * PI.sqrt() * g.eval(cayley_to_half_plane(z)) / (1.0 - z))
}

/// Quadrature extent used on a boundary line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLine {
    /// Abscissa of the line Re s = sigma.
    pub sigma: f64,
    /// Stop once a doubling panel pair contributes less than this.
    pub tail_tol: f64,
}

impl Default for BoundaryLine {
    fn default() -> Self {
        Self { sigma: 0.0, tail_tol: 1e-10 }
    }
}

/// A boundary integral with the truncation extent actually used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineIntegral {
    pub value: Complex64,
    pub y_max: f64,
    pub line: BoundaryLine,
}

/// A function on the right half-plane.
#[derive(Clone)]
pub struct HalfPlaneFun {
    evaluator: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    pub line: BoundaryLine,
}

impl std::fmt::Debug for HalfPlaneFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HalfPlaneFun").field("line", &self.line).finish_non_exhaustive()
    }
}

impl HalfPlaneFun {
    pub fn new(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { evaluator: Arc::new(f), line: BoundaryLine::default() }
    }

    pub fn with_line(mut self, line: BoundaryLine) -> Self {
        self.line = line;
        self
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        (self.evaluator)(s)
    }

    /// Integral of |F(sigma + iy)|^2 dy over the real line.
    pub fn boundary_norm_sqr(&self, integ: &Integrator) -> Result<LineIntegral> {
        let sigma = self.line.sigma;
        let f = |y: f64| Complex64::new(self.eval(Complex64::new(sigma, y)).norm_sqr(), 0.0);
        let (value, y_max) = integrate_real_line(&f, self.line.tail_tol, integ)?;
        Ok(LineIntegral { value, y_max, line: self.line })
    }

    /// Integral of F(sigma + iy) conj(G(sigma + iy)) dy.
    pub fn boundary_inner(&self, other: &HalfPlaneFun, integ: &Integrator) -> Result<LineIntegral> {
        let sigma = self.line.sigma;
        let f = |y: f64| {
            let s = Complex64::new(sigma, y);
            self.eval(s) * other.eval(s).conj()
        };
        let (value, y_max) = integrate_real_line(&f, self.line.tail_tol, integ)?;
        Ok(LineIntegral { value, y_max, line: self.line })
    }
}

/// Orthonormal basis (1/sqrt(2 pi)) (s - 1/2)^n / (s + 1/2)^(n+1) of H^2(C+).
pub fn hp_basis(n: usize, s: Complex64) -> Complex64 {
    let b = b_multiplier(s);
    b.powu(n as u32) / ((s + 0.5) * (2.0 * PI).sqrt())
}

/// b(s) = (s - 1/2)/(s + 1/2).
pub fn b_multiplier(s: Complex64) -> Complex64 {
    (s - 0.5) / (s + 0.5)
}

/// Binomial coefficient as a float.
fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed forms of one test function at the four stages of the chain.
///
/// Stage 1 lives in L^2(R, w dy), stage 2 in L^2(0, infinity), stage 3 in
/// H^2(C+) and stage 4 in H^2(D).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTestPair {
    pub lambda: Complex64,
    pub k: usize,
    /// Stage 3 is (s + 1)^(-lambda - 1/2) * sum a_i log^i(s + 1).
    pub a: Vec<Complex64>,
    /// Stage 4 is (1 - z)^(lambda - 1/2) * sum b_i log^i(1 - z).
    pub b: Vec<Complex64>,
}

pub fn chain_test_pair(lambda: Complex64, k: usize) -> Result<ChainTestPair> {
    if !(lambda.re > 0.0) {
        return Err(Error::InvalidParameter(format!("Re lambda = {} must be positive", lambda.re)));
    }
    let mu = lambda + 0.5;
    // a'_i without the Laplace normalization
    let a_raw: Vec<Complex64> = (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            binom(k, i) * sign * gamma_derivative(mu, k - i)
        })
        .collect();
    let norm = (2.0 * PI).sqrt();
    let a = a_raw.iter().map(|x| x / norm).collect();
    let pre = 2f64.sqrt() * Complex64::new(2.0, 0.0).powc(-mu);
    let b = (0..=k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let s: Complex64 = (i..=k).map(|j| a_raw[j] * binom(j, i) * LN_2.powi((j - i) as i32)).sum();
            pre * s * sign
        })
        .collect();
    Ok(ChainTestPair { lambda, k, a, b })
}

impl ChainTestPair {
    /// y^k e^{lambda y}.
    pub fn stage1(&self, y: f64) -> Complex64 {
        y.powi(self.k as i32) * (self.lambda * y).exp()
    }

    /// W^-1 of stage 1: y^k e^{lambda y} e^{-(e^y - 1)}.
    pub fn stage1_unweighted(&self, y: f64) -> Complex64 {
        self.stage1(y) * weight_w(y).sqrt()
    }

    /// (log x)^k x^(lambda - 1/2) e^{-x}.
    pub fn stage2(&self, x: f64) -> Complex64 {
        if x <= 0.0 {
            return ZERO;
        }
        let l = x.ln();
        l.powi(self.k as i32) * (Complex64::new(x, 0.0).powc(self.lambda - 0.5)) * (-x).exp()
    }

    pub fn stage3(&self, s: Complex64) -> Complex64 {
        let sp = s + 1.0;
        let l = sp.ln();
        let poly = self.a.iter().rev().fold(ZERO, |acc, c| acc * l + c);
        sp.powc(-self.lambda - 0.5) * poly
    }

    pub fn stage4(&self, z: Complex64) -> Complex64 {
        let om = 1.0 - z;
        let l = om.ln();
        let poly = self.b.iter().rev().fold(ZERO, |acc, c| acc * l + c);
        om.powc(self.lambda - 0.5) * poly
    }

    pub fn stage3_fun(&self) -> HalfPlaneFun {
        let p = self.clone();
        HalfPlaneFun::new(move |s| p.stage3(s))
    }
}

/// (T h)(x) = h(log x) / sqrt(x).
pub fn t_map<H: Fn(f64) -> Complex64>(h: &H, x: f64) -> Complex64 {
    h(x.ln()) / x.sqrt()
}

fn sample_half_plane(count: usize) -> Vec<Complex64> {
    crate::sobol::Sobol2::new()
        .take(count)
        .map(|[a, b]| Complex64::new(0.05 + 4.0 * a, -6.0 + 12.0 * b))
        .collect()
}

fn max_rel(pairs: impl Iterator<Item = (Complex64, Complex64)>) -> f64 {
    pairs.map(|(got, want)| (got - want).norm() / want.norm().max(1e-300)).fold(0.0, f64::max)
}

fn pair_params(r: CheckReport, pair: &ChainTestPair) -> CheckReport {
    r.param("lambda_re", pair.lambda.re).param("lambda_im", pair.lambda.im).param("k", pair.k)
}

/// Stage-by-stage verification of one test pair: T-map algebra, Laplace
/// transform against the Gamma identity, Cayley transport to the disc.
pub fn verify_chain(pair: &ChainTestPair, points: usize) -> Result<Vec<CheckReport>> {
    let tol = 1e-6;
    // (i) T W^-1 stage 1 = e * stage 2, pointwise
    let xs: Vec<f64> = (0..points).map(|j| 0.05 + 6.0 * (j as f64 + 0.5) / points as f64).collect();
    let h = |y: f64| pair.stage1_unweighted(y);
    let t_res = max_rel(xs.iter().map(|&x| (t_map(&h, x), pair.stage2(x) * 1f64.exp())));
    let t_rep = CheckReport::new("chain_t_map", "T W^-1 (y^k e^{lambda y}) = e (log x)^k x^{lambda - 1/2} e^{-x}", Provenance::Reference)
        .computed(vec![t_res])
        .tolerance(1e-12)
        .param("points", points)
        .judge_at_most();

    // (ii) Laplace transform of stage 2 against stage 3
    let scheme = QuadScheme::with_endpoint(pair.lambda.re - 0.5);
    let ss = sample_half_plane(points);
    let mut lap = Vec::with_capacity(points);
    for s in &ss {
        let f = |x: f64| pair.stage2(x);
        lap.push((laplace_quad(&f, *s, &scheme)?, pair.stage3(*s)));
    }
    let l_res = max_rel(lap.into_iter());
    let l_rep = CheckReport::new("chain_laplace", "L[(log x)^k x^{lambda - 1/2} e^{-x}](s) = d^k/dlambda^k Gamma(lambda + 1/2)(s + 1)^{-lambda - 1/2}", Provenance::Reference)
        .computed(vec![l_res])
        .tolerance(tol)
        .param("points", points)
        .judge_at_most();

    // (iii) U^-1 of stage 3 against stage 4
    let g = pair.stage3_fun();
    let zs = crate::sobol::disk_points(points, 0.9);
    let mut cay = Vec::with_capacity(points);
    for z in &zs {
        cay.push((unitary_u_inv(&g, *z)?, pair.stage4(*z)));
    }
    let c_res = max_rel(cay.into_iter());
    let c_rep = CheckReport::new("chain_cayley", "U^-1 of stage 3 = (1 - z)^{lambda - 1/2} sum b_i log^i(1 - z)", Provenance::Reference)
        .computed(vec![c_res])
        .tolerance(tol)
        .param("points", points)
        .judge_at_most();

    Ok([t_rep, l_rep, c_rep].into_iter().map(|r| pair_params(r, pair)).collect())
}

/// Norms along the chain: |stage 1|_{L^2(w)} e^{-1}, |stage 2|_{L^2(0,inf)} and
/// the boundary norm of stage 3 agree.
pub fn isometry_check(pair: &ChainTestPair, tail_tol: f64) -> Result<CheckReport> {
    let integ = Integrator::default();
    let two = |x: f64| Complex64::new(pair.stage2(x).norm_sqr(), 0.0);
    let n2 = integrate_half_line(&two, &QuadScheme::with_endpoint(2.0 * pair.lambda.re - 1.0))?.re;
    let one = |y: f64| Complex64::new(pair.stage1(y).norm_sqr() * weight_w(y), 0.0);
    let (n1, _) = integrate_real_line(&one, tail_tol * 1e-2, &integ)?;
    let n1 = n1.re * (-2f64).exp();
    let g = pair.stage3_fun().with_line(BoundaryLine { sigma: 0.0, tail_tol });
    let b = g.boundary_norm_sqr(&integ)?;
    let r12 = (n1 - n2).abs() / n2;
    let r23 = (b.value.re - n2).abs() / n2;
    Ok(pair_params(
        CheckReport::new("chain_isometry", "|f|_{L^2(w)} = |Th|_{L^2(0,inf)} = |Lg|_{H^2(C+)}", Provenance::Reference)
            .computed(vec![r12, r23])
            .tolerance(1e-4)
            .param("Y", b.y_max)
            .param("norm_sq_stage2", n2)
            .judge_at_most(),
        pair,
    ))
}

/// Gram matrix of hp_basis(0..=n_max) by boundary quadrature; reports the
/// largest entrywise deviation from the identity.
pub fn hp_gram_check(n_max: usize, tail_tol: f64) -> Result<CheckReport> {
    let integ = Integrator::default();
    let mut dev = 0.0f64;
    let mut y_max = 0.0f64;
    for m in 0..=n_max {
        for n in m..=n_max {
            let fm = HalfPlaneFun::new(move |s| hp_basis(m, s)).with_line(BoundaryLine { sigma: 0.0, tail_tol });
            let fn_ = HalfPlaneFun::new(move |s| hp_basis(n, s));
            let ip = fm.boundary_inner(&fn_, &integ)?;
            y_max = y_max.max(ip.y_max);
            let want = if m == n { 1.0 } else { 0.0 };
            dev = dev.max((ip.value - want).norm());
        }
    }
    Ok(CheckReport::new("hp_basis_gram", "(1/sqrt(2 pi))(s - 1/2)^n/(s + 1/2)^{n+1} is orthonormal in H^2(C+)", Provenance::Reference)
        .param("n_max", n_max)
        .param("Y", y_max)
        .computed(vec![dev])
        .tolerance(1e-6)
        .judge_at_most())
}

/// integral over (0, infinity) of e^{-t} e^{t/2} e^{-st} dt against 1/(s + 1/2).
pub fn resolvent_check(points: &[Complex64]) -> Result<CheckReport> {
    let scheme = QuadScheme::default();
    let f = |t: f64| Complex64::new((-0.5 * t).exp(), 0.0);
    let mut dev = 0.0f64;
    for s in points {
        let v = laplace_quad(&f, *s, &scheme)? * (2.0 * PI).sqrt();
        dev = dev.max((v - 1.0 / (s + 0.5)).norm());
    }
    Ok(CheckReport::new("b_resolvent", "int_0^inf e^{-t} e^{t/2} e^{-st} dt = 1/(s + 1/2)", Provenance::Reference)
        .param("points", points.len())
        .computed(vec![dev])
        .tolerance(1e-10)
        .judge_at_most())
}

/// integral over (0, infinity) of x^{lambda - 1/2} e^{-x} e^{-s x} dx against
/// Gamma(lambda + 1/2)(s + 1)^{-lambda - 1/2}, max relative error over the points.
pub fn gamma_identity_check(lambdas: &[Complex64], points: usize) -> Result<CheckReport> {
    let ss = sample_half_plane(points);
    let mut dev = 0.0f64;
    for &lambda in lambdas {
        let scheme = QuadScheme::with_endpoint(lambda.re - 0.5);
        let f = |x: f64| Complex64::new(x, 0.0).powc(lambda - 0.5) * (-x).exp();
        for s in &ss {
            let got = laplace_quad(&f, *s, &scheme)? * (2.0 * PI).sqrt();
            let want = crate::special::gamma(lambda + 0.5) * (s + 1.0).powc(-lambda - 0.5);
            dev = dev.max((got - want).norm() / want.norm());
        }
    }
    Ok(CheckReport::new("gamma_identity", "int_0^inf x^{lambda - 1/2} e^{-(s + 1) x} dx = Gamma(lambda + 1/2)(s + 1)^{-lambda - 1/2}", Provenance::Reference)
        .param("lambdas", lambdas.iter().map(|l| vec![l.re, l.im]).collect::<Vec<_>>())
        .param("points", points)
        .computed(vec![dev])
        .tolerance(1e-8)
        .judge_at_most())
}

/// Samples on the uniform grid y_j = y0 + j h.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFun {
    pub y0: f64,
    pub h: f64,
    pub values: Vec<Complex64>,
}

impl SampledFun {
    pub fn sample<F: Fn(f64) -> Complex64>(f: &F, y0: f64, y1: f64, count: usize) -> Self {
        let h = (y1 - y0) / (count - 1) as f64;
        Self { y0, h, values: (0..count).map(|j| f(y0 + h * j as f64)).collect() }
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + self.h * j as f64
    }

    /// Linear interpolation; None outside the grid.
    pub fn at(&self, y: f64) -> Option<Complex64> {
        let p = (y - self.y0) / self.h;
        let last = (self.values.len() - 1) as f64;
        if p < -1e-9 || p > last + 1e-9 {
            return None;
        }
        let r = p.round();
        if (p - r).abs() < 1e-9 {
            return Some(self.values[r as usize]);
        }
        let i = p.floor() as usize;
        let f = p - i as f64;
        Some(self.values[i] * (1.0 - f) + self.values[i + 1] * f)
    }

    fn map_values(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self.values.iter().enumerate().map(|(j, v)| f(self.y(j), *v)).collect();
        Self { values, ..*self }
    }
}

/// (sigma_t h)(y) = exp(-(1 - e^{-t}) e^y) h(y - t); entries whose source y - t
/// falls off the grid become None.
pub fn sigma_translate(h: &SampledFun, t: f64) -> Vec<Option<Complex64>> {
    let c = -(-t).exp_m1();
    (0..h.values.len())
        .map(|j| {
            let y = h.y(j);
            h.at(y - t).map(|v| v * (-c * y.exp()).exp())
        })
        .collect()
}

/// (S_t f)(y) = f(y - t).
pub fn shift_translate(f: &SampledFun, t: f64) -> Vec<Option<Complex64>> {
    (0..f.values.len()).map(|j| f.at(f.y(j) - t)).collect()
}

/// (W g)(y) = g(y) e^{e^y - 1}; W^-1 multiplies by e^{-(e^y - 1)}.
pub fn apply_w(g: &SampledFun) -> SampledFun {
    g.map_values(|y, v| v * y.exp_m1().exp())
}

pub fn apply_w_inv(g: &SampledFun) -> SampledFun {
    g.map_values(|y, v| v * (-y.exp_m1()).exp())
}

/// max |W sigma_t W^-1 f - S_t f| / max |f| over grid points with a source.
pub fn conjugation_check(f: &SampledFun, t: f64) -> CheckReport {
    let winv = apply_w_inv(f);
    let moved = sigma_translate(&winv, t);
    let scale = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let shifted = shift_translate(f, t);
    let mut dev = 0.0f64;
    let mut used = 0usize;
    for (j, (a, b)) in moved.iter().zip(&shifted).enumerate() {
        if let (Some(a), Some(b)) = (a, b) {
            let y = f.y(j);
            let wa = a * y.exp_m1().exp();
            dev = dev.max((wa - b).norm() / scale);
            used += 1;
        }
    }
    CheckReport::new("w_conjugation", "W sigma_t W^-1 f = f(. - t)", Provenance::Reference)
        .param("t", t)
        .param("h", f.h)
        .param("y0", f.y0)
        .param("points", used)
        .computed(vec![dev])
        .tolerance(1e-12)
        .judge_at_most()
}

/// (1 - z) f'(z) against the difference quotient (C_{phi_h} f - f)/h of the
/// flow, coefficientwise. Returns the error at h and at h/2.
pub fn generator_check(f: &CoeffFun, h: f64) -> Result<CheckReport> {
    let n = f.order() + 1;
    let f = f.resized(n);
    let mut af = vec![ZERO; n];
    for k in 1..n {
        let d = f.get(k) * k as f64;
        af[k - 1] += d;
        af[k] -= d;
    }
    let err = |h: f64| -> Result<f64> {
        let moved = apply_composition(&f, &AffineSelfMap::flow(h)?);
        let q = moved.sub(&f).scale(Complex64::new(1.0 / h, 0.0));
        Ok(q.coeffs().iter().zip(&af).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    };
    let e1 = err(h)?;
    let e2 = err(0.5 * h)?;
    // first-order method: the error is c h + O(h^2 + eps/h)
    let scale = f.norm() * (n * n) as f64;
    Ok(CheckReport::new("flow_generator", "(A f)(z) = (1 - z) f'(z) generates C_{phi_t}", Provenance::Reference)
        .param("h", h)
        .param("order", n)
        .computed(vec![e1, e2])
        .tolerance(scale * h)
        .judge_at_most())
}
