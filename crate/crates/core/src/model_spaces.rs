//! Inner functions with finitely many zeros and atoms, projections onto model
//! spaces, the Cesaro invariance test and cyclic-vector diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cesaro_ops::{apply_c, AffineSelfMap};
use crate::error::{Error, Result};
use crate::h2core::{convolve, correlate, eval, fft_pair, CoeffFun};
use crate::linalg::{columns_to_matrix, dot, norm, orthonormal_basis, principal_angles, CMatrix};
use crate::quadrature::{algebraic_tail, oscillatory_tail, Integrator};
use crate::report::{CheckReport, Provenance};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance on |u| = 1 for boundary samples.
pub const UNIMODULAR_TOL: f64 = 1e-10;

/// u = B * S: a finite Blaschke product times a singular inner function with
/// finitely many point masses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerFunctionSpec {
    /// (zero, multiplicity)
    pub zeros: Vec<(Complex64, usize)>,
    /// (unimodular location, mass)
    pub atoms: Vec<(Complex64, f64)>,
    /// Boundary points where the (declared) zero set accumulates.
    #[serde(default)]
    pub zero_accumulation: Vec<Complex64>,
}

impl InnerFunctionSpec {
    /// u = 1.
    pub fn constant() -> Self {
        Self::default()
    }

    /// u_alpha(z) = exp(alpha (z + 1)/(z - 1)).
    pub fn u_alpha(alpha: f64) -> Result<Self> {
        Self::atom(ONE, alpha)
    }

    pub fn atom(xi: Complex64, mass: f64) -> Result<Self> {
        let s = Self { atoms: vec![(xi, mass)], ..Self::default() };
        s.validate()?;
        Ok(s)
    }

    pub fn blaschke(zeros: Vec<(Complex64, usize)>) -> Result<Self> {
        let s = Self { zeros, ..Self::default() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (a, _) in &self.zeros {
            if !(a.norm() < 1.0) {
                return Err(Error::InvalidParameter(format!("zero {a} is not inside the disc")));
            }
        }
        for (xi, m) in &self.atoms {
            if (xi.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("atom location {xi} is not unimodular")));
            }
            if !(*m > 0.0) {
                return Err(Error::InvalidParameter(format!("atom mass {m} must be positive")));
            }
        }
        for p in &self.zero_accumulation {
            if (p.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("accumulation point {p} is not unimodular")));
            }
        }
        Ok(())
    }

    /// The single atom mass when u = u_alpha, otherwise None.
    pub fn as_u_alpha(&self) -> Option<f64> {
        match (self.zeros.as_slice(), self.atoms.as_slice()) {
            ([], [(xi, m)]) if (*xi - ONE).norm() < 1e-15 => Some(*m),
            _ => None,
        }
    }
}

/// u(z) for |z| <= 1 away from the atoms.
pub fn inner_eval(spec: &InnerFunctionSpec, z: Complex64) -> Result<Complex64> {
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDisk(z));
    }
    let mut v = ONE;
    for (a, m) in &spec.zeros {
        let f = blaschke_factor(*a, z);
        v *= f.powu(*m as u32);
    }
    let mut expo = ZERO;
    for (xi, w) in &spec.atoms {
        let d = xi - z;
        if d.norm() < 1e-14 {
            return Err(Error::AtomEvaluation(*xi));
        }
        expo -= w * (xi + z) / d;
    }
    Ok(v * expo.exp())
}

/// u(e^{i theta}), with each atom factor written as exp(-i w cot((theta - psi)/2))
/// so the result is unimodular to rounding.
pub fn inner_eval_boundary(spec: &InnerFunctionSpec, theta: f64) -> Result<Complex64> {
    let z = Complex64::from_polar(1.0, theta);
    let mut v = ONE;
    for (a, m) in &spec.zeros {
        v *= blaschke_factor(*a, z).powu(*m as u32);
    }
    let mut phase = 0.0;
    for (xi, w) in &spec.atoms {
        let half = 0.5 * (theta - xi.arg());
        let s = half.sin();
        if s.abs() < 1e-300 {
            return Err(Error::AtomEvaluation(*xi));
        }
        phase -= w * half.cos() / s;
    }
    Ok(v * Complex64::from_polar(1.0, phase))
}

fn blaschke_factor(a: Complex64, z: Complex64) -> Complex64 {
    if a == ZERO {
        z
    } else {
        (a.norm() / a) * (a - z) / (1.0 - a.conj() * z)
    }
}

/// Taylor coefficients of exp(-w (xi + z)/(xi - z)), by the exponential
/// recurrence specialised to the exponent -w(1 + 2 sum (z/xi)^n).
pub fn atom_coeffs(xi: Complex64, mass: f64, len: usize) -> Vec<Complex64> {
    let mut u = vec![ZERO; len];
    if len == 0 {
        return u;
    }
    // in the variable z/xi: n U_n = -2 w (n S_{n-1} - T_{n-1}),
    // S = sum U_k, T = sum k U_k
    u[0] = Complex64::new((-mass).exp(), 0.0);
    let mut s = u[0];
    let mut t = ZERO;
    for n in 1..len {
        let nf = n as f64;
        let v = -2.0 * mass * (nf * s - t) / nf;
        u[n] = v;
        s += v;
        t += nf * v;
    }
    let step = xi.conj();
    let mut p = ONE;
    for c in u.iter_mut() {
        *c *= p;
        p *= step;
    }
    u
}

/// Taylor coefficients of one Blaschke factor.
pub fn blaschke_coeffs(a: Complex64, len: usize) -> Vec<Complex64> {
    let mut c = vec![ZERO; len];
    if len == 0 {
        return c;
    }
    if a == ZERO {
        if len > 1 {
            c[1] = ONE;
        }
        return c;
    }
    // (|a|/a)(a - z) sum (conj(a) z)^n: c_0 = |a|, c_n = (|a|/a) conj(a)^{n-1}(|a|^2 - 1)
    let unit = a.norm() / a;
    c[0] = Complex64::new(a.norm(), 0.0);
    let mut p = ONE;
    for cn in c.iter_mut().skip(1) {
        *cn = unit * p * (a.norm_sqr() - 1.0);
        p *= a.conj();
    }
    c
}

/// First `len` Taylor coefficients of u.
pub fn taylor_coeffs(spec: &InnerFunctionSpec, len: usize) -> CoeffFun {
    let len = len.max(1);
    let mut acc = vec![ZERO; len];
    acc[0] = ONE;
    let mut exact = true;
    for (a, m) in &spec.zeros {
        let b = blaschke_coeffs(*a, len);
        for _ in 0..*m {
            acc = convolve(&acc, &b, len);
        }
        exact &= *a == ZERO;
    }
    for (xi, w) in &spec.atoms {
        acc = convolve(&acc, &atom_coeffs(*xi, *w, len), len);
        exact = false;
    }
    CoeffFun::new(acc).with_exact(exact)
}

/// Boundary points where |u| has liminf 0: the atoms plus declared zero
/// accumulation points.
pub fn boundary_spectrum(spec: &InnerFunctionSpec) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for p in spec.atoms.iter().map(|(xi, _)| *xi).chain(spec.zero_accumulation.iter().copied()) {
        if !out.iter().any(|q| (q - p).norm() < 1e-12) {
            out.push(p);
        }
    }
    out
}

/// M half-offset samples theta_j = 2 pi (j + 1/2)/M.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub m: usize,
}

impl BoundaryGrid {
    pub fn new(m: usize) -> Result<Self> {
        if !m.is_power_of_two() || m < 4 {
            return Err(Error::InvalidParameter(format!("grid size {m} must be a power of two >= 4")));
        }
        Ok(Self { m })
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + 0.5) / self.m as f64
    }

    pub fn point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.theta(j))
    }

    /// Samples of sum_n c_n z^n, with c indexed by n mod M (negative indices in
    /// the upper half).
    pub fn to_samples(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut v = vec![ZERO; m];
        for (k, c) in coeffs.iter().enumerate().take(m) {
            let n = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
            v[k] = c * Complex64::from_polar(1.0, PI * n / m as f64);
        }
        let (_, inv) = fft_pair(m);
        inv.process(&mut v);
        v
    }

    /// Fourier coefficients from samples, indexed by n mod M.
    pub fn from_samples(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut v = samples.to_vec();
        let (fwd, _) = fft_pair(m);
        fwd.process(&mut v);
        for (k, c) in v.iter_mut().enumerate() {
            let n = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
            *c *= Complex64::from_polar(1.0 / m as f64, -PI * n / m as f64);
        }
        v
    }

    /// u at the grid points, checked to be unimodular.
    pub fn inner_samples(&self, spec: &InnerFunctionSpec) -> Result<Vec<Complex64>> {
        (0..self.m)
            .map(|j| {
                let v = inner_eval_boundary(spec, self.theta(j))?;
                if (v.norm() - 1.0).abs() > UNIMODULAR_TOL {
                    return Err(Error::NonUnimodular { index: j, modulus: v.norm() });
                }
                Ok(v)
            })
            .collect()
    }
}

/// Output of [`model_projection`].
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// Coefficients of P f up to the grid size.
    pub pf: CoeffFun,
    /// |P(P f) - P f| / |f| at the same truncation.
    pub idempotence: f64,
}

/// P f = f - u T_ubar f onto (u H^2)^perp, with u's Taylor coefficients taken to
/// the grid size M. T_ubar f is exact for polynomial f; the only truncation is
/// of u times that polynomial at M coefficients.
pub fn model_projection(f: &CoeffFun, spec: &InnerFunctionSpec, grid: BoundaryGrid) -> Result<Projection> {
    let m = grid.m;
    if f.order() > m / 4 {
        return Err(Error::AliasingGuard { order: f.order(), limit: m / 4 });
    }
    let u = taylor_coeffs(spec, m);
    let pf = toeplitz_projection(u.coeffs(), f.coeffs(), m);
    let ppf = toeplitz_projection(u.coeffs(), &pf, m);
    let idem = norm(&ppf.iter().zip(&pf).map(|(a, b)| a - b).collect::<Vec<_>>()) / f.norm().max(1e-300);
    Ok(Projection { pf: CoeffFun::new(pf), idempotence: idem })
}

fn toeplitz_projection(u: &[Complex64], f: &[Complex64], len: usize) -> Vec<Complex64> {
    let d = correlate(u, f, f.len());
    let ud = convolve(u, &d, len);
    let mut out: Vec<Complex64> = f.to_vec();
    out.resize(len, ZERO);
    for (o, v) in out.iter_mut().zip(ud) {
        *o -= v;
    }
    out
}

/// The discrete projector s -> s - u Pi(ubar s) on boundary samples, where Pi
/// keeps the nonnegative Fourier half. Exactly idempotent and self-adjoint on C^M.
pub fn boundary_projection(samples: &[Complex64], u_samples: &[Complex64], grid: BoundaryGrid) -> Vec<Complex64> {
    let m = grid.m;
    let v: Vec<Complex64> = samples.iter().zip(u_samples).map(|(s, u)| s * u.conj()).collect();
    let mut c = grid.from_samples(&v);
    for x in c.iter_mut().skip(m / 2) {
        *x = ZERO;
    }
    let w = grid.to_samples(&c);
    samples.iter().zip(u_samples).zip(w).map(|((s, u), w)| s - u * w).collect()
}

/// Median and max of the invariance residual over seeded trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceStats {
    pub median: f64,
    pub max: f64,
    pub residuals: Vec<f64>,
}

/// r = |(T_ubar C P f)_{n < N}| / |P f| for random f of order N: the leading
/// coordinates of the component of C P f outside the model space.
pub fn invariance_residual(spec: &InnerFunctionSpec, trials: usize, n: usize, grid: BoundaryGrid, seed: u64) -> Result<InvarianceStats> {
    let l = grid.m;
    if n > l / 4 {
        return Err(Error::AliasingGuard { order: n, limit: l / 4 });
    }
    let u = taylor_coeffs(spec, l);
    let mut residuals = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let f: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let g = toeplitz_projection(u.coeffs(), &f, l);
        let h = apply_c(&CoeffFun::new(g.clone()));
        let r = correlate(u.coeffs(), h.coeffs(), n);
        residuals.push(norm(&r) / norm(&g));
    }
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let max = sorted.last().copied().unwrap_or(f64::NAN);
    Ok(InvarianceStats { median, max, residuals })
}

/// Re((phi_t(z) + 1)/(phi_t(z) - 1) - (z + 1)/(z - 1)) over the points; the
/// max must be <= 0. Also reports the deviation from the closed form
/// 2(e^t - 1) Re(1/(z - 1)).
pub fn halfplane_inequality_check(t: f64, points: &[Complex64]) -> Result<CheckReport> {
    let m = AffineSelfMap::flow(t)?;
    let mut worst = f64::NEG_INFINITY;
    let mut closed = 0.0f64;
    for z in points {
        let p = m.eval(*z);
        let v = ((p + 1.0) / (p - 1.0) - (*z + 1.0) / (*z - 1.0)).re;
        let want = (2.0 * t.exp_m1() / (*z - 1.0)).re;
        worst = worst.max(v);
        closed = closed.max((v - want).abs() / want.abs().max(1.0));
    }
    Ok(CheckReport::new("halfplane_inequality", "Re((phi_t + 1)/(phi_t - 1) - (z + 1)/(z - 1)) <= 0", Provenance::Reference)
        .param("t", t)
        .param("points", points.len())
        .computed(vec![worst])
        .tolerance(1e-12)
        .note(format!("closed-form deviation {closed:e}"))
        .judge_at_most())
}

/// Coefficients of g_alpha = (1 - u_alpha)/(1 + z).
pub fn g_alpha(alpha: f64, n: usize) -> CoeffFun {
    let u = atom_coeffs(ONE, alpha, n.max(1));
    let mut g = Vec::with_capacity(u.len());
    let mut prev = ZERO;
    for (k, c) in u.iter().enumerate() {
        let b = if k == 0 { ONE - c } else { -c };
        prev = b - prev;
        g.push(prev);
    }
    CoeffFun::new(g)
}

/// Closed form of g_alpha inside the disc.
pub fn g_alpha_eval(alpha: f64, z: Complex64) -> Complex64 {
    (1.0 - (alpha * (z + 1.0) / (z - 1.0)).exp()) / (1.0 + z)
}

/// A term r(x) e^{i kappa x} of a boundary function for |x| > x0.
pub struct CircleTail<'a> {
    pub kappa: f64,
    pub r: &'a dyn Fn(f64) -> Complex64,
}

/// Moments (1/2 pi) integral of F(e^{i theta}) e^{i p theta} d theta for p in
/// `powers`, written in x = cot(theta/2), where e^{i theta} = (x + i)/(x - i)
/// and d theta = 2 dx/(1 + x^2). F is `middle` on |x| <= x0 and equals the
/// sum of `tails` beyond; `freq` bounds the oscillation frequency of F in x.
pub fn circle_moments(
    middle: &dyn Fn(f64) -> Complex64,
    tails: &[CircleTail<'_>],
    powers: std::ops::RangeInclusive<i64>,
    x0: f64,
    freq: f64,
) -> Result<Vec<Complex64>> {
    let (p_lo, p_hi) = (*powers.start(), *powers.end());
    let count = (p_hi - p_lo + 1).max(0) as usize;
    let p_abs = p_lo.abs().max(p_hi.abs()) as f64;
    let integ = Integrator::default();
    let rule = integ.rule().clone();
    let zpow = |x: f64, p: i64| -> Complex64 {
        let z = Complex64::new(x, 1.0) / Complex64::new(x, -1.0);
        z.powi(p as i32)
    };
    let mut out = vec![ZERO; count];
    let mut a = -x0;
    while a < x0 {
        let local = freq + 2.0 * p_abs / (1.0 + a.abs().min((a + 1.0).abs()).powi(2));
        let b = (a + (4.0 / local).min(1.0)).min(x0);
        let h = 0.5 * (b - a);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = a + h * (1.0 + t);
            let base = middle(x) * (w * h / (PI * (1.0 + x * x)));
            let z = Complex64::new(x, 1.0) / Complex64::new(x, -1.0);
            let mut zp = z.powi(p_lo as i32);
            for o in out.iter_mut() {
                *o += base * zp;
                zp *= z;
            }
        }
        a = b;
    }
    for (k, o) in out.iter_mut().enumerate() {
        let p = p_lo + k as i64;
        for tail in tails {
            let rp = |x: f64| (tail.r)(x) * zpow(x, p) / (PI * (1.0 + x * x));
            let rm = |x: f64| rp(-x);
            if tail.kappa == 0.0 {
                *o += algebraic_tail(&rp, x0, &integ)? + algebraic_tail(&rm, x0, &integ)?;
            } else {
                *o += oscillatory_tail(&rp, tail.kappa, x0) + oscillatory_tail(&rm, -tail.kappa, x0);
            }
        }
    }
    Ok(out)
}

/// Cut-off for the Cayley-coordinate quadrature.
pub const CAYLEY_X0: f64 = 1000.0;

/// max over n <= n_max of |<g_alpha, u_alpha z^n>| by boundary quadrature of
/// the closed forms, plus the deviation of the Taylor coefficients of
/// g_alpha from its closed form on |z| = 1/2.
pub fn g_alpha_membership(alpha: f64, n_max: usize, n_coeffs: usize) -> Result<CheckReport> {
    // conj(u) (1 - u)/(1 + z) = (e^{i alpha x} - 1)(x - i)/(2x)
    let middle = |x: f64| {
        let ax = alpha * x;
        let em1 = Complex64::new(-2.0 * (0.5 * ax).sin().powi(2), ax.sin());
        if x == 0.0 {
            Complex64::new(0.5 * alpha, 0.0)
        } else {
            em1 / x * Complex64::new(x, -1.0) / 2.0
        }
    };
    let r = |x: f64| Complex64::new(x, -1.0) / (2.0 * x);
    let rn = |x: f64| -r(x);
    let tails = [CircleTail { kappa: alpha, r: &r }, CircleTail { kappa: 0.0, r: &rn }];
    let moments = circle_moments(&middle, &tails, -(n_max as i64)..=0, CAYLEY_X0, alpha)?;
    let worst = moments.iter().map(|m| m.norm()).fold(0.0, f64::max);
    let g = g_alpha(alpha, n_coeffs);
    let coef_dev = (0..32)
        .map(|j| {
            let z = Complex64::from_polar(0.5, 2.0 * PI * j as f64 / 32.0);
            (eval(&g, z) - g_alpha_eval(alpha, z)).norm()
        })
        .fold(0.0, f64::max);
    let n_half = (n_max / 2).max(1);
    let truncated = (0..=n_half)
        .map(|n| {
            let u = atom_coeffs(ONE, alpha, n_coeffs);
            let s: Complex64 = g.coeffs()[n..].iter().zip(&u).map(|(a, b)| a * b.conj()).sum();
            s.norm()
        })
        .fold(0.0, f64::max);
    Ok(CheckReport::new("g_alpha_membership", "<g_alpha, u_alpha h> = 0, g_alpha = (1 - u_alpha)/(1 + z)", Provenance::Reference)
        .param("alpha", alpha)
        .param("n_max", n_max)
        .param("x0", CAYLEY_X0)
        .param("N", n_coeffs)
        .computed(vec![worst, coef_dev])
        .tolerance(1e-8)
        .note(format!("coefficient-space inner products at order N (truncation-limited): {truncated:e}"))
        .judge_at_most())
}

/// max over n <= n_max of |<P f, u_alpha z^n>| / |f| for polynomial f, with P f
/// from the Toeplitz form and the pairing by boundary quadrature.
pub fn orthogonality_check(alpha: f64, f: &CoeffFun, n_max: usize) -> Result<CheckReport> {
    let deg = f.order();
    let u = atom_coeffs(ONE, alpha, deg);
    let d = CoeffFun::new(correlate(&u, f.coeffs(), deg));
    // <f - u D, u z^n> = (1/2 pi) int (conj(u) f - D) z^{-n}
    let zf = |x: f64| Complex64::new(x, 1.0) / Complex64::new(x, -1.0);
    let middle = |x: f64| {
        let z = zf(x);
        Complex64::from_polar(1.0, alpha * x) * eval(f, z) - eval(&d, z)
    };
    let r1 = |x: f64| eval(f, zf(x));
    let r0 = |x: f64| -eval(&d, zf(x));
    let tails = [CircleTail { kappa: alpha, r: &r1 }, CircleTail { kappa: 0.0, r: &r0 }];
    let moments = circle_moments(&middle, &tails, -(n_max as i64)..=0, CAYLEY_X0, alpha + deg as f64)?;
    let worst = moments.iter().map(|m| m.norm()).fold(0.0, f64::max) / f.norm();
    Ok(CheckReport::new("model_orthogonality", "P f is orthogonal to u_alpha H^2", Provenance::Reference)
        .param("alpha", alpha)
        .param("degree", deg)
        .param("n_max", n_max)
        .param("x0", CAYLEY_X0)
        .computed(vec![worst])
        .tolerance(1e-8)
        .judge_at_most())
}

/// |first `modes` negative Fourier modes of conj(u_alpha) (u_alpha o phi_t)(h o phi_t)| / |h|:
/// the part of C_{phi_t}(u_alpha h) outside u_alpha H^2.
pub fn duality_residual(alpha: f64, t: f64, h: &CoeffFun, modes: usize) -> Result<CheckReport> {
    let phi = AffineSelfMap::flow(t)?;
    let spec = InnerFunctionSpec::u_alpha(alpha)?;
    let zf = |x: f64| Complex64::new(x, 1.0) / Complex64::new(x, -1.0);
    let middle = |x: f64| {
        let p = phi.eval(zf(x));
        let up = inner_eval(&spec, p).unwrap_or(ZERO);
        Complex64::from_polar(1.0, alpha * x) * up * eval(h, p)
    };
    // conj(u)(u o phi_t) = e^{-alpha(e^t - 1)} e^{i kappa x} exactly on the circle
    let kappa = -alpha * t.exp_m1();
    let c = (-alpha * t.exp_m1()).exp();
    let r = |x: f64| c * eval(h, phi.eval(zf(x)));
    let tails = [CircleTail { kappa, r: &r }];
    let moments = circle_moments(&middle, &tails, 1..=(modes as i64), CAYLEY_X0, alpha * t.exp() + h.order() as f64)?;
    let res = norm(&moments) / h.norm();
    Ok(CheckReport::new("duality_invariance", "C_{phi_t} maps u_alpha H^2 into itself", Provenance::Reference)
        .param("alpha", alpha)
        .param("t", t)
        .param("modes", modes)
        .param("x0", CAYLEY_X0)
        .computed(vec![res])
        .tolerance(1e-6)
        .judge_at_most())
}

/// Coefficients of the model-space kernel (1 - conj(u(lambda)) u(z))/(1 - conj(lambda) z).
pub fn model_kernel(u: &CoeffFun, u_lambda: Complex64, lambda: Complex64, n: usize) -> Vec<Complex64> {
    let k = crate::h2core::cauchy_kernel(lambda, n);
    let uk = convolve(u.coeffs(), k.coeffs(), n);
    k.coeffs().iter().zip(uk).map(|(a, b)| a - u_lambda.conj() * b).collect()
}

/// Principal angles between the model-space kernel span at the sample points
/// and the Krylov span of g under C, at truncation order `n`. Returns all
/// rank(kernels) angles in ascending order.
pub fn krylov_angles(g: &CoeffFun, m: usize, spec: &InnerFunctionSpec, points: &[Complex64], n: usize) -> Result<Vec<f64>> {
    let kernels = kernel_basis(spec, points, n)?;
    let krylov = krylov_basis(g, m, n)?;
    Ok(principal_angles(&kernels, &krylov))
}

/// Orthonormal basis of the kernel span (rank threshold 1e-10).
pub fn kernel_basis(spec: &InnerFunctionSpec, points: &[Complex64], n: usize) -> Result<CMatrix> {
    let u = taylor_coeffs(spec, n);
    let mut cols = Vec::with_capacity(points.len());
    for (i, l) in points.iter().enumerate() {
        if !(l.norm() < 1.0) {
            return Err(Error::OutsideDisk(*l));
        }
        if points[..i].iter().any(|q| (q - l).norm() < 1e-14) {
            return Err(Error::InvalidParameter(format!("repeated sample point {l}")));
        }
        cols.push(model_kernel(&u, inner_eval(spec, *l)?, *l, n));
    }
    let q = orthonormal_basis(&columns_to_matrix(&cols), 1e-10)?;
    if q.rank == 0 {
        return Err(Error::RankCollapse("kernel basis"));
    }
    Ok(q.basis)
}

/// Arnoldi basis of span{g, C g, ..., C^{m-1} g} with two Gram-Schmidt passes.
pub fn krylov_basis(g: &CoeffFun, m: usize, n: usize) -> Result<CMatrix> {
    let g = g.resized(n);
    let g0 = g.norm();
    if g0 == 0.0 {
        return Err(Error::RankCollapse("Krylov start vector is zero"));
    }
    let mut q: Vec<Vec<Complex64>> = vec![g.coeffs().iter().map(|c| c / g0).collect()];
    while q.len() < m {
        let mut w = apply_c(&CoeffFun::new(q.last().unwrap().clone())).into_coeffs();
        let before = norm(&w);
        for _ in 0..2 {
            for v in &q {
                let c = dot(&w, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let nw = norm(&w);
        if nw <= 1e-14 * before {
            return Err(Error::RankCollapse("Krylov block"));
        }
        q.push(w.into_iter().map(|c| c / nw).collect());
    }
    Ok(columns_to_matrix(&q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_eval_examples() {
        let u1 = InnerFunctionSpec::u_alpha(1.3).unwrap();
        assert!((inner_eval(&u1, ZERO).unwrap() - c((-1.3f64).exp(), 0.0)).norm() < 1e-15);
        for th in [0.3, 1.0, 2.5, 5.9] {
            let z = Complex64::from_polar(1.0, th);
            let want = Complex64::from_polar(1.0, -1.3 / (th / 2.0).tan());
            let got = inner_eval(&u1, z).unwrap();
            assert!((got - want).norm() < 1e-12);
        }
        assert!(matches!(inner_eval(&u1, ONE), Err(Error::AtomEvaluation(_))));
        let z = InnerFunctionSpec::blaschke(vec![(ZERO, 1)]).unwrap();
        assert_eq!(inner_eval(&z, c(0.3, 0.1)).unwrap(), c(0.3, 0.1));
        assert!(InnerFunctionSpec::blaschke(vec![(ONE, 1)]).is_err());
        assert!(InnerFunctionSpec::atom(c(0.5, 0.0), 1.0).is_err());
    }

    #[test]
    fn boundary_evaluation_agrees_with_interior_formula() {
        let spec = InnerFunctionSpec { zeros: vec![(c(0.3, -0.4), 1)], atoms: vec![(Complex64::from_polar(1.0, 2.0), 0.6)], zero_accumulation: vec![] };
        for th in [0.1, 1.0, 3.0, 4.5] {
            let a = inner_eval_boundary(&spec, th).unwrap();
            let b = inner_eval(&spec, Complex64::from_polar(1.0, th)).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
        assert!(matches!(inner_eval_boundary(&spec, 2.0), Err(Error::AtomEvaluation(_))));
    }

    #[test]
    fn taylor_coefficients_match_evaluation() {
        let spec = InnerFunctionSpec {
            zeros: vec![(c(0.5, 0.2), 2), (ZERO, 1)],
            atoms: vec![(c(-1.0, 0.0), 0.7), (Complex64::from_polar(1.0, 1.0), 0.2)],
            zero_accumulation: vec![],
        };
        let u = taylor_coeffs(&spec, 512);
        for z in crate::sobol::disk_points(10, 0.6) {
            assert!((eval(&u, z) - inner_eval(&spec, z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn atom_recurrence_against_quadratic_exp_recurrence() {
        // n E_n = sum_k k H_k E_{n-k}, H = -alpha (1 + z)/(1 - z)
        let alpha = 0.8;
        let n = 200;
        let mut h: Vec<f64> = vec![-2.0 * alpha; n];
        h[0] = -alpha;
        let mut e = vec![(-alpha as f64).exp(); n];
        for m in 1..n {
            let s: f64 = (1..=m).map(|k| k as f64 * h[k] * e[m - k]).sum();
            e[m] = s / m as f64;
        }
        let fast = atom_coeffs(ONE, alpha, n);
        for m in 0..n {
            assert!((fast[m] - c(e[m], 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn projection_examples() {
        let grid = BoundaryGrid::new(64).unwrap();
        let f = CoeffFun::polynomial(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.25, 0.1)]);
        let p = model_projection(&f, &InnerFunctionSpec::constant(), grid).unwrap();
        assert!(p.pf.norm() < 1e-15);
        let z = InnerFunctionSpec::blaschke(vec![(ZERO, 1)]).unwrap();
        let p = model_projection(&f, &z, grid).unwrap();
        assert!((p.pf.get(0) - f.get(0)).norm() < 1e-15);
        assert!(p.pf.coeffs()[1..].iter().all(|x| x.norm() < 1e-15));
        let big = CoeffFun::zeros(17);
        assert!(matches!(model_projection(&big, &z, grid), Err(Error::AliasingGuard { .. })));
    }

    #[test]
    fn blaschke_projection_is_idempotent_and_matches_samples() {
        let spec = InnerFunctionSpec::blaschke(vec![(c(0.5, 0.0), 1), (c(-0.2, 0.6), 2)]).unwrap();
        let grid = BoundaryGrid::new(1 << 12).unwrap();
        let f = CoeffFun::polynomial((0..40).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect());
        let p = model_projection(&f, &spec, grid).unwrap();
        assert!(p.idempotence < 1e-12, "{}", p.idempotence);
        let us = grid.inner_samples(&spec).unwrap();
        let s = grid.to_samples(f.coeffs());
        let bp = grid.from_samples(&boundary_projection(&s, &us, grid));
        for k in 0..200 {
            assert!((bp[k] - p.pf.get(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn sample_projector_is_an_orthogonal_projection() {
        let spec = InnerFunctionSpec::u_alpha(1.0).unwrap();
        let grid = BoundaryGrid::new(1 << 10).unwrap();
        let us = grid.inner_samples(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rand = || -> Vec<Complex64> { (0..grid.m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() };
        let (f, g) = (rand(), rand());
        let pf = boundary_projection(&f, &us, grid);
        let ppf = boundary_projection(&pf, &us, grid);
        let d: Vec<Complex64> = pf.iter().zip(&ppf).map(|(a, b)| a - b).collect();
        assert!(norm(&d) <= 1e-12 * norm(&f));
        let pg = boundary_projection(&g, &us, grid);
        assert!((dot(&pf, &g) - dot(&f, &pg)).norm() <= 1e-10 * norm(&f) * norm(&g));
    }

    #[test]
    fn boundary_samples_are_unimodular() {
        let grid = BoundaryGrid::new(1 << 14).unwrap();
        assert!(grid.inner_samples(&InnerFunctionSpec::u_alpha(1.0).unwrap()).is_ok());
        assert!(BoundaryGrid::new(1000).is_err());
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(boundary_spectrum(&InnerFunctionSpec::u_alpha(1.0).unwrap()), vec![ONE]);
        assert!(boundary_spectrum(&InnerFunctionSpec::blaschke(vec![(c(0.5, 0.0), 3)]).unwrap()).is_empty());
        let two = InnerFunctionSpec { atoms: vec![(ONE, 1.0), (-ONE, 2.0)], ..Default::default() };
        assert_eq!(boundary_spectrum(&two), vec![ONE, -ONE]);
    }

    #[test]
    fn halfplane_inequality() {
        let pts = crate::sobol::disk_points(1000, 0.999);
        let r = halfplane_inequality_check(1.0, &pts).unwrap();
        assert!(r.pass && r.computed[0] < 0.0);
        let r0 = halfplane_inequality_check(0.0, &pts).unwrap();
        assert!(r0.computed[0].abs() < 1e-9);
        // radially towards 1 the expression decreases without bound
        let near: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|r| halfplane_inequality_check(1.0, &[c(*r, 0.0)]).unwrap().computed[0])
            .collect();
        assert!(near[0] > near[1] && near[1] > near[2]);
    }

    #[test]
    fn g_alpha_examples() {
        let g = g_alpha(0.9, 64);
        assert!((g.get(0) - c(1.0 - (-0.9f64).exp(), 0.0)).norm() < 1e-15);
        let tiny = g_alpha(1e-12, 32);
        assert!(tiny.coeffs().iter().all(|x| x.norm() < 1e-11));
        let r = g_alpha_membership(1.0, 32, 10_000).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn orthogonality() {
        let f = CoeffFun::polynomial((0..12).map(|k| c(1.0 / (k + 1) as f64, (k as f64).cos())).collect());
        let r = orthogonality_check(1.0, &f, 64).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn duality() {
        let h = CoeffFun::polynomial(vec![c(1.0, 0.0), c(0.3, -0.2), c(0.0, 0.5)]);
        for t in [0.1, 1.0] {
            let r = duality_residual(1.0, t, &h, 64).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn invariance_dichotomy() {
        let grid = BoundaryGrid::new(1 << 13).unwrap();
        let u1 = invariance_residual(&InnerFunctionSpec::u_alpha(1.0).unwrap(), 5, 256, grid, 7).unwrap();
        let ctrl = invariance_residual(&InnerFunctionSpec::atom(-ONE, 1.0).unwrap(), 5, 256, grid, 7).unwrap();
        let bl = invariance_residual(&InnerFunctionSpec::blaschke(vec![(c(0.5, 0.0), 1)]).unwrap(), 5, 256, grid, 7).unwrap();
        assert!(u1.median < 1e-2, "{u1:?}");
        assert!(ctrl.median > 1e-2 && bl.median > 1e-2);
    }

    #[test]
    fn krylov_small() {
        let g = g_alpha(1.0, 256);
        let spec = InnerFunctionSpec::u_alpha(1.0).unwrap();
        let q = krylov_basis(&g, 1, 256).unwrap();
        assert!(principal_angles(&q, &q).iter().all(|a| a.abs() < 1e-14));
        let pts = crate::sobol::disk_points(12, 0.7);
        let a8 = krylov_angles(&g, 8, &spec, &pts, 256).unwrap();
        let a16 = krylov_angles(&g, 16, &spec, &pts, 256).unwrap();
        assert!(a16.last().unwrap() <= a8.last().unwrap());
    }
}
