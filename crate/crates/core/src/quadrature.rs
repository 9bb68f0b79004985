//! Gauss rules and the panel integrators built on them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::gamma;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Nodes and weights on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pd(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Jacobi for the weight (1 - x)^alpha (1 + x)^beta by Golub-Welsch.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> GaussRule {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let (a, b) = (alpha, beta);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(a + b + 1.0) * gamma(Complex64::new(a + 1.0, 0.0)).re
        * gamma(Complex64::new(b + 1.0, 0.0)).re
        / gamma(Complex64::new(a + b + 2.0, 0.0)).re;
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Apply a rule on [a, b].
pub fn apply_rule<F: Fn(f64) -> Complex64>(rule: &GaussRule, f: &F, a: f64, b: f64) -> Complex64 {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    let mut acc = ZERO;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(m + h * x) * *w;
    }
    acc * h
}

/// Sum of |f| times the weights, a cheap magnitude estimate for stopping rules.
fn apply_rule_abs<F: Fn(f64) -> Complex64>(rule: &GaussRule, f: &F, a: f64, b: f64) -> f64 {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    rule.nodes.iter().zip(&rule.weights).map(|(x, w)| f(m + h * x).norm() * w).sum::<f64>() * h.abs()
}

/// Adaptive bisection with a fixed Gauss-Legendre rule.
#[derive(Clone, Debug)]
pub struct Integrator {
    rule: GaussRule,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_depth: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(20, 1e-15, 1e-13)
    }
}

/// Result of a panel integration: value plus an estimate of the integral of |f|.
#[derive(Clone, Copy, Debug)]
pub struct PanelSum {
    pub value: Complex64,
    pub magnitude: f64,
}

impl Integrator {
    pub fn new(nodes: usize, tol_abs: f64, tol_rel: f64) -> Self {
        Self { rule: gauss_legendre(nodes), tol_abs, tol_rel, max_depth: 40 }
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Result<PanelSum> {
        let whole = apply_rule(&self.rule, f, a, b);
        let mut out = PanelSum { value: ZERO, magnitude: 0.0 };
        self.recurse(f, a, b, whole, 0, &mut out)?;
        Ok(out)
    }

    fn recurse<F: Fn(f64) -> Complex64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: Complex64,
        depth: usize,
        out: &mut PanelSum,
    ) -> Result<()> {
        let m = 0.5 * (a + b);
        let left = apply_rule(&self.rule, f, a, m);
        let right = apply_rule(&self.rule, f, m, b);
        let refined = left + right;
        let err = (refined - whole).norm();
        if err <= self.tol_abs.max(self.tol_rel * refined.norm()) {
            out.value += refined;
            out.magnitude += apply_rule_abs(&self.rule, f, a, b);
            return Ok(());
        }
        if depth >= self.max_depth {
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Legendre panel",
                iterations: depth,
                estimate: err,
            });
        }
        self.recurse(f, a, m, left, depth + 1, out)?;
        self.recurse(f, m, b, right, depth + 1, out)
    }

    /// Integral over [a, b] with f(x) ~ (x - a)^sigma near a (sigma > -1):
    /// geometric panels toward a, then one Gauss-Jacobi panel on the remainder.
    pub fn integrate_endpoint<F: Fn(f64) -> Complex64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        sigma: f64,
    ) -> Result<PanelSum> {
        if !(sigma > -1.0) {
            return Err(Error::InvalidParameter(format!("endpoint exponent {sigma} <= -1")));
        }
        let mut out = PanelSum { value: ZERO, magnitude: 0.0 };
        let ratio = 0.5f64.powf(1.0 + sigma);
        let mut hi = b;
        for _ in 0..400 {
            let lo = a + 0.5 * (hi - a);
            let p = self.integrate(f, lo, hi)?;
            out.value += p.value;
            out.magnitude += p.magnitude;
            hi = lo;
            let rest = 4.0 * p.magnitude * ratio / (1.0 - ratio);
            if rest <= self.tol_abs.max(self.tol_rel * out.value.norm()) * 1e-2 {
                break;
            }
        }
        let last = if sigma < 0.0 {
            let gj = gauss_jacobi(self.rule.nodes.len(), 0.0, sigma);
            let h = 0.5 * (hi - a);
            let mut acc = ZERO;
            for (t, w) in gj.nodes.iter().zip(&gj.weights) {
                let x = a + h * (1.0 + t);
                acc += f(x) / (x - a).powf(sigma) * *w;
            }
            acc * h.powf(1.0 + sigma)
        } else {
            apply_rule(&self.rule, f, a, hi)
        };
        out.value += last;
        out.magnitude += last.norm();
        Ok(out)
    }
}

/// Panel layout for integrals over (0, infinity).
#[derive(Clone, Debug)]
pub struct QuadScheme {
    /// Re sigma of a leading x^sigma factor at 0, if any.
    pub endpoint_exponent: Option<f64>,
    /// Points where the integrand is not smooth (indicator edges).
    pub breakpoints: Vec<f64>,
    pub integrator: Integrator,
    /// Outward doubling panels before giving up.
    pub max_panels: usize,
}

impl Default for QuadScheme {
    fn default() -> Self {
        Self {
            endpoint_exponent: None,
            breakpoints: Vec::new(),
            integrator: Integrator::default(),
            max_panels: 80,
        }
    }
}

impl QuadScheme {
    pub fn with_endpoint(sigma: f64) -> Self {
        Self { endpoint_exponent: Some(sigma), ..Self::default() }
    }

    pub fn with_breakpoints(points: Vec<f64>) -> Self {
        Self { breakpoints: points, ..Self::default() }
    }
}

/// Integral of g over (0, infinity): graded panels at 0, doubling panels outward,
/// split at the scheme's breakpoints. Stops once two consecutive panels are negligible
/// and every breakpoint has been passed.
pub fn integrate_half_line<F: Fn(f64) -> Complex64>(g: &F, scheme: &QuadScheme) -> Result<Complex64> {
    let integ = &scheme.integrator;
    let mut bps: Vec<f64> = scheme.breakpoints.iter().copied().filter(|b| *b > 0.0).collect();
    bps.sort_by(f64::total_cmp);
    let first = bps.first().copied().unwrap_or(1.0).min(1.0);
    let last_bp = bps.last().copied().unwrap_or(0.0);
    let sigma = scheme.endpoint_exponent.unwrap_or(0.0);
    let head = integ.integrate_endpoint(g, 0.0, first, sigma)?;
    let mut sum = head.value;
    let mut quiet = 0;
    let mut lo = first;
    for _ in 0..scheme.max_panels {
        let hi = 2.0 * lo;
        let mut cuts = vec![lo];
        cuts.extend(bps.iter().copied().filter(|b| *b > lo && *b < hi));
        cuts.push(hi);
        let mut mag = 0.0;
        for w in cuts.windows(2) {
            let p = integ.integrate(g, w[0], w[1])?;
            sum += p.value;
            mag += p.magnitude;
        }
        lo = hi;
        if mag <= integ.tol_abs.max(integ.tol_rel * sum.norm()) {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 2 && lo >= last_bp {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "half-line panel sum",
        iterations: scheme.max_panels,
        estimate: sum.norm(),
    })
}

/// Integral of f over the real line (the boundary Re s = 0, s = iy).
/// Returns the value and the truncation extent Y: panels [-Y, Y] were used.
pub fn integrate_real_line<F: Fn(f64) -> Complex64>(
    f: &F,
    tail_tol: f64,
    integ: &Integrator,
) -> Result<(Complex64, f64)> {
    let mut sum = ZERO;
    for k in 0..4 {
        let a = -1.0 + 0.5 * k as f64;
        sum += integ.integrate(f, a, a + 0.5)?.value;
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let hi = 2.0 * lo;
        let r = integ.integrate(f, lo, hi)?;
        let l = integ.integrate(f, -hi, -lo)?;
        sum += r.value + l.value;
        lo = hi;
        // For integrands decaying like y^-2 the remaining tail is about the size of
        // the last doubling panel.
        if r.magnitude + l.magnitude <= tail_tol {
            return Ok((sum, lo));
        }
    }
    Err(Error::NonConvergence { what: "real-line panel sum", iterations: 200, estimate: sum.norm() })
}

/// Integral of r(x) e^{i kappa x} over (x0, infinity) for r smooth and slowly
/// varying at scale x0 (kappa != 0), by three integrations by parts.
pub fn oscillatory_tail<F: Fn(f64) -> Complex64>(r: &F, kappa: f64, x0: f64) -> Complex64 {
    let h = 1e-2 * x0;
    let r0 = r(x0);
    let rp = r(x0 + h);
    let rm = r(x0 - h);
    let d1 = (rp - rm) / (2.0 * h);
    let d2 = (rp - 2.0 * r0 + rm) / (h * h);
    let ik = Complex64::new(0.0, kappa);
    let e = Complex64::from_polar(1.0, kappa * x0);
    e * (-r0 / ik + d1 / (ik * ik) - d2 / (ik * ik * ik))
}

/// Integral of r(x) over (x0, infinity) for r = O(x^-2), via x = 1/v.
pub fn algebraic_tail<F: Fn(f64) -> Complex64>(r: &F, x0: f64, integ: &Integrator) -> Result<Complex64> {
    let g = |v: f64| {
        if v <= 0.0 {
            ZERO
        } else {
            r(1.0 / v) / (v * v)
        }
    };
    Ok(integ.integrate(&g, 0.0, 1.0 / x0)?.value)
}

/// A term r(x) e^{i kappa x} of an integrand's asymptotic form for |x| large.
pub struct TailTerm<'a> {
    pub kappa: f64,
    pub r: Box<dyn Fn(f64) -> Complex64 + 'a>,
}

/// Integral over the real line of an integrand equal to `middle` on [-x0, x0]
/// and to the sum of `tails` outside it.
pub fn integrate_with_tails<F: Fn(f64) -> Complex64>(
    middle: &F,
    tails: &[TailTerm<'_>],
    x0: f64,
    integ: &Integrator,
) -> Result<Complex64> {
    let mut sum = ZERO;
    let pieces = (2.0 * x0).ceil().max(1.0) as usize;
    let step = 2.0 * x0 / pieces as f64;
    for k in 0..pieces {
        let a = -x0 + step * k as f64;
        sum += integ.integrate(middle, a, a + step)?.value;
    }
    for t in tails {
        let upper = |x: f64| (t.r)(x);
        let lower = |x: f64| (t.r)(-x);
        if t.kappa == 0.0 {
            sum += algebraic_tail(&upper, x0, integ)?;
            sum += algebraic_tail(&lower, x0, integ)?;
        } else {
            sum += oscillatory_tail(&upper, t.kappa, x0);
            sum += oscillatory_tail(&lower, -t.kappa, x0);
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(10);
        for k in 0..20 {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn jacobi_moments() {
        // weight (1+x)^beta on [-1,1]: integral of (1+x)^(beta+k) = 2^(beta+k+1)/(beta+k+1)
        let beta = -0.35;
        let r = gauss_jacobi(12, 0.0, beta);
        for k in 0..20 {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (1.0 + x).powi(k)).sum();
            let want = 2f64.powf(beta + k as f64 + 1.0) / (beta + k as f64 + 1.0);
            assert!((got - want).abs() < 1e-13 * want, "k={k}");
        }
        // Jacobi with alpha = beta = 0 is Legendre.
        let j = gauss_jacobi(8, 0.0, 0.0);
        let l = gauss_legendre(8);
        for (a, b) in j.nodes.iter().zip(&l.nodes) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn endpoint_power_singularity() {
        let integ = Integrator::default();
        for sigma in [-0.4, -0.1, 0.3] {
            let f = |x: f64| c(x.powf(sigma) * (-x).exp());
            let got = integ.integrate_endpoint(&f, 0.0, 1.0, sigma).unwrap().value;
            // series oracle: sum (-1)^k / (k! (sigma + k + 1))
            let mut want = 0.0;
            let mut fact = 1.0;
            for k in 0..40 {
                if k > 0 {
                    fact *= k as f64;
                }
                want += if k % 2 == 0 { 1.0 } else { -1.0 } / (fact * (sigma + k as f64 + 1.0));
            }
            assert!((got - c(want)).norm() < 1e-13, "sigma={sigma}");
        }
    }

    #[test]
    fn half_line_with_breakpoint() {
        let alpha = 1.3;
        let s = Complex64::new(0.7, 2.0);
        let g = |x: f64| if x < alpha { (-s * x).exp() } else { ZERO };
        let got = integrate_half_line(&g, &QuadScheme::with_breakpoints(vec![alpha])).unwrap();
        let want = (1.0 - (-alpha * s).exp()) / s;
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn real_line_lorentzian() {
        let f = |y: f64| c(1.0 / (PI * (1.0 + y * y)));
        let (v, big_y) = integrate_real_line(&f, 1e-10, &Integrator::default()).unwrap();
        assert!((v - c(1.0)).norm() < 1e-9);
        assert!(big_y > 1e9);
    }

    #[test]
    fn tails_close_an_oscillatory_integral() {
        // integral of e^{i x} / (1 + x^2) over R = pi / e
        let integ = Integrator::default();
        let middle = |x: f64| Complex64::from_polar(1.0, x) / (1.0 + x * x);
        let tails = [TailTerm { kappa: 1.0, r: Box::new(|x: f64| c(1.0 / (1.0 + x * x))) }];
        let got = integrate_with_tails(&middle, &tails, 200.0, &integ).unwrap();
        // first omitted term of the expansion is r'''(x0) ~ 24 / x0^5
        assert!((got - c(PI / 1f64.exp())).norm() < 3e-10);
        // and the non-oscillatory version: pi
        let tails = [TailTerm { kappa: 0.0, r: Box::new(|x: f64| c(1.0 / (1.0 + x * x))) }];
        let plain = |x: f64| c(1.0 / (1.0 + x * x));
        let got = integrate_with_tails(&plain, &tails, 50.0, &integ).unwrap();
        assert!((got - c(PI)).norm() < 1e-12);
    }
}
