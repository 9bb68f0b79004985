//! Verification suites: fixed lists of checks whose default resolutions are the
//! acceptance run.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cesaro_ops as ops;
use crate::error::{Error, Result};
use crate::h2core::{power_series, CoeffFun, PowerLogParams};
use crate::halfplane_chain as hp;
use crate::kriete_trutt as kt;
use crate::model_spaces::{self as ms, BoundaryGrid, InnerFunctionSpec};
use crate::report::{CheckReport, Provenance};
use crate::sobol::disk_points;
use crate::subspace_lab as sl;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Model,
    Kt,
    Subspace,
    Chain,
    All,
}

impl Suite {
    pub const PARTS: [Suite; 5] = [Suite::Core, Suite::Model, Suite::Kt, Suite::Subspace, Suite::Chain];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Model => "model",
            Suite::Kt => "kt",
            Suite::Subspace => "subspace",
            Suite::Chain => "chain",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "model" => Ok(Suite::Model),
            "kt" => Ok(Suite::Kt),
            "subspace" => Ok(Suite::Subspace),
            "chain" => Ok(Suite::Chain),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidParameter(format!("unknown suite {s:?}"))),
        }
    }
}

/// Knobs of a suite run. `None` resolutions take the defaults listed on each field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    /// Truncation order: adjoint pairing (4096), model invariance (512),
    /// KT eigen check (4096), subspace spans (100000).
    pub n: Option<usize>,
    /// Boundary grid M of the model invariance run (2^14; 2M is the refinement).
    pub grid: Option<usize>,
    pub seed: u64,
    pub tol_scale: f64,
    /// Mass of the atom at 1 in the model suite.
    pub alpha: f64,
    /// Location x of the negative-control atom, at x + i sqrt(1 - x^2).
    pub neg_control: f64,
    pub trials: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { suite: Suite::All, n: None, grid: None, seed: 0x5EED, tol_scale: 1.0, alpha: 1.0, neg_control: -1.0, trials: 20 }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol-scale {} must be positive", self.tol_scale)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha {} must be positive", self.alpha)));
        }
        if !(-1.0..=1.0).contains(&self.neg_control) {
            return Err(Error::InvalidParameter(format!("neg-control {} must lie in [-1, 1]", self.neg_control)));
        }
        if self.n == Some(0) || self.trials == 0 {
            return Err(Error::InvalidParameter("n and trials must be positive".into()));
        }
        if let Some(m) = self.grid {
            BoundaryGrid::new(m)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: Vec<String>,
}

/// Checks sorted by name; wall times (seconds) are kept apart so the checks
/// serialize deterministically.
#[derive(Clone, Debug)]
pub struct SuiteRun {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
    pub timing: BTreeMap<String, f64>,
}

impl SuiteRun {
    pub fn summary(&self) -> Summary {
        let failed: Vec<String> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        Summary { total: self.checks.len(), passed: self.checks.len() - failed.len(), failed }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Collector {
    checks: Vec<CheckReport>,
}

impl Collector {
    /// Times `f`; an error becomes a failed check carrying the message.
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<Vec<CheckReport>>) {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        match out {
            Ok(reports) => {
                let n = reports.len();
                for mut r in reports {
                    r.wall_time = elapsed / n as u32;
                    self.checks.push(r);
                }
            }
            Err(e) => {
                let mut r = CheckReport::new(name, "", Provenance::Derived).note(format!("error: {e}")).pass(false);
                r.wall_time = elapsed;
                self.checks.push(r);
            }
        }
    }

    fn one(&mut self, name: &str, f: impl FnOnce() -> Result<CheckReport>) {
        self.run(name, || Ok(vec![rename(f()?, name)]))
    }
}

fn rename(mut r: CheckReport, name: &str) -> CheckReport {
    r.name = name.to_string();
    r
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteRun> {
    cfg.validate()?;
    let mut col = Collector { checks: Vec::new() };
    let parts: Vec<Suite> = if cfg.suite == Suite::All { Suite::PARTS.to_vec() } else { vec![cfg.suite] };
    for part in parts {
        match part {
            Suite::Core => core(cfg, &mut col),
            Suite::Model => model(cfg, &mut col),
            Suite::Kt => kt_suite(cfg, &mut col),
            Suite::Subspace => subspace(cfg, &mut col),
            Suite::Chain => chain(&mut col),
            Suite::All => unreachable!(),
        }
    }
    let mut checks: Vec<CheckReport> = col.checks.into_iter().map(|r| r.rescale_tolerance(cfg.tol_scale)).collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let timing = checks.iter().map(|r| (r.name.clone(), r.wall_time.as_secs_f64())).collect();
    Ok(SuiteRun { suite: cfg.suite, seed: cfg.seed, checks, timing })
}

fn core(cfg: &SuiteConfig, col: &mut Collector) {
    let n = cfg.n.unwrap_or(4096);
    let seed = cfg.seed;
    col.one("adjoint_pairing", || Ok(ops::adjoint_pairing_check(n, 100, seed)));
    col.one("tt_star_diagonal", || Ok(ops::diag_identity_tt_star(512)));
    col.one("norm_limits", || ops::norm_limits_check(&[512, 2048, 8192], 100_000));
    col.one("semigroup", || ops::semigroup_check(256, &[(0.3, 0.7), (1.0, 1.0)]));
    col.one("cstar_eigen_polynomial", || ops::cstar_eigen_residual(c(0.5, 0.0), 64));
    col.one("cstar_eigen_tail", || ops::cstar_eigen_residual(c(0.3, 0.2), 100_000));
    col.one("universal_translate_diag", || Ok(ops::universal_translate_diag(0.5, c(0.1, -0.2), 64)));
    col.one("commutator", || Ok(ops::commutator_check(0.5, 128)));
    col.one("translate_function", || ops::translate_function_check(0.5, c(0.1, -0.2), 16));
    let sizes = [256, 512, 1024, 2048];
    col.one("smin_outside_spectrum", || ops::smin_outside_check(&sizes));
    col.one("smin_inside_spectrum", || ops::smin_inside_check(&sizes));
}

/// Median invariance residual at M and 2M. `control` flips the expectation:
/// controls must stay at or above 1e-2, u_alpha must be <= 1e-3 and decrease.
fn invariance_check(spec: &InnerFunctionSpec, label: &str, cfg: &SuiteConfig, control: bool) -> Result<CheckReport> {
    let n = cfg.n.unwrap_or(512);
    let m = cfg.grid.unwrap_or(1 << 14);
    let a = ms::invariance_residual(spec, cfg.trials, n, BoundaryGrid::new(m)?, cfg.seed)?;
    let b = ms::invariance_residual(spec, cfg.trials, n, BoundaryGrid::new(2 * m)?, cfg.seed)?;
    let (tol, pass) = if control {
        (1e-2, a.median >= 1e-2 && b.median >= 1e-2)
    } else {
        (1e-3, a.median <= 1e-3 && b.median < a.median)
    };
    Ok(CheckReport::new(
        label,
        if control { "C* does not leave (u H^2)^perp invariant when u has mass away from 1" } else { "(u_alpha H^2)^perp is C-invariant" },
        Provenance::Derived,
    )
    .param("N", n)
    .param("M", vec![m, 2 * m])
    .param("trials", cfg.trials)
    .param("seed", cfg.seed)
    .computed(vec![a.median, b.median])
    .tolerance(tol)
    .note(format!("max residuals {:.3e}, {:.3e}", a.max, b.max))
    .pass(pass))
}

fn model(cfg: &SuiteConfig, col: &mut Collector) {
    let alpha = cfg.alpha;
    let x = cfg.neg_control;
    let xi = c(x, (1.0 - x * x).max(0.0).sqrt());
    col.one("model_invariance", || invariance_check(&InnerFunctionSpec::u_alpha(alpha)?, "model_invariance", cfg, false));
    col.one("model_control_atom", || invariance_check(&InnerFunctionSpec::atom(xi, alpha)?, "model_control_atom", cfg, true));
    col.one("model_control_blaschke", || {
        invariance_check(&InnerFunctionSpec::blaschke(vec![(c(0.5, 0.0), 1)])?, "model_control_blaschke", cfg, true)
    });
    col.one("projection_idempotence", || {
        let spec = InnerFunctionSpec::blaschke(vec![(c(0.5, 0.0), 1), (c(-0.2, 0.6), 2)])?;
        let f = CoeffFun::polynomial((0..40).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect());
        let p = ms::model_projection(&f, &spec, BoundaryGrid::new(1 << 12)?)?;
        Ok(CheckReport::new("projection_idempotence", "P^2 = P on (u H^2)^perp", Provenance::Trivial)
            .param("M", 1 << 12)
            .computed(vec![p.idempotence])
            .tolerance(1e-10)
            .judge_at_most())
    });
    col.one("halfplane_inequality", || ms::halfplane_inequality_check(1.0, &disk_points(1000, 0.999)));
    col.one("g_alpha_membership", || ms::g_alpha_membership(alpha, 32, 10_000));
    col.one("model_orthogonality", || {
        let f = CoeffFun::polynomial((0..12).map(|k| c(1.0 / (k + 1) as f64, (k as f64).cos())).collect());
        ms::orthogonality_check(alpha, &f, 32)
    });
    for t in [0.1, 1.0] {
        let name = format!("duality_invariance_t{t}");
        col.one(&name, || {
            let h = CoeffFun::polynomial(vec![c(1.0, 0.0), c(0.3, -0.2), c(0.0, 0.5)]);
            ms::duality_residual(alpha, t, &h, 64)
        });
    }
    col.one("krylov_angles", || {
        let n = 4096;
        let g = ms::g_alpha(alpha, n);
        let spec = InnerFunctionSpec::u_alpha(alpha)?;
        let pts = disk_points(30, 0.7);
        let a8 = *ms::krylov_angles(&g, 8, &spec, &pts, n)?.last().unwrap_or(&f64::NAN);
        let a64 = *ms::krylov_angles(&g, 64, &spec, &pts, n)?.last().unwrap_or(&f64::NAN);
        Ok(CheckReport::new("krylov_angles", "g_alpha is cyclic for C on (u_alpha H^2)^perp", Provenance::Derived)
            .param("N", n)
            .param("points", 30)
            .param("radius", 0.7)
            .param("m", vec![8, 64])
            .computed(vec![a8, a64])
            .tolerance(0.5)
            .note("largest principal angle; m = 64 must be below half the m = 8 value")
            .pass(a64 <= 0.5 * a8))
    });
}

fn kt_suite(cfg: &SuiteConfig, col: &mut Collector) {
    let seed = cfg.seed;
    let n = cfg.n.unwrap_or(4096);
    col.one("kt_intertwining", || kt::intertwine_check(&disk_points(50, 0.7), seed));
    col.one("kt_cauchy_kernel", || kt::cauchy_closed_form_check(&[c(0.3, 0.0), c(0.6, 0.0)], &disk_points(50, 0.9), 400));
    col.one("kt_sstar_identity", || kt::sstar_check(&disk_points(50, 0.9), 200));
    col.one("kt_eigen_points", || kt::eigen_points_check(&[0.3, 0.5], n, &disk_points(20, 0.5)));
    col.one("binomial_gamma_ratio", || Ok(kt::binomial_gamma_check(c(0.3, 0.2), 50)));
    col.one("pullback_norm", || Ok(kt::pullback_norm_check(&[10_000, 100_000, 1_000_000])));
    col.one("u_alpha_origin", || kt::u_alpha_origin_check(1.0));
    col.one("u_alpha_zero_free", || kt::u_alpha_zero_free_check(1.0, &disk_points(400, 0.8)));
    col.one("u_alpha_not_in_h2", || kt::u_alpha_growth_check(1.0, &[2, 3, 4, 5]));
}

fn subspace(cfg: &SuiteConfig, col: &mut Collector) {
    let n = cfg.n.unwrap_or(100_000);
    for (name, mu, j, order) in [
        ("cstar_powerlog_eigen_polynomial", c(1.0, 0.0), 0, 64),
        ("cstar_powerlog_eigen", c(0.5, 0.0), 0, n),
        ("cstar_powerlog_jordan", c(0.5, 0.0), 1, n),
    ] {
        col.one(name, || sl::powerlog_image_check(PowerLogParams::new(mu, j)?, order));
    }
    col.one("span_invariance", || {
        let two = sl::SubspaceBasis::power_log(c(0.5, 0.0), 1, n)?;
        let r = sl::invariance_residual_span(&two, n)?;
        let bad = sl::SubspaceBasis::new(
            vec![power_series(c(0.5, 0.0), n), CoeffFun::monomial(1, n)],
            vec![sl::MemberLabel::PowerLog(PowerLogParams::new(c(0.5, 0.0), 0)?), sl::MemberLabel::Other { decay: 1.0 }],
        );
        let rb = sl::invariance_residual_span(&bad, n)?;
        Ok(CheckReport::new("span_invariance", "span{(1 - z)^mu, (1 - z)^mu log(1 - z)} is C*-invariant", Provenance::Reference)
            .param("N", n)
            .computed(vec![r.max_relative, rb.max_relative])
            .tolerance(r.tail_tolerance)
            .note("second value: span{(1 - z)^0.5, z}, which must stay >= 1e-2")
            .pass(r.max_relative <= r.tail_tolerance && rb.max_relative >= 1e-2))
    });
    col.one("jordan_structure", || sl::jordan_check(c(0.5, 0.0), 1, n));
    col.one("b_r_classifier", sl::classifier_check);
    col.one("division_reconstruction", || {
        let g = power_series(c(0.5, 0.3), 4096);
        let worst = [c(0.5, 0.0), c(-0.3, 0.8), c(0.0, 0.0)]
            .iter()
            .map(|l| sl::division_reconstruction_error(&g, *l))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(CheckReport::new("division_reconstruction", "(z - lambda) Q_lambda f + f(lambda) = f", Provenance::Trivial)
            .param("N", 4096)
            .computed(vec![worst])
            .tolerance(1e-14)
            .judge_at_most())
    });
    col.one("pn_density", || {
        let mut worst = 0.0f64;
        for k in [0, 3, 10] {
            for m in [1, 7, 100, 1000] {
                let d = sl::pn_density_check(&CoeffFun::monomial(k, k + 1), m)?;
                worst = worst.max((d - 1.0 / (m as f64).sqrt()).abs());
            }
        }
        Ok(CheckReport::new("pn_density", "|p_n z^k - z^k| = n^{-1/2}", Provenance::Derived)
            .computed(vec![worst])
            .tolerance(1e-15)
            .judge_at_most())
    });
    use sl::ProbeVerdict::{Member, Stagnating};
    for (k, ell, expect) in [(1, 4, Stagnating), (4, 4, Stagnating), (7, 4, Member), (4, 1, Member)] {
        let name = format!("chain_probe_k{k}_ell{ell}");
        col.one(&name, || sl::chain_membership_probe(k, ell, n, 40, expect));
    }
}

fn chain(col: &mut Collector) {
    for lambda in [1.0, 2.0] {
        for k in [0, 1] {
            let tag = format!("l{lambda}_k{k}");
            col.run(&format!("chain_{tag}"), || {
                let pair = hp::chain_test_pair(c(lambda, 0.0), k)?;
                let mut out: Vec<CheckReport> = hp::verify_chain(&pair, 24)?
                    .into_iter()
                    .map(|r| {
                        let name = format!("{}_{tag}", r.name);
                        rename(r, &name)
                    })
                    .collect();
                let iso = hp::isometry_check(&pair, 1e-10)?;
                out.push(rename(iso, &format!("chain_isometry_{tag}")));
                Ok(out)
            });
        }
    }
    col.one("gamma_identity", || hp::gamma_identity_check(&[c(1.0, 0.0), c(2.0, 0.0), c(0.3, 0.5)], 24));
    col.one("hp_basis_gram", || hp::hp_gram_check(8, 1e-9));
    col.one("b_resolvent", || hp::resolvent_check(&disk_points(24, 0.9).iter().map(|z| hp::cayley_to_half_plane(*z)).collect::<Vec<_>>()));
    col.one("w_conjugation", || {
        let f = hp::SampledFun::sample(&|y: f64| c((-(y * y)).exp(), 0.3 * y), -3.0, 3.0, 601);
        Ok(hp::conjugation_check(&f, 0.5))
    });
    col.one("flow_generator", || hp::generator_check(&CoeffFun::from_real(&[1.0, -0.5, 0.25, 0.125]), 1e-5));
}
