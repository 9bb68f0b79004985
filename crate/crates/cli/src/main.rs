//! `cesaro`: batch front end for the verification suites and parameter sweeps.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 bad configuration or
//! any other error.

mod cache;
mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use cesaro_core::cesaro_ops::smin_resolvent_with;
use cesaro_core::kriete_trutt::{self as kt, KTPoint};
use cesaro_core::model_spaces::{self as ms, BoundaryGrid, InnerFunctionSpec, InvarianceStats};
use cesaro_core::sobol::disk_points;
use cesaro_core::subspace_lab::{self as sl, LambdaSequence};
use cesaro_core::{run_suite, CheckReport, Error as CoreError, Suite, SuiteConfig, Summary};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use cache::Cache;

#[derive(Parser, Debug)]
#[command(name = "cesaro", version, about = "Numerical checks for the Cesaro operator on H^2")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Truncation order N (each command has its own default).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Grid resolution: boundary grid M for verify/invariance, points per axis for spectrum.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true, default_value_t = 0x5EED)]
    seed: u64,
    /// Multiplies every check tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    /// Output directory. verify prints its report to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cache directory; overrides CESARO_CACHE_DIR.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value = "all")]
    suite: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run a verification suite and write the JSON report.
    Verify {
        /// Mass of the atom at 1 for the model suite.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Real part x of the negative-control atom, placed at x + i sqrt(1 - x^2).
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        neg_control: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// smin(C_N - lambda) over a grid (CSV and SVG) or at given points.
    Spectrum {
        #[arg(long, default_value = "-0.5:2.5", allow_hyphen_values = true)]
        re: Range,
        #[arg(long, default_value = "-1.5:1.5", allow_hyphen_values = true)]
        im: Range,
        /// Evaluate only these points (`re` or `re,im`); no SVG is written.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Vec<Point>,
    },
    /// Principal angles between the Krylov space of g_alpha and a kernel space.
    Cyclic {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 64)]
        krylov: usize,
        #[arg(long, default_value_t = 30)]
        points: usize,
        #[arg(long, default_value_t = 0.7)]
        radius: f64,
    },
    /// Invariance residual of (u H^2)^perp under C for a single-atom inner function.
    Invariance {
        /// `x:mass`, atom at x + i sqrt(1 - x^2); x = 1 is the atom at 1.
        #[arg(long, default_value = "1:1.0", allow_hyphen_values = true)]
        atom: Atom,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// U_alpha on a polar grid of the disc.
    Kt {
        #[arg(long, default_value_t = 1.0)]
        ualpha: f64,
        /// `radius:count`, count radii by count angles.
        #[arg(long, default_value = "0.8:33")]
        wgrid: WGrid,
    },
    /// Jordan block, span invariance and b_r classification.
    Subspace {
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        mu: Point,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
}

#[derive(Clone, Copy, Debug)]
struct Range(f64, f64);

impl FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let lo: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let hi: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("range {s:?} must satisfy lo < hi"));
        }
        Ok(Range(lo, hi))
    }
}

#[derive(Clone, Copy, Debug)]
struct Point(Complex64);

impl FromStr for Point {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (re, im) = match s.split_once(',') {
            Some((a, b)) => (a, b),
            None => (s, "0"),
        };
        let re: f64 = re.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        let im: f64 = im.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(format!("{s:?} is not finite"));
        }
        Ok(Point(Complex64::new(re, im)))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Atom {
    x: f64,
    mass: f64,
}

impl FromStr for Atom {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected x:mass, got {s:?}"))?;
        let x: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let mass: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if !(-1.0..=1.0).contains(&x) || !(mass > 0.0 && mass.is_finite()) {
            return Err(format!("atom {s:?} needs x in [-1, 1] and mass > 0"));
        }
        Ok(Atom { x, mass })
    }
}

impl Atom {
    fn location(&self) -> Complex64 {
        Complex64::new(self.x, (1.0 - self.x * self.x).max(0.0).sqrt())
    }
}

#[derive(Clone, Copy, Debug)]
struct WGrid {
    radius: f64,
    count: usize,
}

impl FromStr for WGrid {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected radius:count, got {s:?}"))?;
        let radius: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let count: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if !(radius > 0.0 && radius < 1.0) || count < 2 {
            return Err(format!("wgrid {s:?} needs 0 < radius < 1 and count >= 2"));
        }
        Ok(WGrid { radius, count })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Ok(all_pass); sweeps without a pass criterion return Ok(true).
fn run(cli: Cli) -> Result<bool> {
    let c = cli.common;
    if !(c.tol_scale > 0.0 && c.tol_scale.is_finite()) {
        bail!("tol-scale must be positive");
    }
    let cache = Cache::new(c.cache_dir.clone());
    match cli.cmd {
        Cmd::Verify { alpha, neg_control, trials } => verify(&c, alpha, neg_control, trials),
        Cmd::Spectrum { re, im, lambda } => spectrum(&c, re, im, &lambda),
        Cmd::Cyclic { alpha, krylov, points, radius } => cyclic(&c, &cache, alpha, krylov, points, radius),
        Cmd::Invariance { atom, trials } => invariance(&c, &cache, atom, trials),
        Cmd::Kt { ualpha, wgrid } => kt_sweep(&c, ualpha, wgrid),
        Cmd::Subspace { mu, k } => subspace(&c, mu.0, k),
    }
}

/// Report layout; `timing` holds everything that changes between identical runs.
#[derive(Serialize)]
struct VerifyReport<'a> {
    suite: Suite,
    seed: u64,
    config: &'a SuiteConfig,
    checks: &'a [CheckReport],
    summary: Summary,
    timing: Value,
}

fn verify(c: &Common, alpha: f64, neg_control: f64, trials: usize) -> Result<bool> {
    let suite: Suite = c.suite.parse()?;
    let cfg = SuiteConfig { suite, n: c.n, grid: c.grid, seed: c.seed, tol_scale: c.tol_scale, alpha, neg_control, trials };
    cfg.validate()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let t0 = Instant::now();
    let run = run_suite(&cfg)?;
    let report = VerifyReport {
        suite,
        seed: c.seed,
        config: &cfg,
        checks: &run.checks,
        summary: run.summary(),
        timing: json!({
            "started_unix": started,
            "wall_seconds": t0.elapsed().as_secs_f64(),
            "checks": run.timing,
        }),
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &c.out {
        Some(dir) => {
            let path = out_file(dir, &format!("verify_{suite}.json"))?;
            fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    let s = &report.summary;
    eprintln!("{}: {}/{} checks pass", suite, s.passed, s.total);
    for name in &s.failed {
        eprintln!("  FAILED {name}");
    }
    Ok(run.all_pass())
}

fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

fn out_dir(c: &Common) -> PathBuf {
    c.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<()> {
    let path = out_file(dir, name)?;
    let text = serde_json::to_string_pretty(v)? + "\n";
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    print!("{text}");
    Ok(())
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    let path = out_file(dir, name)?;
    csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))
}

/// smin with a capped iteration count: a non-converged estimate is still a
/// usable pixel, and a diagonal hit is exactly zero.
fn smin_pixel(lambda: Complex64, n: usize) -> Result<f64> {
    match smin_resolvent_with(lambda, n, 2_000) {
        Ok(v) => Ok(v),
        Err(CoreError::ExactlySingular { .. }) => Ok(0.0),
        Err(CoreError::NonConvergence { estimate, .. }) => Ok(estimate),
        Err(e) => Err(e.into()),
    }
}

fn spectrum(c: &Common, re: Range, im: Range, lambdas: &[Point]) -> Result<bool> {
    let n = c.n.unwrap_or(256);
    let dir = out_dir(c);
    let mut w = csv_writer(&dir, "spectrum.csv")?;
    w.write_record(["re", "im", "smin"])?;
    if !lambdas.is_empty() {
        let mut rows = Vec::new();
        for p in lambdas {
            let s = smin_pixel(p.0, n)?;
            w.serialize((p.0.re, p.0.im, s))?;
            rows.push(json!({"re": p.0.re, "im": p.0.im, "smin": s, "dist_to_spectrum": ((p.0 - 1.0).norm() - 1.0).max(0.0)}));
        }
        w.flush()?;
        write_json(&dir, "spectrum.json", &json!({"N": n, "points": rows}))?;
        return Ok(true);
    }
    let g = c.grid.unwrap_or(41);
    if g < 2 {
        bail!("spectrum grid needs at least 2 points per axis");
    }
    let step = |r: Range, i: usize| r.0 + (r.1 - r.0) * i as f64 / (g - 1) as f64;
    let mut values = Vec::with_capacity(g * g);
    for j in 0..g {
        for i in 0..g {
            let z = Complex64::new(step(re, i), step(im, j));
            let s = smin_pixel(z, n)?;
            w.serialize((z.re, z.im, s))?;
            values.push(s);
        }
    }
    w.flush()?;
    let half = |r: Range| (r.1 - r.0) / (2 * (g - 1)) as f64;
    let map = svg::HeatMap {
        re: (re.0 - half(re), re.1 + half(re)),
        im: (im.0 - half(im), im.1 + half(im)),
        nx: g,
        ny: g,
        values: &values,
    };
    fs::write(out_file(&dir, "spectrum.svg")?, svg::render(&map))?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    write_json(&dir, "spectrum.json", &json!({"N": n, "grid": g, "re": [re.0, re.1], "im": [im.0, im.1], "smin_min": min, "smin_max": max}))?;
    Ok(true)
}

fn cyclic(c: &Common, cache: &Cache, alpha: f64, m: usize, count: usize, radius: f64) -> Result<bool> {
    let n = c.n.unwrap_or(4096);
    if !(alpha > 0.0) || m == 0 || count == 0 || !(radius > 0.0 && radius < 1.0) {
        bail!("cyclic needs alpha > 0, krylov >= 1, points >= 1, 0 < radius < 1");
    }
    let params = json!({"alpha": alpha, "krylov": m, "points": count, "radius": radius, "N": n});
    let angles: Vec<f64> = cache.get_or_compute("cyclic", &params, || {
        let spec = InnerFunctionSpec::u_alpha(alpha)?;
        let pts = disk_points(count, radius);
        Ok(ms::krylov_angles(&ms::g_alpha(alpha, n), m, &spec, &pts, n)?)
    })?;
    let dir = out_dir(c);
    let mut w = csv_writer(&dir, "cyclic.csv")?;
    w.write_record(["index", "angle"])?;
    for (i, a) in angles.iter().enumerate() {
        w.serialize((i, a))?;
    }
    w.flush()?;
    let largest = angles.iter().copied().fold(0.0, f64::max);
    write_json(&dir, "cyclic.json", &json!({"params": params, "largest_angle": largest, "count": angles.len()}))?;
    Ok(true)
}

fn invariance(c: &Common, cache: &Cache, atom: Atom, trials: usize) -> Result<bool> {
    let n = c.n.unwrap_or(512);
    let m = c.grid.unwrap_or(1 << 14);
    if trials == 0 {
        bail!("trials must be positive");
    }
    let grid = BoundaryGrid::new(m)?;
    let spec = InnerFunctionSpec::atom(atom.location(), atom.mass)?;
    let params = json!({"atom": atom, "N": n, "M": m, "trials": trials, "seed": c.seed});
    let stats: InvarianceStats = cache.get_or_compute("invariance", &params, || {
        Ok(ms::invariance_residual(&spec, trials, n, grid, c.seed)?)
    })?;
    let dir = out_dir(c);
    let mut w = csv_writer(&dir, "invariance.csv")?;
    w.write_record(["trial", "residual"])?;
    for (i, r) in stats.residuals.iter().enumerate() {
        w.serialize((i, r))?;
    }
    w.flush()?;
    write_json(&dir, "invariance.json", &json!({"params": params, "median": stats.median, "max": stats.max}))?;
    Ok(true)
}

fn kt_sweep(c: &Common, alpha: f64, wg: WGrid) -> Result<bool> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        bail!("ualpha must be positive");
    }
    let dir = out_dir(c);
    let mut w = csv_writer(&dir, "kt.csv")?;
    w.write_record(["re", "im", "u_re", "u_im", "abs"])?;
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..wg.count {
        let r = wg.radius * i as f64 / (wg.count - 1) as f64;
        let angles = if i == 0 { 1 } else { wg.count };
        for j in 0..angles {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / wg.count as f64);
            let u = kt::u_alpha(alpha, KTPoint::new(z)?)?;
            w.serialize((z.re, z.im, u.re, u.im, u.norm()))?;
            if u.norm() < best.0 {
                best = (u.norm(), z);
            }
        }
    }
    w.flush()?;
    let origin = kt::u_alpha(alpha, KTPoint::new(Complex64::new(0.0, 0.0))?)?;
    write_json(
        &dir,
        "kt.json",
        &json!({
            "alpha": alpha,
            "radius": wg.radius,
            "count": wg.count,
            "grid_min": best.0,
            "grid_min_at": [best.1.re, best.1.im],
            "u_at_origin": [origin.re, origin.im],
            "expected_origin": 1.0 - (-alpha).exp(),
        }),
    )?;
    Ok(true)
}

fn subspace(c: &Common, mu: Complex64, k: usize) -> Result<bool> {
    let n = c.n.unwrap_or(100_000);
    if !(mu.re > -0.5) {
        bail!("mu needs Re mu > -1/2");
    }
    let dir = out_dir(c);
    let jordan = sl::jordan_check(mu, k, n)?;
    let basis = sl::SubspaceBasis::power_log(mu, k, n)?;
    let span = sl::invariance_residual_span(&basis, n)?;
    let rep = sl::representation_matrix(&basis, n)?;
    let mut w = csv_writer(&dir, "subspace_jordan.csv")?;
    w.write_record(["row", "col", "re", "im"])?;
    for i in 0..rep.nrows() {
        for j in 0..rep.ncols() {
            w.serialize((i, j, rep[(i, j)].re, rep[(i, j)].im))?;
        }
    }
    w.flush()?;

    let rs = sl::log_grid(1e4, 1e6, 21);
    let cases: [(&str, LambdaSequence, f64); 4] = [
        ("lambda1_a0.45", LambdaSequence::lambda_k(1), 0.45),
        ("lambda1_a0.3", LambdaSequence::lambda_k(1), 0.3),
        ("lambda1_a0.5", LambdaSequence::lambda_k(1), 0.5),
        ("integers_a1", LambdaSequence::integers(), 1.0),
    ];
    let mut classes = BTreeMap::new();
    let mut cols = Vec::new();
    for (label, seq, a) in &cases {
        let cl = sl::classify_b_r(seq, *a, &rs)?;
        classes.insert(*label, json!({"behavior": cl.behavior, "slope": cl.slope}));
        cols.push(cl.values);
    }
    let mut w = csv_writer(&dir, "subspace_b_r.csv")?;
    let mut header = vec!["r".to_string()];
    header.extend(cases.iter().map(|c| c.0.to_string()));
    w.write_record(&header)?;
    for (i, r) in rs.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(cols.iter().map(|col| col[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    write_json(
        &dir,
        "subspace.json",
        &json!({
            "mu": [mu.re, mu.im],
            "k": k,
            "N": n,
            "jordan": jordan,
            "span": {"max_relative": span.max_relative, "tail_tolerance": span.tail_tolerance, "rank": span.rank},
            "b_r": classes,
        }),
    )?;
    Ok(jordan.pass && span.max_relative <= span.tail_tolerance)
}
