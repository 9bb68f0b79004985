use cesaro_core::{run_suite, Suite, SuiteConfig};

fn cfg(suite: Suite) -> SuiteConfig {
    SuiteConfig { suite, ..Default::default() }
}

#[test]
fn chain_suite_passes() {
    let run = run_suite(&cfg(Suite::Chain)).unwrap();
    assert!(run.all_pass(), "{:?}", run.summary().failed);
    assert_eq!(run.summary().total, run.checks.len());
}

#[test]
fn kt_suite_is_deterministic() {
    let a = run_suite(&cfg(Suite::Kt)).unwrap();
    let b = run_suite(&cfg(Suite::Kt)).unwrap();
    assert_eq!(serde_json::to_string(&a.checks).unwrap(), serde_json::to_string(&b.checks).unwrap());
    assert!(a.all_pass(), "{:?}", a.summary().failed);
}

#[test]
fn checks_are_sorted_and_carry_params() {
    let run = run_suite(&cfg(Suite::Subspace)).unwrap();
    let names: Vec<_> = run.checks.iter().map(|c| c.name.clone()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(run.checks.iter().filter(|c| c.name.starts_with("chain_probe")).all(|c| c.params.contains_key("N")));
    assert_eq!(run.timing.len(), run.checks.len());
}

#[test]
fn tol_scale_rescales_tolerances() {
    let base = run_suite(&cfg(Suite::Chain)).unwrap();
    let loose = run_suite(&SuiteConfig { tol_scale: 10.0, ..cfg(Suite::Chain) }).unwrap();
    let g0 = base.get("gamma_identity").unwrap();
    let g1 = loose.get("gamma_identity").unwrap();
    assert!((g1.tolerance - 10.0 * g0.tolerance).abs() <= 1e-20);
    assert_eq!(g0.computed, g1.computed);
}

#[test]
fn outside_spectrum_band_is_a_recorded_failure() {
    // smin(C_N - 2.5) decreases toward 1/2 far too slowly for the [0.4, 0.6]
    // band at N = 2048; the check reports that instead of hiding it
    let run = run_suite(&cfg(Suite::Core)).unwrap();
    let c = run.get("smin_outside_spectrum").unwrap();
    assert!(!c.pass);
    assert!(c.computed.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(run.summary().failed, vec!["smin_outside_spectrum".to_string()]);
}
