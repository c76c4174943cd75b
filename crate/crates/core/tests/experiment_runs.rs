mod common;

use std::path::PathBuf;

use common::naive_pattern_density;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumset_lab::experiments::{
    build_sets, run_experiment, verify_report, ExperimentConfig, ExperimentReport, FINITE_PROXY_NOTE,
};
use sumset_lab::progressions::EntryStatus;

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn toml(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

fn verdict(rep: &ExperimentReport, name: &str) -> bool {
    rep.verdicts.iter().find(|v| v.name == name).unwrap_or_else(|| panic!("no verdict {name}")).passed
}

#[test]
fn all_ones_b_passes_everything() {
    let cfg = toml(
        r#"
name = "ones"
kind = "sumset_recurrence"
window = 65536
m = 4095
epsilon = 0.1
set_a = { kind = "family", family = "primes", j = 50 }
set_b = { kind = "all_ones" }
scan = { n_lo = 1, n_hi = 300 }
"#,
    );
    let rep = run_experiment(&cfg).unwrap();
    let scan = &rep.scans["main"];
    assert_eq!(scan.passing.len(), 300);
    assert_eq!(scan.max_gap, 1);
    assert!(rep.all_pass());
    assert!(rep.notes.iter().any(|n| n == FINITE_PROXY_NOTE));
}

#[test]
fn flagship_spot_checks_against_naive_counts() {
    let cfg = config("flagship.toml");
    let rep = run_experiment(&cfg).unwrap();
    assert!(rep.all_pass());
    let scan = &rep.scans["main"];
    assert!(scan.relative_frequency > 0.5 && scan.max_gap <= 100);

    let (_, _, e) = build_sets(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ok: Vec<_> = scan.per_n_density.iter().filter(|x| x.status == EntryStatus::Ok).collect();
    for _ in 0..10 {
        let entry = ok[(rng.next_u64() % ok.len() as u64) as usize];
        let n = entry.n;
        let naive = naive_pattern_density(&e, &[0, n, 2 * n], cfg.m);
        assert!((naive - entry.density).abs() < 1e-12, "n={n}: {naive} vs {}", entry.density);
        assert_eq!(scan.passing.binary_search(&n).is_ok(), naive >= cfg.recurrence_threshold());
    }
}

#[test]
fn structured_flagship_passes() {
    let rep = run_experiment(&config("flagship_structured.toml")).unwrap();
    assert!(!rep.scans["main"].passing.is_empty());
    assert!(rep.all_pass());
}

#[test]
fn near_theorem_reports_bohr_overlap() {
    let rep = run_experiment(&config("near_theorem.toml")).unwrap();
    assert!(verdict(&rep, "passing set nonempty"));
    for key in ["overlap_of_passing", "overlap_of_bohr"] {
        let v = rep.values[key];
        assert!((0.0..=1.0).contains(&v), "{key}={v}");
    }
}

#[test]
fn near_theorem_singleton_a_is_a_control() {
    let cfg = toml(
        r#"
name = "single"
kind = "near_theorem"
seed = 5
window = 65536
m = 4095
delta = 0.3
epsilon = 0.05
set_a = { kind = "explicit", elements = [0] }
set_b = { kind = "bernoulli", density = 0.3 }
scan = { n_lo = 1, n_hi = 200 }
"#,
    );
    let rep = run_experiment(&cfg).unwrap();
    // three-term counts of a density 0.3 random set sit near 0.027, well below δ - ε
    assert!(rep.scans["main"].passing.is_empty());
    assert!(!verdict(&rep, "passing set nonempty"));
    assert!(verdict(&rep, "canary: all-ones B passes every n"));
}

#[test]
fn equidist_and_dynamics_reports_pass() {
    for name in ["equidist.toml", "dynamics.toml"] {
        let rep = run_experiment(&config(name)).unwrap();
        for v in &rep.verdicts {
            assert!(v.passed, "{name}: {}", v.name);
        }
        assert!(verify_report(&rep).unwrap().all_pass());
    }
}

#[test]
fn runs_are_reproducible() {
    let cfg = config("near_theorem.toml");
    let a = run_experiment(&cfg).unwrap().to_json_without_timings().unwrap();
    let b = run_experiment(&cfg).unwrap().to_json_without_timings().unwrap();
    assert_eq!(a, b);
    let back = ExperimentReport::from_json(&a).unwrap();
    assert_eq!(back.to_json_without_timings().unwrap(), a);
}

#[test]
fn verify_detects_tampering() {
    let rep = run_experiment(&config("near_theorem.toml")).unwrap();
    assert!(verify_report(&rep).unwrap().mismatches.is_empty());

    let mut forged = rep.clone();
    forged.scans.get_mut("main").unwrap().passing.clear();
    assert!(!verify_report(&forged).unwrap().mismatches.is_empty());

    let mut forged = rep.clone();
    let v = forged.verdicts.iter_mut().find(|v| v.name == "passing set nonempty").unwrap();
    v.passed = !v.passed;
    assert!(!verify_report(&forged).unwrap().all_pass());

    let mut forged = rep.clone();
    for e in &mut forged.scans.get_mut("main").unwrap().per_n_density {
        e.density = 0.0;
    }
    assert!(!verify_report(&forged).unwrap().all_pass());
}

#[test]
fn config_validation() {
    let bad_field = "name = \"x\"\nkind = \"sumset_recurrence\"\nwindoww = 10\n";
    assert!(ExperimentConfig::from_toml(bad_field).is_err());
    let bad_eps = "name = \"x\"\nkind = \"sumset_recurrence\"\nepsilon = 1.5\n";
    assert!(ExperimentConfig::from_toml(bad_eps).is_err());
    let bad_kind = "name = \"x\"\nkind = \"nope\"\n";
    assert!(ExperimentConfig::from_toml(bad_kind).is_err());
    let cfg = toml("name = \"x\"\nkind = \"sumset_recurrence\"\n");
    assert_eq!(cfg.window, 1 << 20);
    assert!((cfg.recurrence_threshold() - 0.095).abs() < 1e-12);
}

#[test]
fn relative_paths_follow_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.toml");
    std::fs::write(&cfg_path, "name = \"x\"\nkind = \"sumset_recurrence\"\n[output]\nreport = \"res/r.json\"\n").unwrap();
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.output.report.unwrap(), dir.path().join("res/r.json"));
}
