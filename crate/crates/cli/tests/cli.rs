use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kakeya-lab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn full_space_file(dir: &Path) -> std::path::PathBuf {
    let mut text = String::from("# all of R^2 for q=2, k=2\n");
    for a in ["00", "01", "10", "11"] {
        for b in ["00", "01", "10", "11"] {
            text.push_str(&format!("{a},{b}\n"));
        }
    }
    let p = dir.join("full_space.pts");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn exhaustive_sz_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &["sz-verify", "--q", "2", "--k", "2", "--n", "1", "--theta", "1", "--exhaustive", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["schema"], "kakeya-lab/report-v1");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["results"]["exhaustive"]["cases"], 4095);
    assert_eq!(r["results"]["exhaustive"]["failures"], 0);
    assert_eq!(r["config"]["params"]["theta"], "1");
}

#[test]
fn covering_on_the_full_space() {
    let dir = tempfile::tempdir().unwrap();
    full_space_file(dir.path());
    let out = lab(
        dir.path(),
        &["covering", "--q", "2", "--k", "2", "--n", "2", "--input", "full_space.pts", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&dir.path().join("r.json"))["results"]["report"].clone();
    assert_eq!((r["size"].as_u64(), r["bound"].as_u64(), r["pass"].as_bool()), (Some(16), Some(1), Some(true)));
}

#[test]
fn lt_selftest_at_q2_k3() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["lt-selftest", "--q", "2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let s = &r["results"]["reports"][0];
    for key in
        ["commutation", "residue", "series_agreement", "orbit_closed_under_addition", "orbit_annihilated", "pass"]
    {
        assert_eq!(s[key], true, "{key}");
    }
    assert_eq!(s["order_of_zeta1"], 3);
    assert_eq!(s["newton_value"], "1/4");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "q = 3\nk = 1\nn = 2\nepsilon = \"1/2\"\nseed = 4\n").unwrap();
    let out = lab(dir.path(), &["covering", "--config", "c.toml", "--q", "2", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let p = report(&dir.path().join("r.json"))["config"]["params"].clone();
    assert_eq!((p["q"].as_u64(), p["k"].as_u64(), p["seed"].as_u64()), (Some(2), Some(1), Some(4)));
    assert_eq!(p["epsilon"], "1/2");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(lab(dir.path(), &["covering", "--config", "bad.toml"]).status.code(), Some(2));
    assert_eq!(lab(dir.path(), &["covering", "--config", "missing.toml"]).status.code(), Some(2));
    assert_eq!(lab(dir.path(), &["covering", "--epsilon", "2/0"]).status.code(), Some(2));
    assert_eq!(lab(dir.path(), &["covering", "--epsilon", "3/2"]).status.code(), Some(2));
    assert_eq!(lab(dir.path(), &["replay"]).status.code(), Some(2));
    assert_eq!(lab(dir.path(), &["sz-verify", "--n", "2", "--exhaustive"]).status.code(), Some(2));
}

#[test]
fn budget_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["min-kakeya", "--q", "3", "--k", "2", "--n", "2", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["status"], "error");
    assert!(r["error"].as_str().unwrap().contains("budget"));
    assert_eq!(lab(dir.path(), &["covering", "--q", "9", "--k", "9", "--n", "3"]).status.code(), Some(3));
}

#[test]
fn tampered_trace_is_a_violation_with_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        lab(dir.path(), &["proof-trace", "--adversarial", "4", "--epsilon", "1/2", "--seed", "2", "--out", "t.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut t = report(&dir.path().join("t.json"));
    assert!(t["results"]["replay"]["ok"].as_bool().unwrap());

    let replayed = lab(dir.path(), &["replay", "--input", "t.json", "--out", "ok.json"]);
    assert_eq!(replayed.status.code(), Some(0));

    t["results"]["trace"]["verdict"] = serde_json::json!({ "kind": "terminated_at_size_test" });
    std::fs::write(dir.path().join("bad.json"), t.to_string()).unwrap();
    let out = lab(dir.path(), &["replay", "--input", "bad.json", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(&dir.path().join("r.json"));
    assert_eq!(r["status"], "violation");
    let dump = report(&dir.path().join("r.violation.json"));
    assert!(!dump["violations"].as_array().unwrap().is_empty());
}

#[test]
fn dry_run_validates_without_computing() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["lt-selftest", "sz-verify", "covering", "min-kakeya", "maximal-dist", "maximal-norm", "proof-trace"] {
        let out = lab(dir.path(), &[cmd, "--dry-run"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["results"]["dry_run"], true, "{cmd}");
    }
    // budgets are still enforced
    assert_eq!(lab(dir.path(), &["min-kakeya", "--q", "3", "--k", "2", "--dry-run"]).status.code(), Some(3));
}

#[test]
fn maximal_csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["maximal-dist", "--k-values", "1,2", "--trials", "5", "--csv", "d.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,k,n,trial,j,lambda,lhs,rhs,ratio,seed"));
    // (2k + 1) λ values per trial
    assert_eq!(lines.count(), 5 * 3 + 5 * 5);

    let out = lab(dir.path(), &["maximal-norm", "--k-values", "1,2", "--trials", "5", "--out", "n.json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("n.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("q,k,n,trials,max_distribution_ratio,max_norm_ratio,lower_bound_failures"));
}

#[test]
fn repeated_runs_agree_outside_timing_fields() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |name: &str| {
        let mut v = report(&dir.path().join(name));
        v["wall_time_ms"] = Value::Null;
        v["timestamp"] = Value::Null;
        v["config"]["params"]["out"] = Value::Null;
        v
    };
    for (i, args) in [
        vec!["proof-trace", "--seed", "5"],
        vec!["sz-verify", "--q", "3", "--k", "1", "--n", "2", "--trials", "50", "--seed", "9"],
        vec!["min-kakeya"],
    ]
    .iter()
    .enumerate()
    {
        for run in ["a", "b"] {
            let name = format!("{i}{run}.json");
            let mut full = args.clone();
            full.extend(["--out", name.as_str()]);
            assert_eq!(lab(dir.path(), &full).status.code(), Some(0));
        }
        assert_eq!(strip(&format!("{i}a.json")), strip(&format!("{i}b.json")));
    }
}
