//! End-to-end tests of the `varbai` binary. Golden files live in `tests/golden`;
//! set `VARBAI_UPDATE_GOLDEN=1` to rewrite them.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn here(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

fn varbai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varbai")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str, actual: &[u8]) {
    let path = here(&format!("golden/{name}"));
    if std::env::var_os("VARBAI_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(expected == actual, "{name} differs from golden file:\n{}", String::from_utf8_lossy(actual));
}

fn ok(o: &Output) {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
}

#[test]
fn hardness_text_golden() {
    let bern3 = here("fixtures/bern3.toml");
    let o = varbai(&["hardness", "--instance", bern3.to_str().unwrap(), "--delta", "0.1"]);
    ok(&o);
    golden("hardness_bern3.txt", &o.stdout);
    assert!(stdout(&o).contains("h_va                    113.894628"));
}

#[test]
fn hardness_json_golden() {
    let o = varbai(&["hardness", "--catalog", "1a", "--j", "0", "--format", "json"]);
    ok(&o);
    golden("hardness_1a_j0.json", &o.stdout);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let report = &v["instances"][0]["report"];
    assert_eq!(report["h_va"].as_f64().unwrap().round(), 80288.0);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn infeasible_instance_omits_h1() {
    let o = varbai(&["hardness", "--catalog", "3", "--j", "2"]);
    ok(&o);
    assert!(!stdout(&o).contains("h1"));
    let o = varbai(&["hardness", "--catalog", "3", "--j", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["instances"][0]["report"]["h1"].is_null());
}

#[test]
fn catalog_list_golden() {
    let o = varbai(&["catalog", "list"]);
    ok(&o);
    golden("catalog_list.txt", &o.stdout);
    let o = varbai(&["catalog", "describe", "cmp", "--j", "10"]);
    ok(&o);
    golden("describe_cmp_j10.txt", &o.stdout);
}

#[test]
fn run_outputs_golden_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let bern3 = here("fixtures/bern3.toml");
    let run = |tag: &str, parallel: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let o = varbai(&[
            "run",
            "--instance",
            bern3.to_str().unwrap(),
            "--algo",
            "valucb,va_uniform",
            "--trials",
            "4",
            "--delta",
            "0.1",
            "--seed",
            "7",
            "--parallel",
            parallel,
            "--csv",
            csv.to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
        ]);
        ok(&o);
        assert_eq!(stdout(&o).lines().count(), 2);
        (std::fs::read(csv).unwrap(), std::fs::read(json).unwrap())
    };
    let (csv_a, json_a) = run("a", "1");
    let (csv_b, json_b) = run("b", "1");
    let (csv_c, json_c) = run("c", "2");
    assert_eq!(csv_a, csv_b);
    assert_eq!(csv_a, csv_c);
    assert_eq!(json_a, json_b);
    assert_eq!(json_a, json_c);
    golden("run_bern3.csv", &csv_a);
    golden("run_bern3.json", &json_a);
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().next(), Some("algorithm,case,j,trial,seed,tau,time_steps,success"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn run_all_j_yields_one_aggregate_per_entry() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("agg.json");
    let o = varbai(&[
        "run",
        "--catalog",
        "1a",
        "--all-j",
        "--trials",
        "1",
        "--seed",
        "7",
        "--json",
        json.to_str().unwrap(),
    ]);
    ok(&o);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(v["aggregates"].as_array().unwrap().len(), 11);
}

#[test]
fn subgaussian_run_from_json_instance() {
    let gauss = here("fixtures/gauss2.json");
    let o = varbai(&[
        "run",
        "--instance",
        gauss.to_str().unwrap(),
        "--algo",
        "valucb_subg",
        "--trials",
        "3",
        "--delta",
        "0.1",
        "--seed",
        "1",
    ]);
    ok(&o);
    assert!(stdout(&o).contains("valucb_subg gauss2: trials=3"));
    assert!(stdout(&o).contains("success=1.000"));
    let o = varbai(&["run", "--instance", gauss.to_str().unwrap(), "--algo", "valucb", "--trials", "1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unbounded arm"));
}

#[test]
fn capped_trials_are_reported_not_fatal() {
    let o = varbai(&["run", "--catalog", "1a", "--j", "0", "--trials", "2", "--seed", "3", "--max-time-steps", "5"]);
    ok(&o);
    assert!(stdout(&o).contains("success=0.000 capped=2"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let bad = here("fixtures/bad_moments.toml");
    let bern3 = here("fixtures/bern3.toml");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["run", "--catalog", "1a", "--j", "1"], "--seed"),
        (vec!["verify"], "--seed"),
        (vec!["run", "--catalog", "9q", "--j", "1", "--seed", "1"], "unknown catalog entry"),
        (vec!["run", "--catalog", "cmp", "--j", "0", "--seed", "1"], "unknown catalog entry"),
        (vec!["run", "--catalog", "1a", "--seed", "1"], "--all-j"),
        (vec!["hardness", "--instance", bad.to_str().unwrap()], "moment infeasible"),
        (vec!["hardness", "--instance", "/nonexistent.toml"], "reading"),
        (vec!["run", "--instance", bern3.to_str().unwrap(), "--j", "1", "--seed", "1"], "--catalog only"),
        (vec!["run", "--catalog", "1a", "--j", "1", "--seed", "1", "--delta", "1.5"], "delta"),
        (vec!["run", "--catalog", "1a", "--j", "1", "--seed", "1", "--algo", "ucb"], "unknown algorithm"),
        (vec!["run", "--catalog", "1a", "--j", "1", "--seed", "1", "--algo", "riskaverse"], "eps_v"),
        (vec!["hardness", "--catalog", "1a", "--j", "1", "--instance", bern3.to_str().unwrap()], "cannot be used"),
    ];
    for (args, needle) in cases {
        let o = varbai(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn verify_passes_and_negative_controls_fail() {
    let o = varbai(&["verify", "--seed", "5", "--coverage-trials", "10"]);
    ok(&o);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);

    let o = varbai(&["verify", "--seed", "5", "--coverage-trials", "10", "--inject-fault", "radius"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL confidence_coverage"));
    assert!(stdout(&o).contains("PASS hardness_oracle"));

    let o = varbai(&["verify", "--seed", "5", "--coverage-trials", "2", "--inject-fault", "oracle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL hardness_oracle"));
}

#[test]
fn failed_run_leaves_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let o = varbai(&[
        "run",
        "--catalog",
        "1a",
        "--j",
        "1",
        "--seed",
        "1",
        "--algo",
        "valucb,riskaverse",
        "--trials",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!csv.exists());
}
