use phiprod_cli::commands::{invoke, Invocation};
use phiprod_cli::runner::{run_json, RunOptions};
use phiprod_cli::{EXIT_BUDGET, EXIT_CONFIG, EXIT_FAILURE, EXIT_PASS};
use serde_json::{json, Value};
use std::process::Command;

fn cli(args: &[&str]) -> Invocation {
    invoke(std::iter::once("phiprod").chain(args.iter().copied()))
}

fn records(stdout: &str) -> Vec<Value> {
    stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write_config(name: &str, cfg: &Value) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("phiprod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn weighted_euclidean_classifies_as_scalar_product() {
    let cfg = json!({
        "version": 1,
        "phis": {"we": {"kind": "weighted-euclidean", "weights": [1, 4]}},
        "checks": [{"check": "classify", "phi": "we", "samples": 1000}],
        "output": "json"
    });
    let out = run_json(&cfg.to_string(), &RunOptions::default()).unwrap();
    assert_eq!(out.exit_code(), EXIT_PASS);
    let last = out.records.last().unwrap();
    assert_eq!(last.condition, "phi-classification");
    assert_eq!(last.result, Some(json!("scalar-product-induced")));
}

#[test]
fn broken_phi_fails_metric_axioms_with_a_witness_triple() {
    let cfg = json!({
        "version": 1,
        "phis": {"bad": {"kind": "coordinate-power", "dimension": 2, "index": 0, "exponent": 2}},
        "spaces": {
            "line": {"kind": "real-line"},
            "p": {"kind": "product", "factors": ["line", "line"], "phi": "bad"}
        },
        "checks": [{"check": "metric-axioms", "space": "p", "samples": 2000}]
    });
    let path = write_config("broken.json", &cfg);
    let inv = cli(&["run", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(inv.code, EXIT_FAILURE);
    let recs = records(&inv.stdout);
    let failed: Vec<&Value> = recs.iter().filter(|r| r["verdict"] == "fail").collect();
    assert!(!failed.is_empty());
    for r in failed {
        let labels: Vec<&str> = r["witness"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["label"].as_str().unwrap())
            .collect();
        assert_eq!(labels, ["x", "y", "z", "d_xy_yz_xz"]);
    }
}

#[test]
fn informational_failures_do_not_change_the_exit_status() {
    let cfg = json!({
        "version": 1,
        "phis": {"sum": {"kind": "sum", "dimension": 2}},
        "spaces": {"line": {"kind": "real-line"}, "p": {"kind": "product", "factors": ["line", "line"], "phi": "sum"}},
        "checks": [{"check": "cat0", "space": "p", "triangles": [[[0, 0], [2, 0], [0, 2]]], "informational": true}]
    });
    let out = run_json(&cfg.to_string(), &RunOptions::default()).unwrap();
    assert_eq!(out.records[0].verdict, phiprod::Verdict::Fail);
    assert_eq!(out.records[0].margin, 2.0);
    assert_eq!(out.exit_code(), EXIT_PASS);
}

#[test]
fn list_demos_prints_the_four_demos() {
    let inv = cli(&["--list-demos"]);
    assert_eq!(inv.code, EXIT_PASS);
    let names: Vec<&str> = inv
        .stdout
        .lines()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "counterexample",
            "non-length-space",
            "L1-non-uniqueness",
            "CAT0-failure"
        ]
    );
}

#[test]
fn every_demo_reproduces_its_outcome() {
    let inv = cli(&["demo", "--format", "json"]);
    assert_eq!(inv.code, EXIT_PASS, "{}", inv.stdout);
    let summaries: Vec<String> = records(&inv.stdout)
        .into_iter()
        .filter(|r| r["informational"] == false)
        .map(|r| {
            assert_eq!(r["verdict"], "pass", "{r}");
            r["condition"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(
        summaries,
        [
            "demo-counterexample",
            "demo-non-length-space",
            "demo-L1-non-uniqueness",
            "demo-CAT0-failure"
        ]
    );
}

#[test]
fn config_errors_exit_with_code_two() {
    let dangling = json!({"version": 1, "checks": [{"check": "classify", "phi": "missing"}]});
    assert_eq!(
        run_json(&dangling.to_string(), &RunOptions::default())
            .unwrap_err()
            .exit_code(),
        EXIT_CONFIG
    );
    let path = write_config("malformed.json", &json!({"version": 1}));
    assert_eq!(cli(&["run", path.to_str().unwrap()]).code, EXIT_CONFIG);
    assert_eq!(cli(&["run", "/nonexistent/config.json"]).code, EXIT_CONFIG);
    assert_eq!(cli(&["demo", "nope"]).code, EXIT_CONFIG);
    assert_eq!(
        cli(&["validate-phi", "sum:2", "--tolerance", "metric=1e-30"]).code,
        EXIT_CONFIG
    );
    assert_eq!(cli(&["validate-phi", "sum:two"]).code, EXIT_CONFIG);
    assert_eq!(
        cli(&[
            "length",
            "--space",
            "line",
            "--space",
            "line",
            "--vertices",
            "0,0"
        ])
        .code,
        EXIT_CONFIG
    );
    assert_eq!(cli(&["no-such-command"]).code, EXIT_CONFIG);
    assert_eq!(cli(&[]).code, EXIT_CONFIG);
}

#[test]
fn exceeded_budgets_exit_with_code_three() {
    let big_pattern: Vec<Vec<f64>> = (0..9)
        .map(|i| (0..9).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    let cfg = json!({
        "version": 1,
        "spaces": {"line": {"kind": "real-line"}},
        "checks": [{"check": "embedding", "space": "line", "pattern": big_pattern, "sample": [0, 1, 2]}]
    });
    assert_eq!(
        run_json(&cfg.to_string(), &RunOptions::default())
            .unwrap_err()
            .exit_code(),
        EXIT_BUDGET
    );
    let inv = cli(&[
        "length",
        "--space",
        "line",
        "--vertices",
        "0;1",
        "--depth",
        "40",
    ]);
    assert_eq!(inv.code, EXIT_BUDGET, "{}", inv.stderr);
}

#[test]
fn unevaluable_checks_are_undetermined_and_fail_the_run() {
    let cfg = json!({
        "version": 1,
        "phis": {"tv": {"kind": "two-valued", "dimension": 2}},
        "spaces": {"line": {"kind": "real-line"}, "p": {"kind": "product", "factors": ["line", "line"], "phi": "tv"}},
        "checks": [{"check": "geodesic", "space": "p", "from": [0, 0], "to": [1, 1]}]
    });
    let out = run_json(&cfg.to_string(), &RunOptions::default()).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.records[0].verdict, phiprod::Verdict::Undetermined);
    assert_eq!(out.exit_code(), EXIT_FAILURE);
}

#[test]
fn length_of_the_three_four_five_segment() {
    let inv = cli(&[
        "length",
        "--space",
        "line",
        "--space",
        "line",
        "--phi",
        "euclidean:2",
        "--vertices",
        "0,0;3,4",
        "--format",
        "json",
    ]);
    assert_eq!(inv.code, EXIT_PASS);
    let recs = records(&inv.stdout);
    let product = recs
        .iter()
        .find(|r| r["condition"] == "product-length")
        .unwrap();
    assert!((product["result"]["length"].as_f64().unwrap() - 5.0).abs() <= 1e-6);
}

#[test]
fn geodesic_subcommand_reports_non_uniqueness_under_sum() {
    let inv = cli(&[
        "geodesic", "--space", "line", "--space", "line", "--phi", "sum:2", "--from", "0,0",
        "--to", "1,1", "--unique", "--format", "json",
    ]);
    assert_eq!(inv.code, EXIT_FAILURE);
    let recs = records(&inv.stdout);
    assert_eq!(recs[0]["condition"], "geodesy");
    assert_eq!(recs[0]["verdict"], "pass");
    let uniq = recs
        .iter()
        .find(|r| r["condition"] == "geodesic-uniqueness")
        .unwrap();
    assert_eq!(uniq["result"]["unique"], false);
    assert!(uniq["result"]["sup_distance"].as_f64().unwrap() > 0.1);

    let corner = cli(&[
        "geodesic",
        "--space",
        "lp:2:1",
        "--from",
        "0,0",
        "--to",
        "1,2",
        "--selector",
        "corner:2",
    ]);
    assert_eq!(corner.code, EXIT_PASS, "{}", corner.stdout);
}

#[test]
fn rank_subcommand_respects_the_strict_convexity_gate() {
    let strict = cli(&[
        "rank",
        "--space",
        "lp:2:2",
        "--space",
        "lp:3:2",
        "--phi",
        "euclidean:2",
        "--format",
        "json",
    ]);
    let r = &records(&strict.stdout)[0];
    assert_eq!(r["result"]["rank"], json!({"kind": "exact", "value": 5}));
    assert_eq!(r["result"]["additivity_guaranteed"], true);

    let sum = cli(&[
        "rank",
        "--space",
        "half-line",
        "--space",
        "half-line",
        "--phi",
        "sum:2",
        "--format",
        "json",
    ]);
    let r = &records(&sum.stdout)[0];
    assert_eq!(r["result"]["rank"], json!({"kind": "at-least", "value": 0}));
    assert_eq!(r["result"]["additivity_guaranteed"], false);
}

#[test]
fn flags_override_config_values() {
    let inv = cli(&[
        "validate-phi",
        "lp:2:3",
        "--samples",
        "300",
        "--seed",
        "9",
        "--format",
        "json",
        "--expect",
        "strictly-convex-norm",
    ]);
    assert_eq!(inv.code, EXIT_PASS);
    let recs = records(&inv.stdout);
    assert!(recs.iter().all(|r| r.get("elapsed_ms").is_none()));
    assert!(recs[0]["samples"].as_u64().unwrap() < 1000);

    let wrong = cli(&[
        "validate-phi",
        "max:2",
        "--samples",
        "300",
        "--expect",
        "strictly-convex-norm",
    ]);
    assert_eq!(wrong.code, EXIT_FAILURE);
    assert!(wrong.stdout.contains("expected strictly-convex-norm"));

    let timed = cli(&[
        "validate-phi",
        "sum:2",
        "--samples",
        "100",
        "--timing",
        "--format",
        "json",
    ]);
    assert!(records(&timed.stdout)
        .iter()
        .all(|r| r["elapsed_ms"].is_number()));

    let loose = cli(&[
        "check-product",
        "--space",
        "line",
        "--space",
        "line",
        "--phi",
        "sum:2",
        "--samples",
        "100",
        "--tolerance",
        "metric=1e-6",
        "--format",
        "json",
    ]);
    let recs = records(&loose.stdout);
    let tri = recs
        .iter()
        .find(|r| r["condition"] == "metric-triangle")
        .unwrap();
    assert_eq!(tri["tolerance"], 1e-6);
    assert_eq!(loose.code, EXIT_PASS);
}

#[test]
fn text_output_ends_with_a_summary_line() {
    let inv = cli(&["demo", "CAT0-failure"]);
    assert_eq!(inv.code, EXIT_PASS);
    assert!(
        inv.stdout
            .trim_end()
            .ends_with("2 records, 0 failing: PASS"),
        "{}",
        inv.stdout
    );
    assert!(inv.stdout.contains("witness:"));
}

#[test]
fn the_binary_matches_the_library() {
    let out = Command::new(env!("CARGO_BIN_EXE_phiprod"))
        .args(["demo", "counterexample", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lib = cli(&["demo", "counterexample", "--format", "json"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_phiprod"))
        .args(["demo", "nope"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr)
        .unwrap()
        .starts_with("error: config error"));
}
