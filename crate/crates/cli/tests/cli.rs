use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use twosided_cli::{exit_code, ExperimentConfig, Report};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_twosided"));
    c.env_remove("MASTER_SEED");
    c
}

fn write_config(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    p
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

fn run_csv(config: &Value) -> (String, Option<i32>) {
    let dir = TempDir::new().unwrap();
    let p = write_config(dir.path(), "c.json", config);
    let out = bin()
        .arg("run")
        .arg(&p)
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert!(
        out.stderr.is_empty() || out.status.code() != Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (stdout(&out), out.status.code())
}

#[test]
fn deficit_demo_reports_minus_five() {
    let (csv, code) = run_csv(&json!({"kind": "deficit-demo", "seed": 0}));
    assert_eq!(code, Some(0));
    assert_eq!(
        csv,
        "mechanism,seller_value,buyer_values,winner,buyer_payment,seller_payment,budget_surplus\n\
         naive_vcg,1.0,10;5,b1,5.0,10.0,-5.0\n"
    );
}

#[test]
fn deficit_demo_from_instance() {
    let config = json!({
        "kind": "deficit-demo",
        "seed": 0,
        "market": {"instance": {
            "numeric_mode": "exact",
            "buyers": [{"id": "x", "valuation": {"class": "unit_demand", "weights": ["7"]}},
                       {"id": "y", "valuation": {"class": "unit_demand", "weights": ["4"]}}],
            "sellers": [{"id": "s", "value": "2"}],
            "items_identical": true
        }}
    });
    let (csv, code) = run_csv(&config);
    assert_eq!(code, Some(0));
    assert!(csv.ends_with("naive_vcg,2.0,7;4,x,4.0,7.0,-3.0\n"), "{csv}");
}

#[test]
fn golden_csv_headers() {
    let lb = json!({"family": "lowerbound", "k": 2});
    let cases = [
        (
            json!({"kind": "ratio", "mechanism": "adjusted_vcg", "market": lb, "exact": true, "seed": 1}),
            "mechanism,exact,trials,seed,mean_alg_sw,mean_opt_sw,ratio,ci95_alg,ci95_opt,ci95_ratio",
        ),
        (
            json!({"kind": "ratio", "mechanism": "adjusted_vcg", "market": lb, "trace": true, "trials": 3, "seed": 1}),
            "trial,alg_sw,opt_sw,budget_surplus,trades",
        ),
        (
            json!({"kind": "dsic", "mechanism": "adjusted_vcg", "market": lb, "trials": 20, "seed": 1, "agents": ["s1"]}),
            "mechanism,agent,misreport,trials,seed,mean_gain,std_error,ci_lower,ci_upper,critical_z,verdict",
        ),
        (
            json!({"kind": "ledger", "mechanism": "adjusted_vcg", "market": lb, "trials": 5, "seed": 1}),
            "mechanism,trials,seed,budget_claim,ir_violations,wbb_violations,sbb_violations,min_surplus,max_surplus,trades",
        ),
        (
            json!({"kind": "lemma-suite", "market": lb, "seed": 1}),
            "inequality,lhs,rhs,holds",
        ),
        (
            json!({"kind": "lowerbound-sweep", "market": lb, "seed": 1}),
            "k,mechanism,expected_alg_sw,expected_opt_sw,ratio,closed_form,abs_diff",
        ),
        (
            json!({"kind": "deficit-demo", "seed": 1}),
            "mechanism,seller_value,buyer_values,winner,buyer_payment,seller_payment,budget_surplus",
        ),
    ];
    for (config, expected) in cases {
        let (csv, code) = run_csv(&config);
        assert_eq!(code, Some(0), "{config}");
        assert_eq!(header(&csv), expected, "{config}");
    }
}

#[test]
fn trace_has_one_row_per_trial() {
    let (csv, _) = run_csv(&json!({
        "kind": "ratio", "mechanism": "adjusted_vcg", "market": {"family": "xos"}, "trace": true, "trials": 7, "seed": 4
    }));
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
}

#[test]
fn sweep_lowerbound_rows() {
    let dir = TempDir::new().unwrap();
    let p = write_config(
        dir.path(),
        "lb.json",
        &json!({"kind": "lowerbound-sweep", "market": {"family": "lowerbound", "k": 3}, "seed": 9}),
    );
    let out = bin()
        .arg("sweep")
        .arg(&p)
        .args(["--param", "k", "--values", "1,5,10", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(
        rows[1].starts_with("1,adjusted_vcg,1.0,1.0,1.0,1.0,0.0"),
        "{}",
        rows[1]
    );
    let ratios: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn sweep_over_trials_prepends_nothing_when_column_exists() {
    let dir = TempDir::new().unwrap();
    let p = write_config(
        dir.path(),
        "r.json",
        &json!({"kind": "ledger", "mechanism": "reserve_rehearsal",
                "market": {"family": "grid_double_auction", "n": 3, "m": 3, "d": 4}, "trials": 1, "seed": 2}),
    );
    let out = bin()
        .arg("sweep")
        .arg(&p)
        .args(["--param", "trials", "--values", "10,20", "--format", "csv"])
        .output()
        .unwrap();
    let csv = stdout(&out);
    assert!(header(&csv).starts_with("mechanism,trials"));
    assert!(csv
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("reserve_rehearsal,20,"));
    let out = bin()
        .arg("sweep")
        .arg(&p)
        .args(["--param", "n", "--values", "2,4", "--format", "csv"])
        .output()
        .unwrap();
    let csv = stdout(&out);
    assert!(header(&csv).starts_with("n,mechanism"));
}

fn without_timestamp(s: &str) -> Value {
    let mut v: Value = serde_json::from_str(s).unwrap();
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

#[test]
fn reruns_are_identical_up_to_timestamp() {
    let dir = TempDir::new().unwrap();
    let p = write_config(
        dir.path(),
        "r.json",
        &json!({"kind": "ratio", "mechanism": {"name": "reserve_rehearsal", "order": "random"},
                "market": {"family": "uniform_double_auction", "n": 4, "m": 3},
                "numeric_mode": "float", "trials": 3000, "seed": 11,
                "output": {"path": "out.json"}}),
    );
    let run = || {
        let out = bin().arg("run").arg(&p).output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read_to_string(dir.path().join("out.json")).unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.contains("\"generated_at\""));
    assert_eq!(without_timestamp(&a), without_timestamp(&b));

    let csv = |extra: &[&str]| {
        let out = bin()
            .arg("run")
            .arg(&p)
            .args(["--format", "csv", "--out"])
            .arg(dir.path().join("o.csv"))
            .args(extra)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(dir.path().join("o.csv")).unwrap()
    };
    assert_eq!(csv(&[]), csv(&[]));
    assert_ne!(csv(&[]), csv(&["--seed", "12"]));
}

#[test]
fn seed_precedence() {
    let dir = TempDir::new().unwrap();
    let p = write_config(
        dir.path(),
        "r.json",
        &json!({"kind": "ledger", "mechanism": "adjusted_vcg", "market": {"family": "xos"}, "trials": 3, "seed": 5}),
    );
    let seed_of = |cmd: &mut Command| -> u64 {
        let out = cmd.output().unwrap();
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(bin().arg("run").arg(&p)), 5);
    assert_eq!(
        seed_of(bin().arg("run").arg(&p).env("MASTER_SEED", "77")),
        77
    );
    assert_eq!(
        seed_of(
            bin()
                .arg("run")
                .arg(&p)
                .env("MASTER_SEED", "77")
                .args(["--seed", "8"])
        ),
        8
    );
    let out = bin()
        .arg("run")
        .arg(&p)
        .env("MASTER_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn errors_exit_one_with_field_paths() {
    let cases = [
        (
            json!({"kind": "ratio", "mechanism": "adjusted_vcg", "market": {"family": "xos"}}),
            "config.seed",
        ),
        (
            json!({"kind": "ratio", "mechanism": "nope", "market": {"family": "xos"}, "seed": 1}),
            "config.mechanism.name",
        ),
        (
            json!({"kind": "ratio", "mechanism": "adjusted_vcg", "market": {"family": "uniform_double_auction", "n": 2, "m": 2}, "seed": 1}),
            "config.market.family",
        ),
        (
            json!({"kind": "ratio", "mechanism": "adjusted_vcg", "seed": 1,
                   "market": {"distribution": {"buyers": [], "sellers": [{"id": "s1", "distribution": {"kind": "uniform_discrete", "atoms": ["a"]}}]}}}),
            "config.market.distribution.sellers[0].distribution.atoms[0]",
        ),
        (
            json!({"kind": "ratio", "mechanism": "adjusted_vcg", "seed": 1, "exact": true, "enumeration_budget": 10,
                   "market": {"family": "xos"}}),
            "budget",
        ),
        (
            json!({"kind": "ledger", "seed": 1, "mechanism": {"name": "surplus", "onesided": "rehearsal"},
                   "market": {"family": "grid_double_auction", "n": 2, "m": 2}}),
            "config.mechanism.onesided",
        ),
    ];
    let dir = TempDir::new().unwrap();
    for (i, (config, needle)) in cases.into_iter().enumerate() {
        let p = write_config(dir.path(), &format!("c{i}.json"), &config);
        let out = bin().arg("run").arg(&p).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{config}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{needle} not in {err}");
    }
    let out = bin()
        .args(["sweep", "missing.json", "--param", "k", "--values", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unsweepable_parameter_is_rejected() {
    let c = ExperimentConfig::from_json(
        json!({"kind": "lowerbound-sweep", "market": {"family": "lowerbound", "k": 3}, "seed": 1}),
        None,
    )
    .unwrap();
    assert!(twosided_cli::sweep(&c, "seed", &[1]).is_err());
    assert!(twosided_cli::sweep(&c, "n", &[1]).is_err());
}

#[test]
fn violations_map_to_exit_two() {
    let c = ExperimentConfig::from_json(
        json!({"kind": "ledger", "mechanism": "reserve_rehearsal",
               "market": {"family": "grid_double_auction", "n": 3, "m": 3, "d": 4}, "trials": 200, "seed": 1}),
        None,
    )
    .unwrap();
    let mut report: Report = twosided_cli::run(&c).unwrap();
    assert_eq!(exit_code(&report), 0);
    report.violation = Some("forced".into());
    assert_eq!(exit_code(&report), 2);
    let combined = Report::combine("k", vec![(1, report.clone()), (2, report)]).unwrap();
    assert_eq!(combined.violation.as_deref(), Some("k=1: forced"));
}

#[test]
fn ledger_on_rehearsal_has_no_sbb_violations() {
    let (csv, code) = run_csv(&json!({
        "kind": "ledger", "mechanism": "reserve_rehearsal",
        "market": {"family": "grid_double_auction", "n": 6, "m": 6, "d": 10}, "trials": 20000, "seed": 3
    }));
    assert_eq!(code, Some(0));
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[3..7], &["strong", "0", "0", "0"]);
}

#[test]
fn exact_ratio_config_matches_closed_form() {
    let c = ExperimentConfig::from_json(
        json!({"kind": "ratio", "mechanism": "adjusted_vcg", "market": {"family": "lowerbound", "k": 20},
               "exact": true, "seed": 0}),
        None,
    )
    .unwrap();
    let r = twosided_cli::run(&c).unwrap();
    let closed = twosided::verify::instances::lowerbound_closed_form::<twosided::Exact>(20);
    assert_eq!(r.details["ratio"], closed.to_string());
}

#[test]
fn dsic_probe_config_runs_every_agent() {
    let (csv, code) = run_csv(&json!({
        "kind": "dsic", "mechanism": "median", "market": {"family": "lowerbound", "k": 3}, "trials": 200, "seed": 5
    }));
    assert_eq!(code, Some(0));
    let agents: std::collections::BTreeSet<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(agents.into_iter().collect::<Vec<_>>(), ["b1", "s1"]);
}
