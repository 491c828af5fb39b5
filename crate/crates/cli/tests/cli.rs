use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hesched::generate::fixtures;
use hesched::model::{write_scenario, ScenarioInstance};
use hesched_cli::{cmd_classify, cmd_solve, cmd_sweep, SolveDocument, SweepArgs, SweepSource};
use hesched::sweep::SweepAxis;

fn hesched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hesched")).args(args).output().expect("binary runs")
}

fn scenario(dir: &Path, name: &str, instance: &ScenarioInstance) -> PathBuf {
    let path = dir.join(name);
    write_scenario(&path, instance).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    for (instance, regime, objective) in [(fixtures::zero_load(4), "SKSW", 0.0), (fixtures::t3(), "IKSW", 69.2)] {
        let path = scenario(dir.path(), &format!("{regime}.json"), &instance);
        let out = dir.path().join(format!("{regime}.report.json"));
        let output = hesched(&["solve", "--scenario", s(&path), "--out", s(&out)]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        let doc: SolveDocument = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(doc.regime, regime);
        assert!((doc.objective.total - objective).abs() < 1e-9);
        assert_eq!(doc.provenance.tool, "hesched");
        assert_eq!(doc.provenance.input_sha256.len(), 64);
        assert_eq!(doc.aps.len(), instance.len());
    }
}

#[test]
fn t3_report_details() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "t3.json", &fixtures::t3());
    let doc = cmd_solve(&path, &dir.path().join("r.json"), Some(5)).unwrap();
    assert_eq!(doc.provenance.seed, Some(5));
    assert_eq!(doc.cloud_offload, 3);
    assert_eq!(doc.objective.cloud, 60.0);
    assert_eq!(doc.objective.routing, 8.0);
    assert_eq!(doc.servers.len(), 1);
    assert_eq!(doc.servers[0].ap, 2);
    assert_eq!(doc.servers[0].inflow, 10);
    assert_eq!(doc.servers[0].offload, 3);
    assert_eq!(doc.public_demand, 10);
}

#[test]
fn classify_prints_the_regime() {
    let dir = tempfile::tempdir().unwrap();
    let mut skiw = fixtures::t3();
    skiw.profile.w = 3.0;
    skiw.profile.k = 40.0;
    for (instance, regime) in [(fixtures::t3(), "IKSW"), (fixtures::zero_load(3), "SKSW"), (skiw, "SKIW")] {
        let path = scenario(dir.path(), &format!("{regime}.json"), &instance);
        let output = hesched(&["classify", "--scenario", s(&path)]);
        assert!(output.status.success());
        let stdout = String::from_utf8(output.stdout).unwrap();
        assert_eq!(stdout.lines().next(), Some(regime));
        assert_eq!(cmd_classify(&path).unwrap().regime.label(), regime);
    }
}

#[test]
fn invalid_scenarios_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = fixtures::t3();
    bad.profile.k = 1.0;
    let path = scenario(dir.path(), "bad.json", &bad);

    let output = hesched(&["validate", "--scenario", s(&path)]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stdout).contains("private"));

    let output = hesched(&["solve", "--scenario", s(&path), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("invalid"));

    let good = scenario(dir.path(), "good.json", &fixtures::t3());
    assert!(hesched(&["validate", "--scenario", s(&good)]).status.success());
    assert_eq!(hesched(&["validate", "--scenario", s(&good), "--servers", "2"]).status.code(), Some(1));

    std::fs::write(dir.path().join("junk.json"), "{\"aps\": []}").unwrap();
    assert_eq!(hesched(&["solve", "--scenario", s(&dir.path().join("junk.json")), "--out", "x"]).status.code(), Some(2));
}

#[test]
fn oracle_check_agrees_on_t3() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "t3.json", &fixtures::t3());
    let output = hesched(&["oracle-check", "--scenario", s(&path)]);
    assert!(output.status.success());
    let check: hesched_cli::OracleCheck = serde_json::from_slice(&output.stdout).unwrap();
    assert!(check.agree);
    assert_eq!(check.enumerated, Some(check.milp));
}

#[test]
fn k_sweep_defaults_to_five_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "t3.json", &fixtures::t3());
    let out = dir.path().join("k.csv");
    let output = hesched(&["sweep", "--axis", "K", "--scenario", s(&path), "--out", s(&out)]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), hesched_cli::SUMMARY_COLUMNS);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[2] == "5"));
    let runs = csv::Reader::from_path(dir.path().join("k.runs.csv")).unwrap().records().count();
    assert_eq!(runs, 25);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["base_k_bounds"]["k_lower"], 7);
    assert_eq!(meta["base_k_bounds"]["k_upper"], 15);
}

#[test]
fn alpha_sweep_capacity_column_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario(dir.path(), "t3.json", &fixtures::t3());
    let args = SweepArgs {
        axis: SweepAxis::Alpha,
        values: None,
        source: SweepSource::Scenario(path),
        alpha: None,
        beta: None,
        k: None,
        w: None,
        repetitions: 1,
        workers: 2,
        out: dir.path().join("alpha.csv"),
    };
    let (report, meta) = cmd_sweep(&args).unwrap();
    let caps: Vec<u64> = report.summary.iter().map(|r| r.public_capacity).collect();
    assert_eq!(caps, vec![10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0]);
    assert_eq!(meta.private_feasible_from, Some(0.2));
}

#[test]
fn ingest_and_grid_sweep_from_synthetic_orders() {
    let dir = tempfile::tempdir().unwrap();
    let orders = dir.path().join("orders.csv");
    let output = hesched(&["synth", "--grid", "6", "5", "--orders-per-day", "400", "--days", "3", "--seed", "3", "--out", s(&orders)]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let scenario_path = dir.path().join("scenario.json");
    let output = hesched(&[
        "ingest", "--input", s(&orders), "--grid", "6", "5", "--servers", "4", "--seed", "1", "--out", s(&scenario_path),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["aps"], 30);
    assert_eq!(summary["servers"], 4);
    assert_eq!(summary["days"], 3);
    assert_eq!(summary["grid_counts_total"], summary["in_bounds"]);
    assert!(hesched(&["solve", "--scenario", s(&scenario_path), "--out", s(&dir.path().join("r.json"))]).status.success());

    let out = dir.path().join("grid.csv");
    let output = hesched(&[
        "sweep", "--axis", "grid_size", "--input", s(&orders), "--values", "2x2:1", "3x2:2", "3x3:2", "4x3:3", "6x5:4",
        "--reps", "2", "--workers", "2", "--out", s(&out),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let rows = csv::Reader::from_path(&out).unwrap().records().count();
    assert_eq!(rows, 5);
}

#[test]
fn grid_size_sweep_covers_the_reference_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let orders = dir.path().join("orders.csv");
    assert!(hesched(&["synth", "--seed", "8", "--out", s(&orders)]).status.success());
    let out = dir.path().join("sizes.csv");
    let output = hesched(&["sweep", "--axis", "grid_size", "--input", s(&orders), "--reps", "1", "--workers", "2", "--out", s(&out)]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let rows: Vec<csv::StringRecord> = csv::Reader::from_path(&out).unwrap().records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    let points: Vec<&str> = rows.iter().map(|r| &r[1]).collect();
    assert_eq!(points, ["12x10:40", "24x20:60", "36x30:80", "48x40:100", "60x50:120"]);
    assert!(rows.iter().all(|r| &r[r.len() - 1] == "optimal"));
}
