use gaudin_lab::{run, Command, ExperimentConfig};
use std::process::Command as Process;

const BASE3: &str = r#"
algebra = "sl2"
weights = [1, 1, 1]
points = ["0", "1/2", "1"]
seed = 11
"#;

#[test]
fn config_round_trips() {
    let cfg = ExperimentConfig::from_toml(BASE3).unwrap();
    let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    // floats and rationals coexist
    let mixed = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1]
points = [0.25, "1/3"]
[mu]
h = "1/2"
"#,
    )
    .unwrap();
    let again = ExperimentConfig::from_toml(&mixed.to_toml()).unwrap();
    assert_eq!(mixed, again);
}

#[test]
fn rejects_coincident_points() {
    let cfg = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1]
points = ["1/2", "2/4"]
"#,
    )
    .unwrap();
    let err = run(Command::CommuteCheck, &cfg, 0, 1e-8).unwrap_err();
    assert!(err.contains("coincident"), "{}", err);
}

#[test]
fn commute_check_is_exact_for_rational_data() {
    let cfg = ExperimentConfig::from_toml(BASE3).unwrap();
    let out = run(Command::CommuteCheck, &cfg, 11, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["mode"], "exact");
    assert_eq!(
        out.report.results["message"],
        "all commutators zero (exact)"
    );
    // a float point demotes the run to the floating pipeline
    let cfg = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1, 1]
points = ["0", 0.5, "1"]
"#,
    )
    .unwrap();
    let out = run(Command::CommuteCheck, &cfg, 11, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["mode"], "float");
}

#[test]
fn spectrum_refuses_non_real_when_hermitian_required() {
    let cfg = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1]
points = ["0", "1+1/2i"]
hermitian_required = true
"#,
    )
    .unwrap();
    let err = run(Command::Spectrum, &cfg, 0, 1e-8).unwrap_err();
    assert_eq!(err, "Hermiticity unavailable for non-real parameters");
}

#[test]
fn spectrum_and_cyclicity_reports() {
    let cfg = ExperimentConfig::from_toml(BASE3).unwrap();
    let out = run(Command::Spectrum, &cfg, 11, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["dimension"], 3);
    let rows = &out.tables["spectrum"];
    assert_eq!(rows.len(), 4); // header + three eigenspaces
    let out = run(Command::Cyclicity, &cfg, 11, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["cyclic"], true);
}

#[test]
fn determinism_same_config_same_seed() {
    let cfg = ExperimentConfig::from_toml(BASE3).unwrap();
    let a = run(Command::Spectrum, &cfg, 11, 1e-8).unwrap();
    let b = run(Command::Spectrum, &cfg, 11, 1e-8).unwrap();
    assert_eq!(a.report.results, b.report.results);
    assert_eq!(a.report.config_hash, b.report.config_hash);
    assert_eq!(a.tables, b.tables);
    let a = run(Command::Bethe, &bethe_cfg(), 11, 1e-8).unwrap();
    let b = run(Command::Bethe, &bethe_cfg(), 11, 1e-8).unwrap();
    assert_eq!(a.tables, b.tables);
}

fn bethe_cfg() -> ExperimentConfig {
    ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1, 1, 1]
points = ["0", "1/3", "2/3", "1"]
sector_m = 1
"#,
    )
    .unwrap()
}

#[test]
fn bethe_and_oper_check() {
    let out = run(Command::Bethe, &bethe_cfg(), 7, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["expected"], 3);
    assert_eq!(out.report.results["found"], 3);
    let out = run(Command::OperCheck, &bethe_cfg(), 7, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["monodromy_free"], 3);
}

#[test]
fn bijection_count_per_sector_table() {
    let cfg = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1, 1, 1]
points = ["0", "1/3", "2/3", "1"]
"#,
    )
    .unwrap();
    let out = run(Command::BijectionCount, &cfg, 3, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["eigen_total"], 6);
    assert_eq!(out.report.results["bethe_total"], 6);
    let rows = &out.tables["sectors"];
    // sectors 4, 2, 0 with counts 1/1, 3/3, 2/2
    assert_eq!(rows.len(), 4);
    for (row, (nu, count)) in rows[1..].iter().zip([(4, 1), (2, 3), (0, 2)]) {
        assert_eq!(row[0], nu.to_string());
        assert_eq!(row[3], count.to_string());
        assert_eq!(row[4], count.to_string());
    }
}

#[test]
fn limit_command_parses_tree() {
    let cfg = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1, 1]
points = ["0", "1/2", "1"]
tree = "((1 2) 3)"
"#,
    )
    .unwrap();
    let out = run(Command::Limit, &cfg, 5, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["singular_dimension"], 3);
    assert_eq!(out.report.results["flat"], true);
}

#[test]
fn cover_swap_loop() {
    let cfg = ExperimentConfig::from_toml(
        r#"
algebra = "sl2"
weights = [1, 1, 1, 1]
points = [0.0, 0.3333333333333333, 0.6666666666666666, 1.0]
cover_loop = "swap"
swap = [2, 3]
delta = 1e-3
"#,
    )
    .unwrap();
    let out = run(Command::Cover, &cfg, 0, 1e-8).unwrap();
    assert!(out.report.verdict);
    assert_eq!(out.report.results["stable_under_step_halving"], true);
}

#[test]
fn binary_exit_codes_and_outputs() {
    let bin = env!("CARGO_BIN_EXE_gaudin-lab");
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.toml");
    std::fs::write(&config_path, BASE3).unwrap();
    let out_dir = dir.path().join("out");
    // passing run: exit 0, report and CSV written
    let status = Process::new(bin)
        .args([
            "spectrum",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "11",
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{:?}", status);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["command"], "spectrum");
    assert_eq!(report["schema_version"], 1);
    assert!(out_dir.join("spectrum.csv").exists());
    // operational error: exit 1
    let status = Process::new(bin)
        .args(["spectrum", "--config", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    // mathematical verdict failure: exit 2 (untwisted full-space
    // spectrum is degenerate, so simplicity fails)
    let bad = r#"
algebra = "sl2"
weights = [1, 1]
points = ["0", "1"]
full_space = true
"#;
    let bad_path = dir.path().join("bad.toml");
    std::fs::write(&bad_path, bad).unwrap();
    let status = Process::new(bin)
        .args(["spectrum", "--config", bad_path.to_str().unwrap(), "--seed", "4"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2), "{:?}", status);
}
