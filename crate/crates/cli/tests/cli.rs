use std::path::Path;
use std::process::Command;

use qzd_cli::config::Values;
use qzd_cli::sweep::{self, set_dotted, Ranges};
use qzd_cli::{presets, run_config, CliError, RunConfig, RunTarget};

fn target(dir: &Path) -> RunTarget {
    RunTarget {
        out: Some(dir.to_path_buf()),
        quiet: true,
    }
}

fn qzd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qzd"))
}

#[test]
fn every_preset_validates() {
    for p in presets::PRESETS {
        let cfg = presets::load(p.name).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("preset {} invalid: {e}", p.name));
        assert_eq!(cfg.name.as_deref(), Some(p.name));
    }
}

#[test]
fn empty_config_lists_missing_keys() {
    let cfg = RunConfig::from_toml_str("", "empty").unwrap();
    match cfg.validate() {
        Err(CliError::Config(errs)) => {
            assert!(errs.iter().any(|e| e.contains("protocol")));
            assert!(errs.iter().any(|e| e.contains("dim")));
        }
        other => panic!("expected a config error, got {other:?}"),
    }
    let cfg = RunConfig::from_toml_str("protocol = \"zeno_confine\"\ndim = 10", "partial").unwrap();
    let Err(CliError::Config(errs)) = cfg.validate() else {
        panic!("expected a config error");
    };
    for key in ["steps", "beta", "'s'", "initial"] {
        assert!(errs.iter().any(|e| e.contains(key)), "no error mentions {key}: {errs:?}");
    }
}

#[test]
fn validation_catches_bad_values_together() {
    let text = r#"
        protocol = "zeno_confine"
        dim = 12
        s = 10
        steps = 5
        beta = [0.1, 0.0]
        snapshots = [7]
        initial = { kind = "coherent", alpha = [3.0, 0.0] }
        [kick]
        model = "dressed"
        rabi_drive_hz = 1000.0
        selectivity = 0.1
    "#;
    let Err(CliError::Config(errs)) = RunConfig::from_toml_str(text, "bad").unwrap().validate() else {
        panic!("expected a config error");
    };
    assert_eq!(errs.len(), 5, "{errs:?}");
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(RunConfig::from_toml_str("protocol = \"crush\"\nsteps_typo = 3", "typo").is_err());
    assert!(RunConfig::from_toml_str("protocol = \"nope\"", "bad protocol").is_err());
}

#[test]
fn fig2a_writes_ten_snapshots_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_config(&presets::load("fig2a").unwrap(), &target(dir.path())).unwrap();
    for k in (0..=45).step_by(5) {
        for ext in ["csv", "pgm"] {
            assert!(dir.path().join(format!("wigner_step{k:04}.{ext}")).exists(), "step {k} {ext}");
        }
    }
    let snapshots = summary.files.iter().filter(|f| f.starts_with("wigner_")).count();
    assert_eq!(snapshots, 20);
    assert!(summary.truncation.ok);
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,energy,p0,"));
    assert_eq!(trace.lines().count(), 52);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["truncation"]["ok"], serde_json::Value::Bool(true));
    assert_eq!(json["steps_run"], 50);
}

#[test]
fn fig4ab_reaches_the_five_i_cat() {
    let summary = run_config(&presets::load("fig4ab").unwrap(), &RunTarget::default()).unwrap();
    let f = summary.fidelity.unwrap();
    assert!((f - 0.988).abs() < 0.005, "fidelity {f}");
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = presets::load("fig2c").unwrap();
    run_config(&cfg, &target(a.path())).unwrap();
    run_config(&cfg, &target(b.path())).unwrap();
    for name in ["trace.csv", "final_state.csv", "wigner_step0045.csv", "wigner_step0045.pgm"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn single_point_sweep_matches_run() {
    let base = presets::source_value("qze").unwrap();
    let ranges = Ranges::from_toml_str("[ranges]\nsteps = [100]", "one").unwrap();
    let rows = sweep::sweep(&base, &ranges, None).unwrap();
    assert_eq!(rows.len(), 1);
    let swept = rows[0].result.as_ref().unwrap();
    let direct = run_config(&presets::load("qze").unwrap(), &RunTarget::default()).unwrap();
    assert_eq!(swept.final_energy, direct.final_energy);
    assert_eq!(swept.metrics, direct.metrics);
}

#[test]
fn sweep_records_failures_per_row() {
    let base = presets::source_value("fig2a-dressed").unwrap();
    let ranges = Ranges::from_toml_str("[ranges]\n\"kick.theta\" = [1.0, -2.0]\nsteps = [5, 10]", "r").unwrap();
    let rows = sweep::sweep(&base, &ranges, None).unwrap();
    assert_eq!(rows.len(), 4);
    let order: Vec<String> = rows.iter().map(|r| format!("{}/{}", r.assignments[0].1, r.assignments[1].1)).collect();
    assert_eq!(order, ["1.0/5", "1.0/10", "-2.0/5", "-2.0/10"]);
    assert!(rows[0].result.is_ok() && rows[1].result.is_ok());
    assert!(rows[2].result.is_err() && rows[3].result.is_err());
    let mut table = Vec::new();
    sweep::write_table(&rows, &mut table).unwrap();
    let table = String::from_utf8(table).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().next().unwrap().starts_with("index,kick.theta,steps,fidelity"));
}

#[test]
fn ranges_expand_and_reject_malformed_axes() {
    let r = Ranges::from_toml_str("[ranges]\nx = { start = 0.0, stop = 1.0, count = 5 }", "r").unwrap();
    assert_eq!(r.points().unwrap().len(), 5);
    assert!(Ranges::from_toml_str("[ranges]\nx = { start = 0.0, stop = 1.0 }", "r").is_err());
    assert!(Ranges::from_toml_str("[ranges]\nx = []", "r").is_err());
    assert!(Ranges::from_toml_str("[ranges]\nx = 3", "r").is_err());
    let lin = Values::Linspace {
        start: 1.0,
        stop: 2.0,
        count: 3,
    };
    assert_eq!(lin.expand(), vec![1.0, 1.5, 2.0]);
}

#[test]
fn dotted_keys_create_tables() {
    let mut v: toml::Value = toml::from_str("dim = 3").unwrap();
    set_dotted(&mut v, "kick.theta", toml::Value::Float(1.0)).unwrap();
    assert_eq!(v["kick"]["theta"].as_float(), Some(1.0));
    assert!(set_dotted(&mut v, "dim.x", toml::Value::Float(1.0)).is_err());
}

#[test]
fn binary_runs_presets_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let status = qzd()
        .args(["--quiet", "--dim", "24", "--out"])
        .arg(dir.path())
        .args(["preset", "qze"])
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["dim"], 24);

    let listed = qzd().arg("list-presets").output().unwrap();
    let text = String::from_utf8(listed.stdout).unwrap();
    assert_eq!(text.lines().count(), presets::PRESETS.len());

    let missing = qzd().args(["--quiet", "preset", "no-such-preset"]).output().unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("unknown preset"));
}

#[test]
fn binary_reports_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    std::fs::write(&path, "").unwrap();
    let out = qzd().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing key 'protocol'") && err.contains("missing key 'dim'"));
}
