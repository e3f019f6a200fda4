use std::path::Path;
use std::process::Command;

use sticky_op::experiment::{run_experiment, Experiment, ExperimentConfig, Flag, ReportRow, ScalingSource};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sticky-op"))
}

fn report(dir: &Path) -> Vec<ReportRow> {
    csv::Reader::from_path(dir.join("report.csv")).unwrap().deserialize().map(|r| r.unwrap()).collect()
}

fn value(rows: &[ReportRow], name: &str) -> f64 {
    rows.iter().find(|r| r.statistic == name).unwrap_or_else(|| panic!("no {name} row")).value
}

#[test]
fn moments_at_p_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"p": 1.0, "eps": 0.0, "n_steps": 200}"#).unwrap();
    let out = dir.path().join("run");
    let status = bin().args(["moments", "--replicates", "8", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = report(&out);
    assert_eq!(value(&rows, "alpha"), 1.0);
    assert_eq!(value(&rows, "sigma2"), 0.0);
    for name in ["ensemble.csv", "report.csv", "summary.txt"] {
        assert!(out.join(name).exists());
    }
    let hash = &rows[0].config_hash;
    assert!(rows.iter().all(|r| &r.config_hash == hash && r.seed == 1));
}

#[test]
fn pair_at_zero_eps_has_zero_gap() {
    let cfg = ExperimentConfig {
        experiment: Experiment::PairSticky,
        eps: 0.0,
        replicates: Some(50),
        n_steps: Some(300),
        scaling: ScalingSource::Fixed,
        alpha: Some(0.58),
        sigma: Some(0.87),
        ..Default::default()
    };
    let out = run_experiment(&cfg).unwrap();
    assert!(out.passed());
    assert_eq!(out.value("max_abs_terminal_gap"), Some(0.0));
    let gaps = out.ensemble.column("terminal_gap").unwrap();
    assert_eq!(gaps.len(), 150);
    assert!(gaps.iter().all(|g| *g == "0"));
}

#[test]
fn rerun_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"replicates": 5000, "n_max": 20, "fit_from": 1}"#).unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let status = bin().env("RAYON_NUM_THREADS", threads).args(["decay", "--seed", "3", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert!(status.code() == Some(0) || status.code() == Some(2));
        outputs.push((std::fs::read(out.join("ensemble.csv")).unwrap(), std::fs::read(out.join("report.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn estimated_scaling_reads_a_prior_moments_run() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("moments");
    let status = bin().args(["moments", "--replicates", "64", "--seed", "5", "--out"]).arg(&m).status().unwrap();
    assert!(matches!(status.code(), Some(0)));
    let moments = report(&m);

    let clt = dir.path().join("clt");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"replicates": 200}"#).unwrap();
    let status = bin().args(["single-path-clt", "--config"]).arg(&cfg).arg("--moments-from").arg(&m).arg("--out").arg(&clt).status().unwrap();
    assert!(matches!(status.code(), Some(0) | Some(2)));
    let rows = report(&clt);
    assert_eq!(value(&rows, "alpha"), value(&moments, "alpha"));
    assert_eq!(value(&rows, "sigma"), value(&moments, "sigma"));
    let summary = std::fs::read_to_string(clt.join("summary.txt")).unwrap();
    assert!(summary.contains(&format!("\"alpha\":{}", value(&moments, "alpha"))));
}

#[test]
fn missing_scaling_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["pair-sticky", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn bad_config_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"p": 0.8, "unknown_key": 1}"#).unwrap();
    let status = bin().args(["decay", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(1));
    std::fs::write(&cfg, r#"{"p": 1.4}"#).unwrap();
    let status = bin().args(["decay", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn statistical_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"replicates": 20000, "fit_from": 1, "min_r_squared": 1.0}"#).unwrap();
    let out = dir.path().join("run");
    let status = bin().args(["decay", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let rows = report(&out);
    assert_eq!(rows.iter().find(|r| r.statistic == "r_squared").unwrap().flag, Flag::Fail);
    assert!(std::fs::read_to_string(out.join("summary.txt")).unwrap().contains("FAIL"));
}

#[test]
fn every_experiment_has_a_subcommand() {
    let help = bin().arg("--help").output().unwrap();
    let text = String::from_utf8(help.stdout).unwrap();
    for e in Experiment::ALL {
        assert!(text.contains(e.name()), "{e}");
    }
}
