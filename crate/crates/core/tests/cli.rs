//! The `reslab` binary: exit codes, artifacts and their round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reslab::analysis::{parse_distances, parse_eps_table, parse_fit_inputs, parse_scatter};
use reslab::bounds::{parse_json_lines, Status};
use reslab::data::Dataset;
use reslab::experiment::{ExperimentConfig, InitKind, TargetMode};
use reslab::linalg::Matrix;
use reslab::network::{Activation, Weights};
use reslab::training::RunLog;

fn reslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reslab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, cfg.to_json()).unwrap();
    p
}

fn small() -> ExperimentConfig {
    ExperimentConfig {
        d: 4,
        n: 3,
        depths: vec![8, 16, 32],
        t: 20,
        eta0: 0.2,
        log_layers: true,
        hessian_probes: 50,
        ..Default::default()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_writes_artifacts_that_parse_back() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small();
    let c = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("run");
    let o = reslab(&["train", "--config", s(&c), "--out", s(&out), "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for &l in &cfg.depths {
        let log = RunLog::load(&out.join(format!("run_L{l}.csv")), l).unwrap();
        assert_eq!(log.rows.len() as u64, cfg.t + 1);
        let layers = RunLog::layers_from_csv(&std::fs::read_to_string(out.join(format!("layers_L{l}.csv"))).unwrap()).unwrap();
        assert_eq!(layers.len() as u64, (cfg.t + 1) * (l as u64 - 1));
        let w = Weights::load(&out.join(format!("weights_L{l}.txt"))).unwrap();
        assert_eq!(w.depth(), l);
    }
    let data = Dataset::load(&out.join("dataset.csv")).unwrap();
    assert_eq!(data.len(), cfg.n);
    let saved = ExperimentConfig::load(&out.join("config.json")).unwrap();
    assert_eq!(saved.output_dir, out);

    let an = tmp.path().join("analysis");
    let o = reslab(&["analyze", "--config", s(&c), "--out", s(&an), "--run", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let read = |name: &str| std::fs::read_to_string(an.join(name)).unwrap();
    for &l in &cfg.depths {
        assert!(!parse_eps_table(&read(&format!("steps_to_eps_L{l}.csv"))).unwrap().is_empty());
    }
    assert_eq!(parse_fit_inputs(&read("fit_fbar_initial.csv")).unwrap().len(), 3);
    assert_eq!(parse_distances(&read("distances.csv")).unwrap().len(), 2);
    assert!(!parse_scatter(&read("scatter.csv")).unwrap().is_empty());

    let ce = tmp.path().join("certify");
    let o = reslab(&["certify", "--config", s(&c), "--out", s(&ce), "--run", s(&out)]);
    assert!(matches!(code(&o), 0 | 1));
    let reports = parse_json_lines(&std::fs::read_to_string(ce.join("certify.jsonl")).unwrap()).unwrap();
    assert!(!reports.is_empty());
    assert_eq!(code(&o) == 1, reports.iter().any(|r| r.is_failure()));
}

#[test]
fn zero_steps_give_single_row_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { t: 0, ..small() };
    let c = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("run");
    assert_eq!(code(&reslab(&["train", "--config", s(&c), "--out", s(&out)])), 0);
    assert_eq!(RunLog::load(&out.join("run_L8.csv"), 8).unwrap().rows.len(), 1);
}

#[test]
fn interpolating_targets_give_zero_loss() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        init: InitKind::Zero,
        target_mode: TargetMode::NearInit,
        epsilon_init: 0.0,
        ..small()
    };
    let c = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("run");
    assert_eq!(code(&reslab(&["train", "--config", s(&c), "--out", s(&out)])), 0);
    for &l in &cfg.depths {
        let log = RunLog::load(&out.join(format!("run_L{l}.csv")), l).unwrap();
        assert!(log.rows.iter().all(|r| r.loss == 0.0));
    }
}

#[test]
fn zero_weights_certify_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { init: InitKind::Zero, ..small() };
    let c = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("cert");
    let o = reslab(&["certify", "--config", s(&c), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let reports = parse_json_lines(&std::fs::read_to_string(out.join("certify.jsonl")).unwrap()).unwrap();
    assert!(reports.iter().all(|r| r.status != Status::Fail));
    assert!(reports.iter().any(|r| r.name == "hidden_lower" && r.status == Status::Pass));
}

#[test]
fn oversized_weights_are_inapplicable_not_failed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { beta0: 0.0, c_alpha: 0.01, ..small() };
    let c = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("cert");
    let o = reslab(&["certify", "--config", s(&c), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let reports = parse_json_lines(&std::fs::read_to_string(out.join("certify.jsonl")).unwrap()).unwrap();
    assert!(reports.iter().any(|r| r.status == Status::PreconditionViolated));
}

#[test]
fn single_depth_analysis_skips_fits_but_emits_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { depths: vec![8], ..small() };
    let c = write_config(tmp.path(), &cfg);
    let run = tmp.path().join("run");
    assert_eq!(code(&reslab(&["train", "--config", s(&c), "--out", s(&run)])), 0);
    let an = tmp.path().join("an");
    assert_eq!(code(&reslab(&["analyze", "--config", s(&c), "--out", s(&an), "--run", s(&run)])), 0);
    assert!(an.join("steps_to_eps_L8.csv").exists());
    assert!(!an.join("fit_fbar_initial.csv").exists());
}

#[test]
fn synthetic_power_law_weights_give_exact_exponents() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { t: 0, ..small() };
    let c = write_config(tmp.path(), &cfg);
    let run = tmp.path().join("run");
    assert_eq!(code(&reslab(&["train", "--config", s(&c), "--out", s(&run)])), 0);
    let base = Matrix::from_rows(&[vec![1.0, 2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]).unwrap();
    for &l in &cfg.depths {
        let lf = l as f64;
        let w = Weights::new(vec![base.scaled(lf.powf(-0.75)); l], lf.powf(-0.5)).unwrap();
        w.save(&run.join(format!("weights_L{l}.txt"))).unwrap();
    }
    let an = tmp.path().join("an");
    assert_eq!(code(&reslab(&["analyze", "--config", s(&c), "--out", s(&an), "--run", s(&run)])), 0);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(an.join("analysis.json")).unwrap()).unwrap();
    let fits = summary["fits"].as_array().unwrap();
    let exponent = |name: &str| fits.iter().find(|f| f[0] == name).unwrap()[1]["exponent"].as_f64().unwrap();
    assert!((exponent("weight_rms_final") - 0.75).abs() < 1e-12);
    assert!((exponent("delta_final") - 0.5).abs() < 1e-12);
    assert!((summary["total_scaling"].as_f64().unwrap() - 1.25).abs() < 1e-12);
}

#[test]
fn gradcheck_and_dataset_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { delta_trainable: true, ..small() };
    let c = write_config(tmp.path(), &cfg);
    let gc = tmp.path().join("gc");
    let o = reslab(&["gradcheck", "--config", s(&c), "--out", s(&gc)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(std::fs::read_to_string(gc.join("gradcheck.csv")).unwrap().lines().count(), 4);
    let ds = tmp.path().join("ds");
    assert_eq!(code(&reslab(&["dataset", "--config", s(&c), "--out", s(&ds), "--seed", "9"])), 0);
    let data = Dataset::load(&ds.join("dataset.csv")).unwrap();
    assert_eq!(data.seed, 9);
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"depths": []}"#).unwrap();
    assert_eq!(code(&reslab(&["train", "--config", s(&bad)])), 2);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&reslab(&["train", "--config", s(&bad)])), 2);
    assert_eq!(code(&reslab(&["train", "--config", s(&tmp.path().join("missing.json"))])), 2);
    assert_eq!(code(&reslab(&["analyze", "--run", s(&tmp.path().join("nothing")), "--out", s(&tmp.path().join("o"))])), 2);
    assert_eq!(code(&reslab(&["bogus"])), 2);
    assert_eq!(code(&reslab(&["train", "--threads", "0"])), 2);
    let sep = tmp.path().join("sep.json");
    let cfg = ExperimentConfig {
        d: 2,
        n: 4,
        input_mode: reslab::data::InputMode::Sphere,
        max_retries: 20,
        ..small()
    };
    std::fs::write(&sep, cfg.to_json()).unwrap();
    assert_eq!(code(&reslab(&["dataset", "--config", s(&sep), "--out", s(&tmp.path().join("o"))])), 2);
}

#[test]
fn divergence_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        activation: Activation::Identity,
        beta0: 0.0,
        eta0: 1e3,
        depths: vec![64],
        t: 50,
        ..small()
    };
    let c = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("run");
    let o = reslab(&["train", "--config", s(&c), "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let log = RunLog::load(&out.join("run_L64.csv"), 64).unwrap();
    assert!(!log.completed() || log.rows.len() < 51);
}
