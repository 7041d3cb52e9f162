//! Binary-level tests: exit codes, file outputs, determinism, env overrides.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slaterank"))
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

#[test]
fn gen_data_train_simulate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let status = bin()
        .args([
            "gen-data",
            "--seed",
            "31",
            "--users",
            "25",
            "--items",
            "60",
            "--samples",
            "120",
            "--candidates",
            "10",
            "--list-len",
            "3",
        ])
        .arg("--out")
        .arg(&data_dir)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["schema.json", "world.json", "samples.jsonl"] {
        assert!(data_dir.join(f).is_file(), "{f} missing");
    }

    let train_dir = dir.path().join("eval");
    let status = bin()
        .args(["train", "evaluator", "--seed", "31", "--epochs", "2", "--list-len", "3"])
        .arg("--schema")
        .arg(data_dir.join("schema.json"))
        .arg("--data")
        .arg(data_dir.join("samples.jsonl"))
        .arg("--out")
        .arg(&train_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(train_dir.join("evaluator.ckpt.json").is_file());
    let csv = std::fs::read_to_string(train_dir.join("evaluator_metrics.csv")).unwrap();
    assert!(csv.starts_with("epoch,loss,auc\n"));
    assert_eq!(csv.lines().count(), 3);

    let gen_dir = dir.path().join("gen");
    let status = bin()
        .args([
            "train",
            "generator",
            "--seed",
            "31",
            "--epochs",
            "1",
            "--list-len",
            "3",
            "--mode",
            "naive",
            "--k",
            "4",
        ])
        .arg("--schema")
        .arg(data_dir.join("schema.json"))
        .arg("--data")
        .arg(data_dir.join("samples.jsonl"))
        .arg("--evaluator")
        .arg(train_dir.join("evaluator.ckpt.json"))
        .arg("--out")
        .arg(&gen_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(gen_dir.join("generator.ckpt.json").is_file());
    let csv = std::fs::read_to_string(gen_dir.join("generator_metrics.csv")).unwrap();
    assert!(csv.starts_with("epoch,mean_reward,average_ctr,selection_accuracy,rank_accuracy\n"));

    let sim_dir = dir.path().join("sim");
    let status = bin()
        .args([
            "simulate",
            "--seed",
            "31",
            "--days",
            "2",
            "--step",
            "1",
            "--requests-per-day",
            "40",
            "--candidates",
            "10",
            "--list-len",
            "3",
            "--k",
            "4",
        ])
        .arg("--out")
        .arg(&sim_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(sim_dir.join("day_metrics.csv")).unwrap();
    assert!(csv
        .starts_with("day,winning_rate,item_selection_accuracy,rank_accuracy,realized_ctr,evaluator_auc\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn gen_data_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let status = bin()
            .args([
                "gen-data",
                "--seed",
                "32",
                "--users",
                "15",
                "--items",
                "40",
                "--samples",
                "60",
                "--candidates",
                "8",
                "--list-len",
                "3",
            ])
            .arg("--out")
            .arg(dir.path().join(sub))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in ["schema.json", "world.json", "samples.jsonl"] {
        assert_eq!(
            read(&dir.path().join("a").join(f)),
            read(&dir.path().join("b").join(f)),
            "{f} differs"
        );
    }
}

#[test]
fn missing_dataset_exits_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["train", "evaluator", "--seed", "33"])
        .arg("--schema")
        .arg(dir.path().join("nope.json"))
        .arg("--data")
        .arg(dir.path().join("nope.jsonl"))
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn zero_users_exits_with_warning_status() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["gen-data", "--seed", "34", "--users", "0", "--samples", "10"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(10));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    let samples = std::fs::read_to_string(dir.path().join("samples.jsonl")).unwrap();
    assert!(samples.is_empty());
}

#[test]
fn invalid_step_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", "--seed", "35", "--days", "1", "--step", "3"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn env_vars_mirror_flags() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["gen-data", "--users", "10", "--samples", "15", "--candidates", "8", "--list-len", "3", "--items", "30"])
        .arg("--out")
        .arg(dir.path().join("env"))
        .env("SLATERANK_SEED", "36")
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args([
            "gen-data", "--seed", "36", "--users", "10", "--samples", "15", "--candidates", "8",
            "--list-len", "3", "--items", "30",
        ])
        .arg("--out")
        .arg(dir.path().join("flag"))
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        read(&dir.path().join("env").join("samples.jsonl")),
        read(&dir.path().join("flag").join("samples.jsonl"))
    );
}

#[test]
fn simulate_reruns_are_byte_identical_and_steps_differ() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, step: &str| {
        let status = bin()
            .args([
                "simulate",
                "--seed",
                "37",
                "--days",
                "2",
                "--step",
                step,
                "--step1-days",
                "1",
                "--ramp-day",
                "1",
                "--requests-per-day",
                "30",
                "--candidates",
                "8",
                "--list-len",
                "3",
                "--k",
                "4",
            ])
            .arg("--out")
            .arg(dir.path().join(sub))
            .status()
            .unwrap();
        assert!(status.success());
        read(&dir.path().join(sub).join("day_metrics.csv"))
    };
    let a1 = run("s1a", "1");
    let a2 = run("s1b", "1");
    assert_eq!(a1, a2);
    let b1 = run("s2a", "2");
    let b2 = run("s2b", "2");
    assert_eq!(b1, b2);
    assert_ne!(a1, b1, "step 1 and step 2 wrote identical metrics");
    // identical schema line either way
    let header = |bytes: &[u8]| String::from_utf8_lossy(bytes).lines().next().unwrap().to_string();
    assert_eq!(header(&a1), header(&b1));
}
