//! End-to-end tests of the `roadauth` binary: interface contract, output
//! files, and byte-identical determinism under equal (config, seed).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_roadauth");

/// Small-but-complete configuration so every subcommand finishes quickly.
const FAST_CONFIG: &str = r#"
master_seed = 1

[sweep]
lq_db = [0.0, 20.0]
trials = 25

[roc]
lq_db = [20.0]
trials = 25
threshold_points = 10

[dataset]
slots_per_lq = 30

[model]
train_slots_per_lq = 30
"#;

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("ROADAUTH_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn roadauth")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, FAST_CONFIG).unwrap();
    path.display().to_string()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn sweep_writes_all_csvs_with_expected_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = run(
        &[
            "sweep",
            "--config",
            &cfg,
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().count() == 1 && stdout.contains("sweep: wrote 2 rows"));

    // First line is a `#`-prefixed provenance comment, then the header.
    let sweep = String::from_utf8(read(tmp.path(), "sweep.csv")).unwrap();
    let mut lines = sweep.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "lq_db,threshold,speed,pfa,pmd,pfa_baseline,pmd_baseline"
    );
    assert_eq!(lines.count(), 2);

    let header = |name: &str| {
        String::from_utf8(read(tmp.path(), name))
            .unwrap()
            .lines()
            .find(|l| !l.starts_with('#'))
            .unwrap()
            .to_string()
    };
    assert_eq!(
        header("pfa_vs_lq.csv"),
        "lq_db,threshold,speed,pfa,pfa_baseline"
    );
    assert_eq!(
        header("pmd_vs_lq.csv"),
        "lq_db,threshold,speed,pmd,pmd_baseline"
    );
}

#[test]
fn dataset_train_roc_bench_write_their_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out_dir = tmp.path().to_str().unwrap();
    for (sub, file, header) in [
        ("dataset", "dataset.csv", "lq_db,toa1"),
        ("train", "model.json", "{"),
        ("roc", "roc.csv", "lq_db,speed,threshold,pfa,pd"),
        ("bench", "bench.csv", "model,rmse,mse,mae,r2"),
    ] {
        let out = run(&[sub, "--config", &cfg, "--out", out_dir], &[]);
        assert!(
            out.status.success(),
            "{sub}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let body = String::from_utf8(read(tmp.path(), file)).unwrap();
        let first = body.lines().find(|l| !l.starts_with('#')).unwrap();
        assert!(
            first.starts_with(header),
            "{sub}: unexpected head of {file}: {first}"
        );
    }
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let dir = tmp.path().join("x");
    let dir_s = dir.to_str().unwrap();

    // Same config + seed, run twice into the same output dir: identical bytes.
    let out = run(
        &["bench", "--config", &cfg, "--seed", "7", "--out", dir_s],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first = read(&dir, "bench.csv");
    let out = run(
        &["bench", "--config", &cfg, "--seed", "7", "--out", dir_s],
        &[],
    );
    assert!(out.status.success());
    assert_eq!(first, read(&dir, "bench.csv"));

    // --seed 7 with master_seed = 1 in the file must equal a config whose
    // master_seed is 7 outright.
    let cfg7 = tmp.path().join("config7.toml");
    fs::write(
        &cfg7,
        FAST_CONFIG.replace("master_seed = 1", "master_seed = 7"),
    )
    .unwrap();
    let out = run(
        &["bench", "--config", cfg7.to_str().unwrap(), "--out", dir_s],
        &[],
    );
    assert!(out.status.success());
    assert_eq!(first, read(&dir, "bench.csv"));

    // And a different seed must change the metrics.
    let out = run(
        &["bench", "--config", &cfg, "--seed", "8", "--out", dir_s],
        &[],
    );
    assert!(out.status.success());
    assert_ne!(first, read(&dir, "bench.csv"));
}

#[test]
fn env_var_supplies_default_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let env_dir = tmp.path().join("from-env");
    let out = run(
        &["dataset", "--config", &cfg],
        &[("ROADAUTH_OUT", env_dir.to_str().unwrap())],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(env_dir.join("dataset.csv").exists());

    // --out wins over the environment variable.
    let flag_dir = tmp.path().join("from-flag");
    let out = run(
        &[
            "dataset",
            "--config",
            &cfg,
            "--out",
            flag_dir.to_str().unwrap(),
        ],
        &[("ROADAUTH_OUT", env_dir.to_str().unwrap())],
    );
    assert!(out.status.success());
    assert!(flag_dir.join("dataset.csv").exists());
}

#[test]
fn bad_invocations_fail_with_one_error_line() {
    // Unreadable config file: nonzero exit, error line naming the flag.
    let out = run(&["bench", "--config", "/no/such/file.toml"], &[]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().next().unwrap().starts_with("error: "));
    assert!(err.contains("--config"));

    // Unknown flag: nonzero exit.
    let out = run(&["bench", "--bogus"], &[]);
    assert!(!out.status.success());

    // Invalid config contents: nonzero exit with the machine-readable line.
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[sweep]\ntrials = 0\n").unwrap();
    let out = run(&["bench", "--config", bad.to_str().unwrap()], &[]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("error: ")).count(), 1);
}
