//! End-to-end tests of the `mlweave` binary: artifact writing, flag
//! validation, reproducibility, and the store/raw training equivalence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mlweave::weaving::WeavingStore;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mlweave"))
}

fn run_ok(args: &[&str], dir: &Path) -> String {
    let out = binary().args(args).current_dir(dir).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn run_err(args: &[&str], dir: &Path) -> Output {
    let out = binary().args(args).current_dir(dir).output().expect("spawn");
    assert!(!out.status.success(), "command {:?} unexpectedly succeeded", args);
    out
}

/// Writes a deterministic 64-sample, 8-feature regression set in sparse
/// format (every 5th entry omitted, so missing-index handling is hit too).
fn write_libsvm(path: &Path) {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let weights = [0.5, -0.25, 0.125, 0.75, -0.5, 0.25, -0.125, 0.3];
    let mut text = String::new();
    for row in 0..64 {
        let values: Vec<f64> = (0..8).map(|_| next()).collect();
        let label: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
        text.push_str(&format!("{label:.6}"));
        for (j, v) in values.iter().enumerate() {
            if (row + j) % 5 != 4 {
                text.push_str(&format!(" {}:{v:.6}", j + 1));
            }
        }
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    write_libsvm(&root.join("data.svm"));
    Workspace { _dir: dir, root }
}

#[test]
fn train_writes_metrics_and_model() {
    let ws = workspace();
    let stdout = run_ok(
        &[
            "train", "--dataset", "data.svm", "--loss", "linreg", "--precision", "8",
            "--bits", "8", "--batch", "8", "--lr-shift", "7", "--epochs", "5",
            "--metrics-out", "metrics.csv", "--model-out", "model.json",
        ],
        &ws.root,
    );
    assert!(stdout.contains("epoch   5"));

    let metrics = std::fs::read_to_string(ws.root.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "epoch,s,loss,traffic_bits,wall_ms,predicted_ms");
    assert_eq!(lines.len(), 6, "header + one row per epoch");

    // Loss column strictly decreases over these five epochs.
    let losses: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for pair in losses.windows(2) {
        assert!(pair[1] < pair[0], "loss went {} -> {}", pair[0], pair[1]);
    }

    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ws.root.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["dims"], 8);
    assert_eq!(model["fractional_bits"], 24);
    assert_eq!(model["weights_raw"].as_array().unwrap().len(), 8);
    let w0 = model["weights"][0].as_f64().unwrap();
    let raw0 = model["weights_raw"][0].as_i64().unwrap();
    assert_eq!(w0, raw0 as f64 / (1u64 << 24) as f64);
}

#[test]
fn dynamic_schedule_column_follows_the_ramp() {
    let ws = workspace();
    run_ok(
        &[
            "train", "--dataset", "data.svm", "--precision", "schedule", "--epochs", "10",
            "--metrics-out", "metrics.csv",
        ],
        &ws.root,
    );
    let metrics = std::fs::read_to_string(ws.root.join("metrics.csv")).unwrap();
    let s_column: Vec<u8> = metrics
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(s_column, vec![2, 2, 2, 2, 3, 3, 3, 3, 4, 4]);
}

#[test]
fn non_multiple_of_8_batch_is_rejected() {
    let ws = workspace();
    let out = run_err(
        &["train", "--dataset", "data.svm", "--batch", "12", "--epochs", "1"],
        &ws.root,
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("multiple of 8"), "stderr was: {stderr}");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn metrics_are_byte_identical_across_runs() {
    let ws = workspace();
    let args = [
        "train", "--dataset", "data.svm", "--precision", "schedule", "--epochs", "8",
        "--seed", "42", "--metrics-out",
    ];
    for name in ["a.csv", "b.csv"] {
        let mut full: Vec<&str> = args.to_vec();
        full.push(name);
        run_ok(&full, &ws.root);
    }
    let a = std::fs::read(ws.root.join("a.csv")).unwrap();
    let b = std::fs::read(ws.root.join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn training_from_store_equals_training_from_raw() {
    let ws = workspace();
    run_ok(
        &["weave", "--dataset", "data.svm", "--bits", "16", "--out", "data.mlwv"],
        &ws.root,
    );
    // The woven file loads and has the right shape.
    let store = WeavingStore::load_from_path(ws.root.join("data.mlwv")).unwrap();
    assert_eq!((store.rows(), store.cols(), store.max_precision()), (64, 8, 16));

    let common = ["--precision", "4", "--epochs", "6", "--lr-shift", "6", "--seed", "9"];
    let mut from_raw = vec![
        "train", "--dataset", "data.svm", "--bits", "16",
        "--metrics-out", "raw.csv", "--model-out", "raw.json",
    ];
    from_raw.extend_from_slice(&common);
    run_ok(&from_raw, &ws.root);

    let mut from_store = vec![
        "train", "--store", "data.mlwv",
        "--metrics-out", "store.csv", "--model-out", "store.json",
    ];
    from_store.extend_from_slice(&common);
    run_ok(&from_store, &ws.root);

    assert_eq!(
        std::fs::read(ws.root.join("raw.csv")).unwrap(),
        std::fs::read(ws.root.join("store.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(ws.root.join("raw.json")).unwrap(),
        std::fs::read(ws.root.join("store.json")).unwrap()
    );
}

#[test]
fn dataset_and_store_are_mutually_exclusive() {
    let ws = workspace();
    let out = run_err(
        &["train", "--dataset", "data.svm", "--store", "x.mlwv"],
        &ws.root,
    );
    // Rejected by flag parsing, before any file is touched.
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn malformed_dataset_reports_file_and_line() {
    let ws = workspace();
    std::fs::write(ws.root.join("bad.svm"), "1 1:0.5\n1 0:0.5\n").unwrap();
    let out = run_err(&["train", "--dataset", "bad.svm", "--epochs", "1"], &ws.root);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.svm:2"), "stderr was: {stderr}");
}

#[test]
fn bench_grids_agree_with_the_model() {
    let ws = workspace();
    let stdout = run_ok(
        &[
            "bench", "--features", "2048,4096", "--precisions", "2,8", "--batches", "10000",
            "--surface-features", "500,5000", "--surface-precisions", "1,2,4,8",
            "--agreement-out", "agree.csv", "--surface-out", "surface.csv",
        ],
        &ws.root,
    );
    assert!(stdout.contains("agreement grid (4 cells)"));

    let agree = std::fs::read_to_string(ws.root.join("agree.csv")).unwrap();
    let mut saw_reference_cell = false;
    for line in agree.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let (m, s) = (fields[0] as u64, fields[1] as u8);
        let (chain_ratio, no_chain_ratio) = (fields[7], fields[8]);
        assert!((0.98..=1.02).contains(&chain_ratio), "M={m} s={s}: {chain_ratio}");
        assert!((0.98..=1.02).contains(&no_chain_ratio), "M={m} s={s}: {no_chain_ratio}");
        if m == 2048 && s == 8 {
            saw_reference_cell = true;
            assert!((fields[3] - 14.8).abs() < 0.05, "chaining column: {}", fields[3]);
            assert!((fields[4] - 11.54).abs() < 0.05, "no-chaining column: {}", fields[4]);
        }
    }
    assert!(saw_reference_cell);

    let surface = std::fs::read_to_string(ws.root.join("surface.csv")).unwrap();
    for line in surface.lines().skip(1) {
        let speedup: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(speedup >= 1.0, "chaining lost on row {line}");
    }
}

#[test]
fn empty_bench_grid_is_a_usage_error() {
    let ws = workspace();
    run_err(&["bench", "--features", "", "--precisions", "1"], &ws.root);
}

#[test]
fn predict_reports_both_modes() {
    let ws = workspace();
    let stdout = run_ok(
        &["predict", "--features", "2048", "--precision", "8", "--batch", "8"],
        &ws.root,
    );
    assert!(stdout.contains("th_comp=21.005"), "stdout was: {stdout}");
    assert!(stdout.contains("th_comp=11.538"));
    assert!(stdout.contains("th=14.800"));
    assert!(stdout.contains("speedup (epoch-time ratio): 1.283"));
    assert!(stdout.contains("traffic per sample: 16416 bits"));
}

#[test]
fn memory_profile_flag_and_env_are_honored() {
    let ws = workspace();
    std::fs::write(ws.root.join("slow.profile"), "# half-speed platform\n1 5.0\n4 7.0\n").unwrap();

    let stdout = run_ok(
        &[
            "predict", "--features", "2048", "--precision", "8",
            "--mem-profile", "slow.profile",
        ],
        &ws.root,
    );
    assert!(stdout.contains("th_mem=7.000"), "stdout was: {stdout}");

    // Same profile through the environment variable.
    let out = binary()
        .args(["predict", "--features", "2048", "--precision", "8"])
        .env("MLWEAVE_MEM_PROFILE", ws.root.join("slow.profile"))
        .current_dir(&ws.root)
        .output()
        .expect("spawn");
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("th_mem=7.000"));
}

#[test]
fn quantize_writes_a_report() {
    let ws = workspace();
    let stdout = run_ok(
        &["quantize", "--dataset", "data.svm", "--bits", "6", "--report", "report.json"],
        &ws.root,
    );
    assert!(stdout.contains("64 rows x 8 cols at S=6"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ws.root.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"], 64);
    assert_eq!(report["cols"], 8);
    assert_eq!(report["bits"], 6);
    assert_eq!(report["ranges"].as_array().unwrap().len(), 8);
}

#[test]
fn csv_datasets_are_accepted() {
    let ws = workspace();
    std::fs::write(
        ws.root.join("data.csv"),
        "0.5,0.1,0.9\n-0.5,0.8,0.2\n0.25,0.4,0.6\n0.1,0.3,0.3\n0.0,0.2,0.7\n0.6,0.9,0.1\n-0.2,0.5,0.5\n0.3,0.6,0.4\n",
    )
    .unwrap();
    let stdout = run_ok(
        &[
            "train", "--dataset", "data.csv", "--format", "csv", "--bits", "8",
            "--precision", "8", "--epochs", "2",
        ],
        &ws.root,
    );
    assert!(stdout.contains("8 rows x 2 cols"));
}
