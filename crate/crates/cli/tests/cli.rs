use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
total_steps = 120
seed_frames = 40
exploration_steps = 20
batch_size = 256
eval_interval = 60
eval_episodes = 2
image_size = 21
hidden_dim = 32
num_filters = 8
num_conv_layers = 2
features_dim = 16
episode_length = 30
max_shift_px = 4
pad_px = 2
checkpoint_interval = 60
";

fn sada(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sada")).args(args).output().expect("spawn sada")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn train_tiny(dir: &Path, seed: u64) -> std::path::PathBuf {
    let cfg = dir.join("tiny.txt");
    std::fs::write(&cfg, TINY).unwrap();
    let out = dir.join(format!("run{seed}"));
    let o = sada(&[
        "train", "--config", s(&cfg), "--batch-size", "16", "--seed", &seed.to_string(), "--out", s(&out), "--quiet",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn flags_override_config_file() {
    let t = tempfile::tempdir().unwrap();
    let run = train_tiny(t.path(), 0);
    let cfg = std::fs::read_to_string(run.join("config.txt")).unwrap();
    assert!(cfg.lines().any(|l| l == "batch_size = 16"), "{cfg}");
    assert!(cfg.lines().any(|l| l == "image_size = 21"));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["batch_size"], "16");
    assert!(manifest["ended_unix"].is_null());
    let done: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("completed.json")).unwrap()).unwrap();
    assert_eq!(done["steps"], 120);
    assert!(run.join("checkpoints/step_00000060.safetensors").exists());
}

#[test]
fn invalid_values_exit_two() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("x");
    let o = sada(&["train", "--gamma", "1.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
    assert!(!out.join("manifest.json").exists());
    assert_eq!(sada(&["train", "--recipe", "nope"]).status.code(), Some(2));
    assert_eq!(sada(&["train", "--no-such-flag", "1"]).status.code(), Some(2));
}

#[test]
fn existing_run_directory_is_not_overwritten() {
    let t = tempfile::tempdir().unwrap();
    let run = train_tiny(t.path(), 0);
    let o = sada(&["train", "--total-steps", "10", "--seed-frames", "5", "--batch-size", "4", "--out", s(&run)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plots_are_deterministic_and_single_seed_band_is_flat() {
    let t = tempfile::tempdir().unwrap();
    let run = train_tiny(t.path(), 3);
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    for out in [&a, &b] {
        let o = sada(&["plot", "--runs", s(&run), "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["training_curve.png", "training_curve.svg", "training_curve.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("training_curve.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let c: Vec<f64> = r.split(',').skip(3).map(|v| v.parse().unwrap()).collect();
        assert_eq!(c[0], c[1]);
        assert_eq!(c[0], c[2]);
    }
}

#[test]
fn corrupt_metrics_are_named() {
    let t = tempfile::tempdir().unwrap();
    let run = train_tiny(t.path(), 0);
    std::fs::write(run.join("eval.csv"), "garbage\n").unwrap();
    let o = sada(&["plot", "--runs", s(&run), "--out", s(&t.path().join("p"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eval.csv"));
}

#[test]
fn eval_writes_report_and_stats_reads_it() {
    let t = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for seed in 0..2 {
        let run = train_tiny(t.path(), seed);
        let out = t.path().join(format!("r{seed}.json"));
        let o = sada(&[
            "eval", "--checkpoint", s(&run.join("checkpoints/latest.safetensors")), "--episodes", "2",
            "--distributions", "train,shift_hard", "--out", s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["step"], 120);
        assert_eq!(v["distributions"].as_array().unwrap().len(), 2);
        reports.push(out);
    }
    let stats = t.path().join("stats.json");
    let o = sada(&[
        "stats", "--treatment", s(&reports[0]), s(&reports[1]), "--baseline", s(&reports[1]), s(&reports[0]),
        "--out", s(&stats),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["reject"], false);
}

#[test]
fn resume_continues_a_run() {
    let t = tempfile::tempdir().unwrap();
    let run = train_tiny(t.path(), 0);
    let o = sada(&[
        "train", "--resume", s(&run.join("checkpoints/latest.safetensors")), "--total-steps", "180", "--quiet",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run.join("checkpoints/step_00000180.safetensors").exists());
    assert!(run.join("resumes.log").exists());
}

#[test]
fn renders_and_oracles() {
    let t = tempfile::tempdir().unwrap();
    let augs = t.path().join("augs");
    assert!(sada(&["render-augs", "--image-size", "21", "--max-shift-px", "4", "--pad-px", "2", "--out", s(&augs)]).status.success());
    for f in ["original.png", "weak_shift.png", "rotate.png", "conv_overlay.png", "all.png"] {
        assert!(augs.join(f).exists(), "{f}");
    }
    let sets = t.path().join("sets");
    assert!(sada(&["render-testsets", "--image-size", "21", "--max-shift-px", "4", "--pad-px", "2", "--out", s(&sets)]).status.success());
    assert!(sets.join("video_hard.png").exists());
    let o = sada(&["oracle", "--filter", "welch"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS welch_textbook"));
}
