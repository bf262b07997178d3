//! The binary's exit codes and output files.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-transfer"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn tmp(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("spectral-transfer-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn certified_run_exits_0_and_writes_reports() {
    let out = tmp("ok");
    let st = bin().args(["coarsen-transfer", "--config"]).arg(config("coarsen_path20.toml")).arg("--out").arg(&out).arg("--svg").output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    for f in ["summary.txt", "modes.csv", "bounds.csv", "scatter.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    // exit status agrees with the summary's verdict
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.txt")).unwrap()).unwrap();
    assert_eq!(summary["certified"], true);
    let rows = std::fs::read_to_string(out.join("modes.csv")).unwrap().lines().count() - 1;
    assert_eq!(summary["table_rows"]["modes.csv"], rows);
}

#[test]
fn seed_flag_overrides_the_config() {
    let (a, b) = (tmp("seed-a"), tmp("seed-b"));
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let st = bin().args(["perturb-stability", "--config"]).arg(config("perturb_rg100.toml")).args(["--seed", seed, "--out"]).arg(dir).output().unwrap().status;
        assert_eq!(st.code(), Some(0));
    }
    assert_ne!(std::fs::read(a.join("frobenius.csv")).unwrap(), std::fs::read(b.join("frobenius.csv")).unwrap());
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["coarsen-transfer", "--config", "/nonexistent/x.toml"]).output().unwrap().status.code(), Some(2));
    // config names a different experiment
    assert_eq!(bin().args(["mc-verify", "--config"]).arg(config("coarsen_path20.toml")).output().unwrap().status.code(), Some(2));
    let st = bin().env("SPECTRAL_TRANSFER_THREADS", "zero").args(["coarsen-transfer", "--config"]).arg(config("coarsen_path20.toml")).output().unwrap().status;
    assert_eq!(st.code(), Some(2));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn thread_cap_keeps_output_identical() {
    let (a, b) = (tmp("t1"), tmp("t4"));
    for (dir, t) in [(&a, "1"), (&b, "4")] {
        let st = bin().env("SPECTRAL_TRANSFER_THREADS", t).args(["circle-sampling", "--config"]).arg(config("circle_sampling.toml")).arg("--out").arg(dir).output().unwrap().status;
        assert_eq!(st.code(), Some(0));
    }
    assert_eq!(std::fs::read(a.join("trials.csv")).unwrap(), std::fs::read(b.join("trials.csv")).unwrap());
}
