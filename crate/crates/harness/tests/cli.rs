use std::process::Command;

use clap::Parser;
use focal_harness::cli::{dispatch, Cli};
use focal_harness::config::ExperimentConfig;
use focal_harness::table1::{defaults_from_table1, RankClass};

fn focal() -> Command {
    Command::new(env!("CARGO_BIN_EXE_focal"))
}

#[test]
fn run_requires_a_seed() {
    assert!(Cli::try_parse_from(["focal", "run", "--landscape", "sphere"]).is_err());
    let out = focal()
        .args(["run", "--landscape", "sphere"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "budget = 100\n[landscape]\nname = \"sphere\"\nn = 4\n",
    )
    .unwrap();
    let out = focal()
        .args(["run", "--seed", "1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    std::fs::write(
        &cfg,
        "seed = 1\nbogus = 2\n[landscape]\nname = \"sphere\"\nn = 4\n",
    )
    .unwrap();
    let out = focal()
        .args(["run", "--seed", "1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = focal()
        .args(["run", "--seed", "1", "--landscape", "nope"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\nbudget = 900\nkernel = \"sep-cma\"\n[landscape]\nname = \"ellipse\"\nn = 6\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let cli = Cli::try_parse_from([
        "focal",
        "run",
        "--seed",
        "7",
        "--config",
        cfg.to_str().unwrap(),
        "--budget",
        "600",
        "--c-cov",
        "0.05",
        "--switchover",
        "immediate",
        "--output",
        out_dir.to_str().unwrap(),
    ])
    .unwrap();
    let printed = dispatch(cli).unwrap();
    assert!(printed.contains("seed = 7"));
    let written = ExperimentConfig::load(&out_dir.join("config.toml")).unwrap();
    assert_eq!(written.seed, 7);
    assert_eq!(written.budget, 600);
    assert_eq!(written.kernel, focal_harness::config::Kernel::SepCma);
    assert_eq!(written.focal.c_cov, Some(0.05));
    assert_eq!(written.landscape.dim(), 6);
}

#[test]
fn binary_runs_and_compares() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, sub: &str| {
        let out = focal()
            .args([
                "run",
                "--landscape",
                "ellipse",
                "--n",
                "6",
                "--noise",
                "0",
                "--budget",
                "1200",
                "--seed",
                seed,
                "--output",
            ])
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let checksum = |s: &str| {
        s.lines()
            .find(|l| l.starts_with("trace_checksum"))
            .unwrap()
            .to_string()
    };
    assert_eq!(checksum(&a), checksum(&b));

    let out = focal()
        .arg("compare")
        .arg(dir.path().join("a/spectrum.csv"))
        .arg(dir.path().join("b/spectrum.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("log_rms_error = 0.0000000000000000e0"));
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("sweep");
    let cli = Cli::try_parse_from([
        "focal",
        "sweep",
        "--landscape",
        "sphere",
        "--n",
        "4",
        "--budget",
        "400",
        "--seeds",
        "0..2",
        "--c-cov-grid",
        "0.05,0.1",
        "--threads",
        "2",
        "--output",
        root.to_str().unwrap(),
    ])
    .unwrap();
    dispatch(cli).unwrap();
    let summary = std::fs::read_to_string(root.join("sweep.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    for label in [
        "seed0_ccov0.05",
        "seed0_ccov0.1",
        "seed1_ccov0.05",
        "seed1_ccov0.1",
    ] {
        assert!(root.join(label).join("trace.csv").exists(), "{label}");
        assert!(summary.contains(label));
    }
}

#[test]
fn table1_rows_and_extrapolation() {
    let d = defaults_from_table1(80, RankClass::FullRank);
    assert_eq!((d.c_cov, d.alpha), (0.04, 0.10));
    let d = defaults_from_table1(30, RankClass::RankDeficient);
    assert_eq!((d.c_cov, d.alpha), (0.10, 0.25));
    let d = defaults_from_table1(50, RankClass::FullRank);
    assert_eq!((d.c_cov, d.alpha), (0.06, 0.15));
    assert!(d.warning.is_none());

    let far = defaults_from_table1(200, RankClass::FullRank);
    assert_eq!((far.c_cov, far.alpha), (0.04, 0.10));
    assert!(far.warning.is_some());
    let near = defaults_from_table1(10, RankClass::RankDeficient);
    assert_eq!((near.c_cov, near.alpha), (0.10, 0.25));
    assert!(near.warning.is_some());

    let printed = dispatch(
        Cli::try_parse_from(["focal", "table1", "--n", "80", "--rank-class", "full-rank"]).unwrap(),
    )
    .unwrap();
    assert!(printed.contains("c_cov=0.0400") && printed.contains("alpha=0.1000"));
}
