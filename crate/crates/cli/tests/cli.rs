//! End-to-end checks of the installed binary: artifact layout, byte-level
//! determinism of `bench`, and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_banditbench"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("banditbench-cli-tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn bench_emits_artifacts_and_is_byte_deterministic() {
    let out_a = tmp_dir("bench-a");
    let out_b = tmp_dir("bench-b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args([
                "bench",
                "--instance",
                "good",
                "--policies",
                "exact,ucb",
                "--horizon",
                "200",
                "--runs",
                "3",
                "--seed",
                "11",
                "--schedule",
                "practical",
                "--gamma",
                "1.0",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["results.csv", "summary.csv", "regret_good.svg"] {
        assert_eq!(
            read(&out_a.join(file)),
            read(&out_b.join(file)),
            "{file} differs between identical invocations"
        );
    }
    let results = String::from_utf8(read(&out_a.join("results.csv"))).unwrap();
    // header + 2 policies * 3 runs * 200 rounds
    assert_eq!(results.lines().count(), 1 + 2 * 3 * 200);
    assert!(results.starts_with("policy,run,t,arm,cum_regret\n"));
}

#[test]
fn bench_rejects_bad_config_with_exit_1() {
    let out = tmp_dir("bench-bad");
    let status = bin()
        .args(["bench", "--instance", "nonsense", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // UCB with horizon below the arm count is a config error too.
    let status = bin()
        .args([
            "bench",
            "--instance",
            "good",
            "--policies",
            "ucb",
            "--horizon",
            "5",
            "--runs",
            "1",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn bench_io_failure_exits_2() {
    let out = tmp_dir("bench-io");
    let blocker = out.join("blocked");
    std::fs::write(&blocker, b"file, not a directory").unwrap();
    let status = bin()
        .args([
            "bench",
            "--instance",
            "good",
            "--policies",
            "exact",
            "--horizon",
            "20",
            "--runs",
            "1",
            "--out",
        ])
        .arg(&blocker)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bench_custom_instance_roundtrip() {
    let out = tmp_dir("bench-custom");
    let cfg = out.join("instance.cfg");
    std::fs::write(
        &cfg,
        "# two arms\nreward_var = 1.0\nmean_1 = 1.0\nprior_mean_1 = 0.0\nprior_var_1 = 1.0\nmean_2 = 0.0\nprior_mean_2 = 0.0\nprior_var_2 = 1.0\n",
    )
    .unwrap();
    let status = bin()
        .args([
            "bench",
            "--instance",
            &format!("custom:{}", cfg.display()),
            "--policies",
            "exact,mixture",
            "--horizon",
            "100",
            "--runs",
            "2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("regret_custom.svg").exists());
}

#[test]
fn diagnose_writes_csv() {
    let out = tmp_dir("diagnose");
    let status = bin()
        .args([
            "diagnose",
            "--check",
            "subgaussian",
            "--n",
            "16,64",
            "--samples",
            "2000",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = String::from_utf8(read(&out.join("diagnostics.csv"))).unwrap();
    assert!(text.starts_with("check,n,empirical,bound,verdict\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);

    let status = bin()
        .args(["diagnose", "--check", "bogus", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn counterexample_reports_slope() {
    let out = tmp_dir("counterexample");
    let output = bin()
        .args([
            "counterexample",
            "--alpha",
            "0.5",
            "--horizon",
            "2000",
            "--runs",
            "5",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("log-log regret slope"), "{stdout}");
    assert!(out.join("results.csv").exists());
    assert!(out.join("regret_counterexample.svg").exists());
}
