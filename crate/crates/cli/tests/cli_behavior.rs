//! End-to-end checks of the binary's contract: exit codes, verdict text,
//! flag-over-file precedence, output-directory override, and the
//! no-partial-file guarantee.

use std::path::Path;
use std::process::{Command, Output};

fn cbmm(args: &[&str], envs: &[(&str, &str)], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbmm"))
        .args(args)
        .envs(envs.iter().copied())
        .current_dir(cwd)
        .output()
        .expect("spawn cbmm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn saddle_point_start_gives_all_zero_gap_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(
        &[
            "run", "--experiment", "synthetic", "--algorithm", "cb_min_max", "--x0", "0",
            "--y0", "0", "--T", "10", "--output", "zero.csv",
        ],
        &[],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("zero.csv")).unwrap();
    let gaps: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(gaps.len(), 10);
    assert!(gaps.iter().all(|&g| g == "0"), "gap column: {gaps:?}");
}

#[test]
fn compare_synthetic_cb_vs_pdg_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(
        &[
            "compare",
            "--set-a", "experiment=synthetic", "--set-a", "algorithm=cb_min_max",
            "--set-a", "T=2000",
            "--set-b", "experiment=synthetic", "--set-b", "algorithm=pdg",
            "--set-b", "T=2000",
            "--output", "cmp.csv",
        ],
        &[],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("verdict: cb_min_max lower final dist"),
        "stdout: {}",
        stdout(&out)
    );
    let text = std::fs::read_to_string(dir.path().join("cmp.csv")).unwrap();
    assert!(text.starts_with("iteration,elapsed_s_a,"));
}

#[test]
fn compare_identical_sides_is_a_tie() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(
        &[
            "compare",
            "--set-a", "experiment=synthetic", "--set-a", "algorithm=cb_min_max",
            "--set-a", "T=200",
            "--set-b", "experiment=synthetic", "--set-b", "algorithm=cb_min_max",
            "--set-b", "T=200",
            "--output", "tie.csv",
        ],
        &[],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("verdict: tie"), "stdout: {}", stdout(&out));
}

#[test]
fn compare_rejects_mismatched_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(
        &[
            "compare",
            "--set-a", "experiment=synthetic", "--set-a", "algorithm=cb_min_max",
            "--set-a", "T=100",
            "--set-b", "experiment=synthetic", "--set-b", "algorithm=pdg",
            "--set-b", "T=200",
        ],
        &[],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "experiment = synthetic\nalgorithm = cb_min_max\nT = 50\nx0 = 1\ny0 = 1\noutput = from_file.csv\n",
    )
    .unwrap();
    let out = cbmm(
        &[
            "run", "--config", cfg.to_str().unwrap(), "--T", "7", "--output", "from_flag.csv",
        ],
        &[],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(!dir.path().join("from_file.csv").exists());
    let text = std::fs::read_to_string(dir.path().join("from_flag.csv")).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("7,"), "flag budget should win: {last}");
}

#[test]
fn out_dir_variable_prefixes_relative_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let out = cbmm(
        &[
            "run", "--experiment", "synthetic", "--algorithm", "cb_min_max", "--T", "5",
        ],
        &[("CBMM_OUT_DIR", target.to_str().unwrap())],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(target.join("synthetic_cb_min_max.csv").exists());
    assert!(!dir.path().join("synthetic_cb_min_max.csv").exists());
}

#[test]
fn numerical_failure_exits_4_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(
        &[
            "run", "--experiment", "synthetic", "--algorithm", "cb_min_max", "--T", "50",
            "--g-x", "1e-9", "--output", "never.csv",
        ],
        &[],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("numerical error at iteration 1"), "{}", stderr(&out));
    assert!(!dir.path().join("never.csv").exists());
}

#[test]
fn successful_run_replaces_existing_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("out.csv"), "stale contents\n").unwrap();
    let out = cbmm(
        &[
            "run", "--experiment", "synthetic", "--algorithm", "cb_min_max", "--T", "5",
            "--output", "out.csv",
        ],
        &[],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(text.starts_with("iteration,"));
    assert!(!text.contains("stale"));
}

#[test]
fn summary_line_reports_final_gap_and_dist() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(
        &[
            "run", "--experiment", "synthetic", "--algorithm", "cb_min_max", "--T", "25",
            "--output", "s.csv",
        ],
        &[],
        dir.path(),
    );
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "exactly one summary line: {text}");
    assert!(text.contains("final gap"));
    assert!(text.contains("final dist"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cbmm(&["run", "--config", "/no/such/file.cfg"], &[], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("config"), "{}", stderr(&out));
}
