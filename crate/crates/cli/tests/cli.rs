use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sunits"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn bertrand_json_emits_value() {
    let out = stdout(&[
        "bertrand", "--p", "2", "--q", "7", "--alpha", "3/2", "--materialize", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["value"], "131");
    assert_eq!(v[0]["end"]["a"], 2);
    assert_eq!(v[0]["end"]["b"], 2);
}

#[test]
fn neighbor_right_of_24() {
    let out = stdout(&["neighbor", "--p", "2", "--q", "3", "--right", "--a", "3", "--b", "1", "--format", "csv"]);
    assert_eq!(out.trim().lines().last().unwrap(), "0,3,27");
}

#[test]
fn sweep_reproduces_two_column_rows() {
    let out = stdout(&[
        "sweep", "--alpha", "5/3", "--pmax", "2", "--qmax", "100", "--format", "csv",
    ]);
    let lines: Vec<&str> = out.trim().lines().collect();
    assert_eq!(lines[0], "q,n_value");
    assert_eq!(lines.len(), 25);
    let fixture = [
        (3, 1u64), (5, 1), (7, 1), (11, 1), (13, 1), (17, 39322), (19, 154), (23, 10),
        (29, 279), (31, 274839850), (37, 615), (41, 20), (43, 20), (47, 20), (53, 20),
        (59, 66836), (61, 4358036), (67, 10066330), (71, 2458), (73, 2458), (79, 39),
        (83, 39), (89, 39), (97, 39),
    ];
    for (line, (q, n)) in lines[1..].iter().zip(fixture) {
        assert_eq!(*line, format!("{q},{n}"));
    }
}

#[test]
fn sweep_detail_layout_has_table_columns() {
    let out = stdout(&[
        "sweep", "--alpha", "3/2", "--pmax", "2", "--qmax", "7", "--detail", "--format", "csv",
    ]);
    let lines: Vec<&str> = out.trim().lines().collect();
    assert_eq!(
        lines[0],
        "p,q,alpha,a_start,b_start,a_end,b_end,iterations,len_start,len_n0,value_repr"
    );
    // rows sorted by (p, q): (2,3), (2,5), (2,7)
    assert!(lines[1].starts_with("2,3,3/2,"));
    assert!(lines[2].starts_with("2,5,3/2,"));
    assert!(lines[3].starts_with("2,7,3/2,"));
}

#[test]
fn gaps_csv_layout() {
    let out = stdout(&["gaps", "--p", "5", "--q", "7", "--l", "500", "--format", "csv"]);
    let lines: Vec<&str> = out.trim().lines().collect();
    assert_eq!(lines[0], "p,q,D1,D2,mu");
    assert!(lines[1].starts_with("5,7,1.1384784153,"));
}

#[test]
fn discriminator_per_n_csv() {
    let out = stdout(&["discriminator", "--exponent", "3", "--n-max", "10", "--format", "csv"]);
    let lines: Vec<&str> = out.trim().lines().collect();
    assert_eq!(lines[0], "n,disc,successor,equal");
    assert_eq!(lines.len(), 11);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn count_matches_enumeration() {
    let out = stdout(&["count", "--p", "2", "--q", "3", "--x", "1000", "--format", "csv"]);
    assert_eq!(out.trim().lines().last().unwrap(), "40");
}

#[test]
fn exit_codes() {
    // alpha above p: invalid spec
    let out = run(&["bertrand", "--p", "2", "--q", "3", "--alpha", "5/2"]);
    assert_eq!(out.status.code(), Some(2));
    // composite prime argument: invalid spec
    let out = run(&["bertrand", "--p", "4", "--q", "7", "--alpha", "3/2"]);
    assert_eq!(out.status.code(), Some(2));
    // clap-level parse failure
    let out = run(&["bertrand", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // discriminator ceiling: resource guard
    let out = run(&["discriminator", "--k", "1", "--n", "100", "--ceiling", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_is_deterministic() {
    let args = ["gaps", "--p", "3", "--q", "5", "--l", "300", "--format", "json"];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["sweep", "--alpha", "3/2", "--pmax", "5", "--qmax", "13", "--detail", "--format", "csv", "--workers", "3"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn pause_then_resume_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("job.ckpt");
    let cp_s = cp.to_str().unwrap();
    let full = stdout(&[
        "bertrand", "--p", "3", "--q", "83", "--alpha", "5/3", "--materialize", "--format", "json",
    ]);
    let paused = stdout(&[
        "bertrand", "--p", "3", "--q", "83", "--alpha", "5/3", "--materialize", "--format",
        "json", "--checkpoint", cp_s, "--pause-after", "700",
    ]);
    let v: serde_json::Value = serde_json::from_str(&paused).unwrap();
    assert_eq!(v["status"], "paused");
    assert!(cp.exists());
    let resumed = stdout(&[
        "bertrand", "--p", "3", "--q", "83", "--alpha", "5/3", "--materialize", "--format",
        "json", "--checkpoint", cp_s, "--resume",
    ]);
    assert_eq!(resumed, full);
    // the checkpoint is cleaned up after a completed run
    assert!(!cp.exists());
}

#[test]
fn cache_dir_env_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["convergents", "--p", "13", "--q", "89", "--min-denominator", "44875"])
        .env("SUNITS_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(has_files(dir.path()));
}

fn has_files(dir: &Path) -> bool {
    std::fs::read_dir(dir).map(|mut d| d.next().is_some()).unwrap_or(false)
}
