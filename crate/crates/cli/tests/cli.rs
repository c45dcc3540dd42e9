use std::path::PathBuf;
use std::process::{Command, Output};

fn ppwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppwalk")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ppwalk(&[]).status.code(), Some(1));
    assert_eq!(ppwalk(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ppwalk(&["scaling", "--set", "L_list=8,4"]).status.code(), Some(1));
    assert_eq!(ppwalk(&["scaling", "--set", "nonsense"]).status.code(), Some(1));
    let help = ppwalk(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("scaling"));
}

#[test]
fn two_point_cheeger_constant() {
    let pts = scratch("pair.csv");
    std::fs::write(&pts, "0,0\n1,0\n").unwrap();
    let out = ppwalk(&["cheeger", "--points", pts.to_str().unwrap(), "--alpha", "1", "--model", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let phi: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("phi = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((phi - 1.0).abs() < 1e-12, "{text}");
}

#[test]
fn runtime_errors_exit_two() {
    let pts = scratch("single.csv");
    std::fs::write(&pts, "0.5,0.5\n").unwrap();
    let out = ppwalk(&["cheeger", "--points", pts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = scratch("does_not_exist.csv");
    let out = ppwalk(&["spectrum", "--points", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scaling_writes_table() {
    let csv = scratch("scaling.csv");
    let _ = std::fs::remove_file(&csv);
    let out = ppwalk(&[
        "scaling",
        "--set",
        "L_list=3,4,6",
        "--seeds",
        "0..3",
        "--model",
        "2",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("L,seed,n,"));
    assert_eq!(lines.count(), 9);
    assert!(stdout(&out).contains("fit poincare"));
}

#[test]
fn sample_round_trips_through_spectrum() {
    let pts = scratch("sample.csv");
    let out = ppwalk(&["sample", "--side", "4", "--seeds", "7", "--output", pts.to_str().unwrap()]);
    assert!(out.status.success());
    let a = ppwalk(&["spectrum", "--points", pts.to_str().unwrap(), "--json"]);
    let b = ppwalk(&["spectrum", "--side", "4", "--seeds", "7", "--json"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn percolation_sweep_table() {
    let dump = scratch("field.rle");
    let out = ppwalk(&[
        "perc", "--n", "32", "--p", "0.9", "--cube-side", "8", "--seeds", "0..4", "--dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
    assert!(std::fs::read_to_string(&dump).unwrap().lines().count() == 32);
}
