use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn webclass(args: &[&str]) -> Output {
    webclass_env(args, &[])
}

fn webclass_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_webclass"));
    cmd.args(args);
    for var in [
        "WEBCLASS_SAMPLES",
        "WEBCLASS_SEED",
        "WEBCLASS_TOL_ZERO",
        "WEBCLASS_TOL_NONZERO",
        "WEBCLASS_BOX",
        "WEBCLASS_FORMAT",
    ] {
        cmd.env_remove(var);
    }
    cmd.envs(env.iter().copied());
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn export(dir: &Path) {
    let o = webclass(&["corpus", "--export", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn export_writes_every_example() {
    let dir = tempfile::tempdir().unwrap();
    export(dir.path());
    for n in 1..=18 {
        assert!(dir.path().join(format!("ex{n:02}.web")).exists(), "{n}");
    }
    assert!(dir.path().join("group.web").exists());
}

#[test]
fn classify_prints_the_row_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    export(dir.path());
    let o = webclass(&["classify", dir.path().join("ex01.web").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("classes: B C E11 F"), "{out}");
    assert!(out.contains("isoclinicity: NONISOCLINIC"), "{out}");
}

#[test]
fn classify_json_output() {
    let dir = tempfile::tempdir().unwrap();
    export(dir.path());
    let o = webclass(&[
        "classify",
        dir.path().join("group.web").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["isoclinicity"], "ISOCLINICLY_GEODESIC");
    assert_eq!(v["config"]["samples"], 20);
}

#[test]
fn environment_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    export(dir.path());
    let file = dir.path().join("ex01.web");
    let o = webclass_env(
        &["classify", file.to_str().unwrap()],
        &[("WEBCLASS_SEED", "7"), ("WEBCLASS_FORMAT", "json")],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["seed"], 7);

    let o = webclass_env(&["classify", file.to_str().unwrap()], &[("WEBCLASS_SAMPLES", "3")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invalid configuration"));
}

#[test]
fn undetermined_verdicts_exit_two() {
    let o = webclass(&["corpus", "--only", "16", "--tol-zero", "1e-30", "--tol-nonzero", "1e3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("undetermined:"));
}

#[test]
fn matching_corpus_rows_exit_zero() {
    let o = webclass(&["corpus", "--only", "1", "--only", "16", "--only", "group"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("16: A31 — C — E3 — G4"), "{out}");
    assert!(out.contains("3 examples, 0 class mismatches"), "{out}");
}

#[test]
fn mismatched_rows_exit_one_and_show_the_expected_row() {
    let o = webclass(&["corpus", "--only", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[expected"));
}

#[test]
fn parse_errors_report_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.web");
    fs::write(&file, "name = \"bad\"\nf1 = \"x1 + * y1\"\nf2 = \"x2 + y2\"\n").unwrap();
    let o = webclass(&["classify", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
}

#[test]
fn missing_file_exits_one() {
    let o = webclass(&["classify", "/nonexistent/web.web"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn invariants_at_a_point() {
    let dir = tempfile::tempdir().unwrap();
    export(dir.path());
    let file = dir.path().join("ex01.web");
    let o = webclass(&["invariants", file.to_str().unwrap(), "--at", "1,0,0,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("p = -0.0925925925925925"), "{}", stdout(&o));

    let o = webclass(&[
        "invariants",
        file.to_str().unwrap(),
        "--at",
        "1,0,0,2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["web"], "example-1");

    // x1*y2 = 1 is excluded
    let o = webclass(&["invariants", file.to_str().unwrap(), "--at", "1,0,0,1"]);
    assert_eq!(o.status.code(), Some(1));

    let o = webclass(&["invariants", file.to_str().unwrap(), "--at", "1,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}
