use std::path::Path;
use std::process::{Command, Output};

const DISK: &str = r#"
[domain]
kind = "disk"
radius = 1.0

[[function]]
id = "pole"
terms = [[1.0, 0.0, 0, 0.2, 0.0]]

[verify]
beta = [0.0, 0.5]
alpha = [1.0]
distance_points = 12
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exptype-verify")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn passing_verify_writes_reports_and_report_rereads_them() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), DISK);
    let out = dir.path().join("out");
    let o = run(&["verify", "oracle_distance", &config, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS oracle_distance: 12/12"));
    assert!(out.join("records.csv").exists() && out.join("records.json").exists());

    let o = run(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS oracle_distance: 12/12"));
}

#[test]
fn divergent_norm_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), DISK);
    // F(0) ≠ 0 makes the β = 1/2 norm infinite
    let o = run(&["norm", "pbeta", &config]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("func_id\tbeta\tvalue"));
    assert!(text.lines().any(|l| l.starts_with("pole\t0.5\tNaN")));
    assert!(text.lines().any(|l| l.starts_with("pole\t0\t")));
}

#[test]
fn failing_report_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("records.csv"),
        "check_id,domain,beta,func_id,lhs,rhs,constants,margin,status,err_estimate,runtime_ms\n\
         lemma2,disk,0,f0,2,1,,-0.5,fail,0,0\n",
    )
    .unwrap();
    let o = run(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL lemma2: 0/1"));
}

#[test]
fn bad_input_exits_two_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[domain]\nkind = \"disk\"\nradius = -1.0\n");
    let out = dir.path().join("out");
    let o = run(&["verify", "all", &config, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let good = write_config(dir.path(), DISK);
    let o = run(&["verify", "no_such_check", &good, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = run(&["report", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_info_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), DISK);
    let o = run(&["domain-info", &config]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["functions"][0], "pole");
    assert_eq!(v["metrics"]["circumradius"], 1.0);
    assert_eq!(v["constants"].as_array().unwrap().len(), 2);
}

#[test]
fn sample_config_is_valid() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/ellipse.toml");
    let o = run(&["domain-info", path]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
