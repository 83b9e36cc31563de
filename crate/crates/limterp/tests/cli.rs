use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn limterp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limterp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const THETA_L2: &str = r#"{"kind":"theta","theta":0.5,"b":{"kind":"const","c":1},"E":{"q":2}}"#;

#[test]
fn norm_of_indicator_in_theta_space() {
    // K(t, χ_(0,1/2)) = min(t, 1/2), so the squared norm in (L1,L∞)_{1/2,2}
    // is ∫_0^{1/2} dt + ∫_{1/2}^∞ t^{-2}/4 dt = 1.
    let d = tempfile::tempdir().unwrap();
    let space = write(d.path(), "theta.json", THETA_L2);
    let o = limterp(&["norm", "--space", &space, "--fn", "chi:0.5", "--grid", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let v: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("norm = "))
        .expect("norm line")
        .parse()
        .unwrap();
    assert!((v - 1.0).abs() < 1e-4, "{v}");
    assert!(out.contains("admissibility"));
}

#[test]
fn zero_function_has_zero_norm() {
    let d = tempfile::tempdir().unwrap();
    let space = write(d.path(), "theta.json", THETA_L2);
    let o = limterp(&["norm", "--space", &space, "--fn", "0*chi:1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("norm = 0\n"));
}

#[test]
fn trivial_space_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let space = write(d.path(), "t.json", r#"{"kind":"theta","theta":1,"b":{"kind":"const","c":1},"E":{"q":1}}"#);
    let o = limterp(&["norm", "--space", &space, "--fn", "chi:0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
    assert!(stderr(&o).contains("trivial"));
}

#[test]
fn input_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let bad = write(d.path(), "bad.json", r#"{"kind":"theta","theta":2,"b":{"kind":"const","c":1},"E":{"q":1}}"#);
    assert_eq!(limterp(&["norm", "--space", &bad, "--fn", "chi:0.5"]).status.code(), Some(1));
    let ok = write(d.path(), "ok.json", THETA_L2);
    assert_eq!(limterp(&["norm", "--space", &ok, "--fn", "nope:1"]).status.code(), Some(1));
    assert_eq!(limterp(&["norm", "--space", &ok, "--fn", "chi:0.5", "--grid", "30"]).status.code(), Some(1));
    assert_eq!(limterp(&["norm", "--space", "/nonexistent.json", "--fn", "chi:0.5"]).status.code(), Some(1));
    assert_eq!(limterp(&["frobnicate"]).status.code(), Some(1));
    let o = limterp(&["verify", "holmstedt", "--case", "R_x0", "--n", "500"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("power of two"));
}

#[test]
fn unknown_ids_list_the_alternatives() {
    let o = limterp(&["verify", "identity", "--name", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ultra-as-theta, grand-as-R"));
    let o = limterp(&["verify", "holmstedt", "--case", "R_middle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("R_interior, R_theta0_zero, R_x0"));
    let o = limterp(&["verify", "reiteration", "--case", "ThmQ"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ThmR_interior"));
}

#[test]
fn verify_writes_reports_and_applies_thresholds() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = limterp(&["verify", "identity", "--name", "ultra-as-theta", "--corpus", "chi", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("identity-ultra-as-theta.csv")).unwrap();
    assert!(csv.starts_with("case,function_id,n,u,lhs,rhs,ratio\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("identity-ultra-as-theta.json")).unwrap()).unwrap();
    assert_eq!(json["grid_sizes"], serde_json::json!([512, 1024]));
    assert!(json["window"].as_f64().unwrap() <= 1.5);

    let o = limterp(&[
        "verify", "identity", "--name", "ultra-as-theta", "--corpus", "chi", "--out", out, "--window-max", "1.01",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn theta_only_for_interior_scenarios() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    let o = limterp(&["verify", "identity", "--name", "grand-as-R", "--theta", "0.5", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let o = limterp(&[
        "verify", "identity", "--name", "small-ultra", "--theta", "0.25", "--grid", "8", "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(d.path().join("identity-small-ultra_theta_0.25.csv").exists());
}

#[test]
fn reports_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for d in &dirs {
        let o = limterp(&[
            "verify", "reiteration", "--case", "ThmR_interior", "--theta", "0.5", "--grid", "8", "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let stem = "reiteration-ThmR_interior_theta_0.5";
        files.push((
            fs::read(d.path().join(format!("{stem}.csv"))).unwrap(),
            fs::read(d.path().join(format!("{stem}.json"))).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn reiterate_prints_the_identified_space() {
    let o = limterp(&["reiterate", "--case", "ThmR_interior", "--theta", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["theta_tilde"], serde_json::json!(0.375));
    assert_eq!(v["space"]["kind"], "theta");
}

#[test]
fn list_names_every_registry() {
    let o = limterp(&["list"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for id in ["L_x1", "ThmL_theta1_one", "ultra-between-AB"] {
        assert!(s.contains(id), "{id}");
    }
}
