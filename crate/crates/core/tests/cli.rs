use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dickman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dickman")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn moments_of_uniform_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"variant":"beta","alpha":1.0,"beta":1.0}"#);
    let out = dickman(&["moments", "--config", &cfg]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["m1"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["var1"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    // the wrapped form used by experiment configs works too
    let cfg = write(dir.path(), "w.json", r#"{"model":{"variant":"finite","dim":2,"atoms":[{"angle":0.0,"mass":1.0}]}}"#);
    let out = dickman(&["moments", "--config", &cfg]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["m1"].as_f64().unwrap(), 1.0);
    assert_eq!(v["var1"].as_f64().unwrap(), 0.5);
}

#[test]
fn discretize_writes_finite_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"variant":"beta","alpha":2.0,"beta":5.0,"mass":2.0}"#);
    let out_path = dir.path().join("d.json");
    let out = dickman(&["discretize", "--config", &cfg, "--k", "8", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["variant"], "finite");
    let atoms = v["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 8);
    let mass: f64 = atoms.iter().map(|a| a["mass"].as_f64().unwrap()).sum();
    assert!((mass - 2.0).abs() < 1e-9);
    assert_eq!(atoms[0]["angle"].as_f64().unwrap(), 0.0);

    let mid = dickman(&["discretize", "--config", &cfg, "--k", "8", "--midpoint"]);
    let v: serde_json::Value = serde_json::from_slice(&mid.stdout).unwrap();
    assert!((v["atoms"][0]["angle"].as_f64().unwrap() - std::f64::consts::PI / 8.0).abs() < 1e-15);
}

#[test]
fn ds_on_continuous_model_needs_discretize_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"model":{"variant":"beta","alpha":2.0,"beta":2.0},"methods":["DS"],"k_grid":[5],"n_reps":100,"base_seed":1}"#,
    );
    let out = dickman(&["experiment", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`discretize`"));
}

#[test]
fn experiment_seed_flag_overrides_config_and_plot_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        r#"{"model":{"variant":"beta","alpha":1.0,"beta":1.0},"methods":["SN","TA"],"k_grid":[1,2,4],"n_reps":500,"base_seed":1}"#,
    );
    let plots = dir.path().join("plots");
    let a = dickman(&["experiment", "--config", &cfg, "--seed", "77", "--plot-dir", plots.to_str().unwrap()]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(4) == Some("77")));
    let mut files: Vec<_> = fs::read_dir(&plots).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files, ["beta_1_1_SN.dat", "beta_1_1_TA.dat"]);
    let sn = fs::read_to_string(plots.join("beta_1_1_SN.dat")).unwrap();
    assert_eq!(sn.lines().count(), 3);
    assert!(sn.starts_with("1 "));
}

#[test]
fn sample_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"model":{"variant":"finite","dim":2,"atoms":[{"angle":0.0,"mass":0.5},{"angle":3.0,"mass":0.5}]},"method":"DS","k":0,"n_reps":25,"seed":3}"#,
    );
    let out = dickman(&["sample", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# model="));
    assert_eq!(lines[1], "x1,x2");
    assert_eq!(lines.len(), 27);
    let again = dickman(&["sample", "--config", &cfg]);
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn verify_reports_every_check() {
    let out = dickman(&["verify", "--n", "20000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}
