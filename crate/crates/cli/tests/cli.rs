use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn eikstab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eikstab"))
        .args(args)
        .current_dir(dir)
        .env_remove("EIKSTAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn quick_selftest_passes_fast() {
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let out = eikstab(&["selftest", "--quick", "--out", "st.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(t.elapsed() < Duration::from_secs(60));
    let v = json(&dir.path().join("st.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["results"]["checks"], v["results"]["passed"]);
    for a in v["assertions"].as_array().unwrap() {
        assert!(a.get("lower").is_some() && a.get("upper").is_some() && a["pass"] == true);
    }
}

#[test]
fn invalid_curve_is_a_usage_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = eikstab(&["nu", "--curve", "rounded_ngon:n=8,aspect=2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aspect"));
    let out = eikstab(&["nu", "--curve", "ellipse:aspect=abc"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aspect"));
}

#[test]
fn unknown_flag_and_missing_seed_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eikstab(&["nu", "--curve", "ngon:n=8", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(eikstab(&["frobnicate"], dir.path()).status.code(), Some(2));
    let out = eikstab(&["lagrangian", "--curve", "ngon:n=8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn sharpness_writes_json_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = eikstab(
        &["sharpness", "--n", "3,8,16,32,64", "--cost", "ars", "--out", "sharp.json", "--plot", "sharp.svg", "--csv", "sharp.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("sharp.json"));
    let slope = v["results"]["sweep"]["slopes"]["lhs"]["slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() <= 0.15);
    let csv = std::fs::read_to_string(dir.path().join("sharp.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let svg = std::fs::read_to_string(dir.path().join("sharp.svg")).unwrap();
    // every plotted series is a CSV column
    let header = csv.lines().next().unwrap();
    for label in ["lhs_normal_dev", "nu", "hausdorff", "l4_deviation"] {
        assert!(svg.contains(label) && header.split(',').any(|h| h == label));
    }
}

#[test]
fn stochastic_json_is_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["lagrangian", "--curve", "ngon:n=8", "--curves", "20000", "--seed", "11"];
    let mut outs = Vec::new();
    for (w, name) in [("1", "a.json"), ("4", "b.json"), ("4", "c.json")] {
        let mut args = base.to_vec();
        args.extend(["--workers", w, "--out", name]);
        let out = eikstab(&args, dir.path());
        assert!(matches!(out.status.code(), Some(0) | Some(1)));
        outs.push(std::fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[1], outs[2]);
    let mut args = base.to_vec();
    args[6] = "12";
    args.extend(["--out", "d.json"]);
    eikstab(&args, dir.path());
    assert_ne!(outs[0], std::fs::read(dir.path().join("d.json")).unwrap());
}

#[test]
fn failed_assertion_exits_1_and_lists_it() {
    let dir = tempfile::tempdir().unwrap();
    // far too few curves for the representation tolerance
    let out = eikstab(&["lagrangian", "--curve", "ngon:n=8", "--curves", "2000", "--seed", "1", "--out", "l.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL representation_tv"));
    let v = json(&dir.path().join("l.json"));
    assert!(v["assertions"].as_array().unwrap().iter().any(|a| a["pass"] == false));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# nu run\ncurve=rounded_ngon:n=8\ncost=cubic\n").unwrap();
    let out = eikstab(&["nu", "--config", "run.cfg", "--out", "a.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let a = json(&dir.path().join("a.json"));
    assert_eq!(a["results"]["dissipation"]["cost_kind"], "cubic");
    let out = eikstab(&["nu", "--config", "run.cfg", "--cost", "ars", "--out", "b.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let b = json(&dir.path().join("b.json"));
    assert_eq!(b["results"]["dissipation"]["cost_kind"], "ars_wall");
    assert_eq!(b["config"]["cost"], "ars");
    std::fs::write(dir.path().join("bad.cfg"), "colour=blue\n").unwrap();
    let out = eikstab(&["nu", "--config", "bad.cfg", "--curve", "ngon:n=8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_eikstab"))
        .args(["gen-domain", "--curve", "ellipse:aspect=1.2", "--samples-csv", "e.csv", "--samples", "64"])
        .current_dir(dir.path())
        .env("EIKSTAB_OUT_DIR", dir.path().join("reports"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("reports/gen-domain.json"));
    assert!((v["results"]["length"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "s,x,y,tau_x,tau_y,kappa");
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn other_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["defect", "--curve", "ellipse:aspect=1.3", "--triple", "0.3,1.2,4.0"],
        &["defect-integral", "--curve", "ngon:n=8", "--nodes", "12", "--mc", "200", "--seed", "2"],
        &["stability", "--curve", "ngon:n=16"],
        &["stability", "--curve", "circle", "--field", "vortex"],
        &["energy", "--curve", "circle", "--field", "vortex", "--grid", "256", "--eps", "0.08", "--functional", "AG"],
    ];
    for args in cases {
        let out = eikstab(args, dir.path());
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["command"], args[0]);
    }
    let out = eikstab(&["defect-integral", "--curve", "ngon:n=8", "--mc", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
