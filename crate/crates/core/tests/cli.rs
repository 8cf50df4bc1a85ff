use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
duration = 1.0
initial_temperature = 24.0

[mesh]
dims = [6, 6, 4]
extent = [2.0, 2.0, 0.5]

[material]
preset = "agar"

[laser]
power = 0.5
waist = 0.02
focal_distance = 25.0
schedule = [[0.0, 0.5]]

[solver]
dt = 0.1

[output]
snapshot_every = 5
vtk = true
"#;

fn lasertherm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lasertherm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, CONFIG).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_probes_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = lasertherm(&["run", &cfg, "--output-dir", out_dir.to_str().unwrap(), "--log-level", "warn"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("probes.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time_s,probe0_C,probe1_C,probe2_C"));
    assert_eq!(lines.count(), 11);
    for stem in ["step_000000", "step_000005", "step_000010"] {
        for ext in ["bin", "hdr", "vtk"] {
            assert!(out_dir.join("snapshots").join(format!("{stem}.{ext}")).exists(), "{stem}.{ext}");
        }
    }
    let bin = fs::read(out_dir.join("snapshots/step_000010.bin")).unwrap();
    assert_eq!(bin.len(), 7 * 7 * 8);

    let compare = lasertherm(&["compare", out_dir.join("probes.csv").to_str().unwrap(), out_dir.join("probes.csv").to_str().unwrap()]);
    assert!(compare.status.success());
    let text = String::from_utf8_lossy(&compare.stdout);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.ends_with("rmse = 0.000000 °C")), "{text}");
}

#[test]
fn overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_dir = dir.path().join("o");
    let out = lasertherm(&[
        "run", &cfg, "--output-dir", out_dir.to_str().unwrap(),
        "--set", "duration=0.5", "--set", "output.snapshot_every=0",
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(out_dir.join("probes.csv")).unwrap().lines().count(), 1 + 6);
    assert!(!out_dir.join("snapshots").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());

    let ok = lasertherm(&["validate", &cfg]);
    assert_eq!(ok.status.code(), Some(0));

    let bad = lasertherm(&["validate", &cfg, "--set", "probes=[[3.0, 0.0]]"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("probes[0]"));

    let unknown = lasertherm(&["validate", &cfg, "--set", "laser.colour=1"]);
    assert_eq!(unknown.status.code(), Some(1));

    let missing = lasertherm(&["validate", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(3));

    let tissue = lasertherm(&["preset", "pork"]);
    assert_eq!(tissue.status.code(), Some(1));

    let usage = lasertherm(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(1));

    // a CG budget of one iteration cannot converge
    let solver = lasertherm(&[
        "run", &cfg, "--output-dir", dir.path().join("x").to_str().unwrap(),
        "--set", "solver.method=\"cg\"", "--set", "solver.max_iterations=1",
    ]);
    assert_eq!(solver.status.code(), Some(2), "{}", String::from_utf8_lossy(&solver.stderr));
}

#[test]
fn compare_reports_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "time_s,probe0_C\n0,24\n1,26\n2,28\n").unwrap();
    fs::write(&b, "time_s,probe0_C\n0,25\n0.5,26\n1,27\n2,29\n").unwrap();
    let out = lasertherm(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "probe0_C rmse = 1.000000 °C");
}
