use std::path::Path;
use std::process::{Command, Output};

use iscs::experiment::{METRICS_HEADER, TRAJECTORY_HEADER};
use iscs::io::read_volume;

const TINY: &str = r#"{"experiment": "cli-tiny", "task": "sr", "sr_factor": 2, "timesteps": 5, "seeds": [1, 2],
    "noise_strategy": ["independent", "slerp"],
    "phantom": {"kind": "varying_ellipses", "slices": 8, "height": 16, "width": 16}}"#;

fn iscs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iscs")).args(args).output().expect("spawn iscs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn run_is_reproducible_and_writes_headers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = iscs(&["--quiet", "run", "--config", &config, "--outdir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let summary = std::fs::read(a.join("metrics.csv")).unwrap();
    assert_eq!(summary, std::fs::read(b.join("metrics.csv")).unwrap());
    assert_eq!(first_line(&a.join("metrics.csv")), METRICS_HEADER);

    let seed_dir = a.join("sr/dds/slerp/seed2");
    assert_eq!(first_line(&seed_dir.join("metrics.csv")), METRICS_HEADER);
    assert_eq!(first_line(&seed_dir.join("trajectory.csv")), TRAJECTORY_HEADER);
    // one row per step plus the header
    assert_eq!(std::fs::read_to_string(seed_dir.join("trajectory.csv")).unwrap().lines().count(), 6);
    assert_eq!(read_volume(seed_dir.join("recon.ivf")).unwrap().dims(), read_volume(a.join("sr/ground_truth.ivf")).unwrap().dims());
}

#[test]
fn seeds_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = iscs(&["--quiet", "run", "--config", &config, "--outdir", out.to_str().unwrap(), "--seeds", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sr/dds/independent/seed9").is_dir());
    assert!(!out.join("sr/dds/independent/seed1").exists());
}

#[test]
fn unknown_config_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"experiment": "x", "task": "sr", "stepz": 3}"#);
    let o = iscs(&["run", "--config", &config, "--outdir", dir.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("stepz"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn run_without_outdir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY);
    assert!(!iscs(&["run", "--config", &config]).status.success());
}

#[test]
fn phantom_then_metrics_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().to_str().unwrap();
    let o = iscs(&["phantom", "--outdir", outdir, "--kind", "extruded_ellipses", "--slices", "8", "--height", "16", "--width", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("phantom.ivf");
    let v = read_volume(&path).unwrap();
    assert_eq!((v.dims().slices, v.dims().height, v.dims().width), (8, 16, 16));

    let p = path.to_str().unwrap();
    let o = iscs(&["metrics", "--recon", p, "--reference", p]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], "inf");
        assert_eq!(cols[2].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn phantom_rejects_unknown_kind() {
    assert!(!iscs(&["phantom", "--kind", "cube"]).status.success());
}

#[test]
fn noise_check_passes() {
    let o = iscs(&["noise-check", "--seed", "5", "--trials", "200", "--draws", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8(o.stdout).unwrap().matches("PASS").count(), 2);
}
