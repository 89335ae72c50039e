use std::path::Path;
use std::process::{Command, Output};

use rabi_sense_cli::config::ConfigFile;
use rabi_sense_cli::output;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rabi-sense"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.ini");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

const FAST: &str = "[numerics]\nfock_dim = 12\nrel_tol = 1e-8\nabs_tol = 1e-10\n";
const PURE: &str = "[numerics]\nfock_dim = 12\nrel_tol = 1e-11\nabs_tol = 1e-13\n";

#[test]
fn evolve_writes_400_rows_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), PURE);
    let out = dir.path().join("traj.csv");
    let o = run(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header(&csv), output::TRAJECTORY_HEADER.join(","));
    let r = rows(&csv);
    assert_eq!(r.len(), 400);
    let sx: f64 = r[399][1].parse().unwrap();
    assert!(sx.abs() < 1e-5);

    let manifest = std::fs::read_to_string(dir.path().join("traj.csv.manifest")).unwrap();
    assert!(manifest.contains("command = evolve"));
    assert!(manifest.contains("engine = pure"));
    assert_eq!(ConfigFile::parse(&manifest).unwrap(), ConfigFile::load(Path::new(&cfg)).unwrap());
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("[physics]\nforce_yN = 150\n{PURE}"));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["evolve", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let m = dir.path().join("a.csv.manifest");
    assert!(run(&["evolve", "--config", m.to_str().unwrap(), "--out", b.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn spectrum_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[numerics]\nfock_dim = 12\nsample_count = 25\n");
    let o = run(&["spectrum", "--config", &cfg]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(header(&csv), output::SPECTRUM_HEADER.join(","));
    for r in rows(&csv) {
        let e: Vec<f64> = r[1..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn demkov_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physics]\nforce_yN = 0\n");
    let o = run(&["demkov", "--config", &cfg]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(header(&csv), output::DEMKOV_HEADER.join(","));
    let r = rows(&csv);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][6].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn sensitivity_range_rows() {
    let o = run(&["sensitivity", "--from", "0.5", "--to", "2", "--points", "4"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(header(&csv), output::SENSITIVITY_HEADER.join(","));
    let f: Vec<f64> = rows(&csv).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(f.len(), 4);
    assert!(f.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn spin_force_row() {
    let o = run(&["spin-force", "--gradient", "1"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(header(&csv), output::SPIN_FORCE_HEADER.join(","));
    let f: f64 = rows(&csv)[0][2].parse().unwrap();
    assert!((f - 9.274).abs() < 1e-2);
}

#[test]
fn rejected_input_exits_1_without_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physics]\nforce_newtons = 3\n");
    let o = run(&["demkov", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("force_newtons"));

    let cfg = write_config(dir.path(), "[physics]\ngamma_khz = -1\n");
    let o = run(&["demkov", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());

    assert_eq!(run(&["evolve", "--engine", "magic"]).status.code(), Some(1));
    assert_eq!(run(&["sweep-gamma", "--from", "1"]).status.code(), Some(1));
    assert_eq!(run(&["demkov", "--config", "/nonexistent/run.ini"]).status.code(), Some(1));
}

#[test]
fn pure_engine_refuses_heating() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[heating]\nenabled = true\nrate_per_ms = 0.1\n");
    let o = run(&["evolve", "--config", &cfg, "--engine", "pure"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn failing_sweep_points_exit_2_with_partial_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("[physics]\nforce_yN = 193\n{FAST}"));
    let out = dir.path().join("h.csv");
    let o = run(&["sweep-heating", "--config", &cfg, "--from", "0", "--to", "0.4", "--points", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header(&csv), output::SWEEP_HEADER.join(","));
    let r = rows(&csv);
    assert_eq!(r.len(), 2);
    assert!(r[0][10].is_empty());
    assert_eq!(r[1][1], "NaN");
    assert!(!r[1][10].is_empty());
    let manifest = std::fs::read_to_string(dir.path().join("h.csv.manifest")).unwrap();
    assert!(manifest.contains("failed_points = 1"));
}

#[test]
fn heating_lowers_the_signal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[physics]\nforce_yN = 193\n[numerics]\nfock_dim = 20\nrel_tol = 1e-8\nabs_tol = 1e-10\n",
    );
    let o = run(&["sweep-heating", "--config", &cfg, "--from", "0", "--to", "0.2", "--points", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let snr: Vec<f64> = rows(&csv).iter().map(|r| r[5].parse().unwrap()).collect();
    assert!((snr[0] - 1.0).abs() < 0.01);
    assert!(snr[1] < snr[0]);
}
