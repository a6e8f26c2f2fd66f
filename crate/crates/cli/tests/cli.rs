use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use tate_diffusion_cli::report::{HeatReport, SimulationSummary, SpectrumReport, VerifyReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tatediff"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn spectrum_pipes_into_invert() {
    let spectrum = run(&["spectrum", "--p", "7", "--vq", "6", "--mode", "paper"]);
    assert!(spectrum.status.success());
    let parsed: SpectrumReport = serde_json::from_slice(&spectrum.stdout).unwrap();
    assert_eq!(parsed.mode.as_str(), "paper");
    let inv = run_with_stdin(&["invert"], &spectrum.stdout);
    assert!(inv.status.success(), "{}", String::from_utf8_lossy(&inv.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&inv.stdout).unwrap();
    assert_eq!(rep["vq"], 6);
    assert_eq!(rep["parity"], "even");
    assert_eq!(rep["two_torsion_level"], 3);
}

#[test]
fn corrupted_fingerprint_exits_with_two() {
    let spectrum = run(&["spectrum", "--vq", "5"]);
    let mut v: serde_json::Value = serde_json::from_slice(&spectrum.stdout).unwrap();
    let f = v["degree_eigenvalues"][2]["float"].as_f64().unwrap();
    let entry = v["degree_eigenvalues"][2].as_object_mut().unwrap();
    entry.remove("rational");
    let others = v["degree_eigenvalues"].as_array_mut().unwrap();
    for e in others.iter_mut() {
        e.as_object_mut().unwrap().remove("rational");
    }
    v["degree_eigenvalues"][2]["float"] = (f + 1e-3).into();
    let inv = run_with_stdin(&["invert", "--tol", "1e-9"], v.to_string().as_bytes());
    assert_eq!(inv.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["spectrum", "--p", "6"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(run(&["heat", "--initial", "1,0"]).status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = tmp("run.json");
    std::fs::write(&cfg, r#"{"p": 5, "vq": 7, "mode": "paper"}"#).unwrap();
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--vq", "4"]);
    let rep: SpectrumReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((rep.vq, rep.mode.as_str()), (4, "paper"));
}

#[test]
fn heat_json_and_csv() {
    let out = run(&["heat", "--vq", "3", "--t", "0,1,50", "--initial", "3,0,0"]);
    assert!(out.status.success());
    let rep: HeatReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep.rows[0].circle_means, vec![3.0, 0.0, 0.0]);
    for r in &rep.rows {
        assert!((r.mass - rep.rows[0].mass).abs() < 1e-12);
    }
    assert!(rep.rows[2].sup_deviation < 1e-3 * rep.rows[0].sup_deviation);
    let csv = run(&["heat", "--vq", "3", "--t", "0,1", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let out = tmp("paths.csv");
    let o = run(&["simulate", "--vq", "3", "--paths", "20", "--t-max", "200", "--seed", "4", "--precision", "8", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path_id,event_index,time,circle,digits"));
    let mut last = (u64::MAX, f64::NEG_INFINITY);
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        let id: u64 = cols[0].parse().unwrap();
        let t: f64 = cols[2].parse().unwrap();
        if id == last.0 {
            assert!(t > last.1);
        }
        last = (id, t);
    }
    let side = std::fs::read(out.with_extension("summary.json")).unwrap();
    let sum: SimulationSummary = serde_json::from_slice(&side).unwrap();
    assert!(sum.total_jumps > 1000);
    assert!(sum.occupation.unwrap().within_3sigma.iter().all(|&b| b));
}

#[test]
fn verify_exits_zero_with_soft_findings() {
    let o = run(&["verify", "--vq", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: VerifyReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rep.hard_passed);
}
