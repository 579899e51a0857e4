use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use homsweep::export::parse_solutions_json;
use homsweep::{CollectedData, PointStatus, Step1File};

const BIN: &str = env!("CARGO_BIN_EXE_homsweep");

const CUBE: &str = "\
INPUT
  variable z;
  parameter x, y;
  function f;
  f = x^6 + y^6 + z^6 - 1;
END;
MESH
  x: range -1.5 1.5 9;
  y: range -1.5 1.5 9;
END;
";

const MONKS: &str = "\
INPUT
  variable z0, z1, z2, z3;
  parameter mu0, mu1, gamma;
  function f0, f1, f2, f3;
  S = 2*(z0^2 + z1^2 + z2^2 + z3^2);
  f0 = mu0*z0 + z1*z2 - gamma*z0*(S - z0^2);
  f1 = mu1*z1 + z0*z2 + z2*z3 - gamma*z1*(S - z1^2);
  f2 = mu1*z2 + z0*z1 + z1*z3 - gamma*z2*(S - z2^2);
  f3 = mu0*z3 + z1*z2 - gamma*z3*(S - z3^2);
END;
";

fn homsweep(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SWEEP_OUT_DIR").output().unwrap()
}

fn write_input(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn collected(dir: &Path) -> CollectedData {
    CollectedData::parse(&fs::read_to_string(dir.join("collected.dat")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let out = tmp.path().join("run1");
    let o = homsweep(&[
        "solve", s(&input), "--out", s(&out), "--workers", "4", "--seed", "7", "--max-retries", "3",
        "--export-csv", "--export-json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let data = collected(&out);
    assert_eq!(data.records.len(), 81);
    assert!(data.records.iter().all(|r| r.status == PointStatus::Complete));
    assert_eq!(data.header.total_paths_tracked, 6 + 81 * 6);
    assert_eq!(fs::read_to_string(out.join("failures.txt")).unwrap().lines().next(), Some("0 failed points"));
    assert_eq!(fs::read_to_string(out.join("timings.csv")).unwrap().lines().count(), 82);
    let csv = fs::read_to_string(out.join("real_counts.csv")).unwrap();
    assert_eq!(csv.lines().count(), 82);
    let json = parse_solutions_json(&fs::read_to_string(out.join("solutions.json")).unwrap()).unwrap();
    assert_eq!(json.records.len(), 81);
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.unwrap().file_name().into_string().ok())
        .filter(|n| n.ends_with(".part"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let runs: Vec<String> = ["1", "3"]
        .iter()
        .map(|w| {
            let out = tmp.path().join(format!("w{w}"));
            let o = homsweep(&["solve", s(&input), "--out", s(&out), "--workers", w, "--seed", "11", "--batch-size", "2"]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            fs::read_to_string(out.join("collected.dat")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn out_dir_defaults_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let out = tmp.path().join("from_env");
    let o = Command::new(BIN)
        .args(["solve", s(&input), "--seed", "1"])
        .env("SWEEP_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(collected(&out).records.len(), 81);
}

#[test]
fn missing_input_is_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let o = homsweep(&["solve", s(&tmp.path().join("nope.input")), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.input"), "{}", stderr(&o));
}

#[test]
fn parse_errors_report_file_positions() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "bad.input", &CUBE.replace("f = x^6", "f = w^6"));
    let o = homsweep(&["solve", s(&input), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 5, column 7"), "{}", stderr(&o));

    let input = write_input(tmp.path(), "bad2.input", &CUBE.replace("MESH\n", "CONFIG\n  bogus: 1;\nEND;\nMESH\n"));
    let o = homsweep(&["solve", s(&input), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 8"), "{}", stderr(&o));
}

#[test]
fn bad_flags_are_fatal() {
    assert_eq!(homsweep(&["solve", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(homsweep(&["--help"]).status.code(), Some(0));
}

#[test]
fn input_can_come_from_stdin() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("stdin");
    let mut child = Command::new(BIN)
        .args(["solve", "-", "--out", s(&out), "--seed", "5"])
        .env_remove("SWEEP_OUT_DIR")
        .stdin(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(CUBE.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(collected(&out).records.len(), 81);
}

#[test]
fn verify_step1_logs_generic_count() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "monks.input", MONKS);
    let out = tmp.path().join("monks");
    let o = homsweep(&["solve", s(&input), "--verify-step1", "--step1-only", "--seed", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("step1: 81 solutions, verified"), "{}", stderr(&o));
    let file = Step1File::parse(&fs::read_to_string(out.join("step1.dat")).unwrap()).unwrap();
    assert_eq!(file.result.solutions.len(), 81);
    assert!(!out.join("collected.dat").exists());
}

#[test]
fn reused_step1_matches_direct_run() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let first = tmp.path().join("first");
    let direct = tmp.path().join("direct");
    let reused = tmp.path().join("reused");
    let o = homsweep(&["solve", s(&input), "--step1-only", "--seed", "21", "--out", s(&first)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = homsweep(&["solve", s(&input), "--seed", "21", "--out", s(&direct)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = homsweep(&["solve", s(&input), "--reuse-step1", s(&first), "--out", s(&reused)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(collected(&direct), collected(&reused));

    let other = write_input(tmp.path(), "other.input", &CUBE.replace("variable z;", "variable w;").replace("z^6", "w^6"));
    let o = homsweep(&["solve", s(&other), "--reuse-step1", s(&first), "--out", s(&reused)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unresolved_points_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let first = tmp.path().join("first");
    let o = homsweep(&["solve", s(&input), "--step1-only", "--seed", "3", "--out", s(&first)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let starved = write_input(tmp.path(), "starved.input", &format!("CONFIG\n  max_steps: 2;\nEND;\n{CUBE}"));
    let out = tmp.path().join("starved");
    let o = homsweep(&["solve", s(&starved), "--reuse-step1", s(&first), "--max-retries", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let data = collected(&out);
    assert!(data.records.iter().all(|r| r.status == PointStatus::Unresolved));
    let report = fs::read_to_string(out.join("failures.txt")).unwrap();
    assert!(report.starts_with("81 failed points"), "{report}");
}

#[test]
fn p0_file_fixes_start_point() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let p0 = write_input(tmp.path(), "p0.txt", "0.25 0.5 0.75 0.125\n");
    let out = tmp.path().join("p0");
    let o = homsweep(&["solve", s(&input), "--p0", s(&p0), "--step1-only", "--seed", "4", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let file = Step1File::parse(&fs::read_to_string(out.join("step1.dat")).unwrap()).unwrap();
    let v = file.result.p0.values();
    assert_eq!((v[0].re, v[0].im, v[1].re, v[1].im), (0.25, 0.5, 0.75, 0.125));
}

#[test]
fn points_file_replaces_mesh() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let pts = write_input(tmp.path(), "pts.txt", "0 0 0 0\n1 0 0 0\n2 0 0 0\n");
    let out = tmp.path().join("pts");
    let o = homsweep(&["solve", s(&input), "--points", s(&pts), "--seed", "6", "--out", s(&out), "--export-json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let data = collected(&out);
    assert_eq!(data.records.len(), 3);
    assert_eq!(data.records[0].solutions.n_real, 2);
    assert_eq!(data.records[1].status, PointStatus::HadFailures);
    assert_eq!(data.records[2].solutions.n_real, 0);
    let o = homsweep(&["export", s(&out), "--csv"]);
    assert_eq!(o.status.code(), Some(1), "a file-driven run has no grid");
}

#[test]
fn export_subcommand_writes_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path(), "cube.input", CUBE);
    let out = tmp.path().join("grid");
    let o = homsweep(&["solve", s(&input), "--seed", "8", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = homsweep(&["export", s(&out), "--csv", "x,y", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("real_counts.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,i_x,x,i_y,y,n_solutions,n_real,status"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (x, y): (f64, f64) = (f[2].parse().unwrap(), f[4].parse().unwrap());
        let n_real: usize = f[6].parse().unwrap();
        if x.powi(6) + y.powi(6) > 1.0 + 1e-9 {
            assert_eq!(n_real, 0, "{line}");
        } else if x.powi(6) + y.powi(6) < 1.0 - 1e-9 {
            assert_eq!(n_real, 2, "{line}");
        }
    }
    assert!(out.join("solutions.json").exists());
    assert_eq!(homsweep(&["export", s(&out), "--csv", "nope"]).status.code(), Some(1));
}
