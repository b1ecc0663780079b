//! End-to-end runs of the `gjsim` binary: generate → solve → reduce →
//! finish → simulate → bench, exercising files, stdout wiring, the
//! environment thread override, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn gjsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gjsim"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

fn parse_solution(out: &Output) -> Vec<f64> {
    stdout_lines(out)
        .iter()
        .map(|l| l.parse().expect("solution lines are numbers"))
        .collect()
}

fn gen_system(dir: &Path, name: &str, family: &str, n: usize, fraction: f64) -> std::path::PathBuf {
    let path = dir.join(name);
    run_ok(
        gjsim()
            .arg("gen")
            .args(["--family", family])
            .args(["--n", &n.to_string()])
            .args(["--seed", "11"])
            .args(["--reduction-fraction", &fraction.to_string()])
            .arg("--out")
            .arg(&path),
    );
    path
}

#[test]
fn generate_solve_reduce_finish_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sys = gen_system(dir.path(), "sys.txt", "circuit-sparse", 7, 0.3);

    let full = parse_solution(&run_ok(
        gjsim()
            .arg("solve")
            .arg("--input")
            .arg(&sys)
            .args(["--at", "0.5", "--threads", "1"]),
    ));
    assert_eq!(full.len(), 7);

    // The parallel kernel sees the same answer.
    let parallel = parse_solution(&run_ok(
        gjsim()
            .arg("solve")
            .arg("--input")
            .arg(&sys)
            .args(["--at", "0.5", "--threads", "3", "--diagnostics"]),
    ));
    for (a, b) in full.iter().zip(&parallel) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    // Reduce once, then finish from the saved boundary.
    let red = dir.path().join("red.txt");
    run_ok(
        gjsim()
            .arg("reduce")
            .arg("--input")
            .arg(&sys)
            .arg("--out")
            .arg(&red),
    );
    let red_text = std::fs::read_to_string(&red).unwrap();
    assert!(
        red_text.trim_end().ends_with("BETA 2"),
        "expected a boundary trailer, got:\n{red_text}"
    );
    let finished = parse_solution(&run_ok(
        gjsim()
            .arg("solve")
            .arg("--input")
            .arg(&red)
            .args(["--at", "0.5"]),
    ));
    for (a, b) in full.iter().zip(&finished) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn environment_variable_sets_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let sys = gen_system(dir.path(), "sys.txt", "random-dense", 6, 0.0);
    let explicit = parse_solution(&run_ok(
        gjsim()
            .arg("solve")
            .arg("--input")
            .arg(&sys)
            .args(["--threads", "2"]),
    ));
    let via_env = parse_solution(&run_ok(
        gjsim()
            .arg("solve")
            .arg("--input")
            .arg(&sys)
            .env("GJSIM_THREADS", "2"),
    ));
    assert_eq!(explicit, via_env);

    // A flag on the command line beats the environment.
    let out = gjsim()
        .arg("solve")
        .arg("--input")
        .arg(&sys)
        .args(["--threads", "100"])
        .env("GJSIM_THREADS", "2")
        .output()
        .unwrap();
    assert!(!out.status.success(), "100 workers cannot split 6 rows");
}

#[test]
fn simulate_emits_the_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sys = gen_system(dir.path(), "sys.txt", "circuit-sparse", 5, 0.4);
    let out = run_ok(
        gjsim()
            .arg("simulate")
            .arg("--input")
            .arg(&sys)
            .args(["--dt", "0.25", "--steps", "4", "--mode", "reduced-serial"]),
    );
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "t,x0,x1,x2,x3,x4,element_updates");
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 7);
    assert_eq!(first[0], "0");
    // Full and reduced sweeps agree at every emitted instant.
    let full = run_ok(
        gjsim()
            .arg("simulate")
            .arg("--input")
            .arg(&sys)
            .args(["--dt", "0.25", "--steps", "4", "--mode", "full-serial"]),
    );
    for (r, f) in lines[1..].iter().zip(&stdout_lines(&full)[1..]) {
        let rv: Vec<f64> = r.split(',').take(6).map(|v| v.parse().unwrap()).collect();
        let fv: Vec<f64> = f.split(',').take(6).map(|v| v.parse().unwrap()).collect();
        for (a, b) in rv.iter().zip(&fv) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}

#[test]
fn bench_writes_schema_exact_reports_and_honors_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("report.csv");
    run_ok(
        gjsim()
            .arg("bench")
            .args(["--families", "random-dense"])
            .args(["--sizes", "8"])
            .args(["--threads-list", "1,2"])
            .args(["--reduction-list", "0,0.5"])
            .args(["--reps", "3", "--warmup", "0"])
            .arg("--out")
            .arg(&csv_path),
    );
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,n,threads,reduction_fraction,reps,kept,removed,mean_ns,median_ns,stddev_ns,\
         min_ns,max_ns,speedup_vs_1t"
    );
    assert_eq!(lines.count(), 4);

    // A failing cell (more workers than rows) flips the exit code but still
    // produces the report.
    let out = gjsim()
        .arg("bench")
        .args(["--families", "random-dense"])
        .args(["--sizes", "2"])
        .args(["--threads-list", "4"])
        .args(["--reduction-list", "0"])
        .args(["--reps", "3", "--warmup", "0"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus the failed row");
    assert!(csv.lines().nth(1).unwrap().starts_with("random-dense,2,4,0,3,,"));
}

#[test]
fn missing_input_fails_cleanly() {
    let out = gjsim()
        .arg("solve")
        .args(["--input", "/nonexistent/gjsim-system.txt"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("gjsim:"), "stderr: {stderr}");
}
