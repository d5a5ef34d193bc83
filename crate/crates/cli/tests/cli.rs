use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sled(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sled")).args(args).env_remove("SLED_THREADS").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--base", "exp-decay", "-p", "12", "-n", "25", "-m", "25", "--seed", "7", "-o"];
    args.push(dir.to_str().unwrap());
    args.extend_from_slice(extra);
    sled(&args)
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn version_names_the_rng() {
    let out = sled(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("chacha20"));
}

#[test]
fn help_documents_exit_codes() {
    let out = sled(&["test", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Exit codes"));
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&simulate(a.path(), &[])), 0);
    assert_eq!(code(&simulate(b.path(), &[])), 0);
    for f in ["sigma1.csv", "sigma2.csv", "x.csv", "y.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_exp_decay_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = sled(&[
        "simulate",
        "--base",
        "exp-decay",
        "-p",
        "3",
        "--null",
        "--scales",
        "unit",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_csv(&dir.path().join("sigma1.csv"));
    let delta = s[0][0] - 1.0;
    for i in 0..3usize {
        for j in 0..3 {
            let expected = 0.5f64.powi(i.abs_diff(j) as i32) + if i == j { delta } else { 0.0 };
            assert!((s[i][j] - expected).abs() < 1e-12);
        }
    }
    assert_eq!(s, read_csv(&dir.path().join("sigma2.csv")));
}

#[test]
fn simulate_small_block_diagonal_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = sled(&["simulate", "--base", "block-diagonal", "-p", "5", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn same_file_twice_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    let x = dir.path().join("x.csv");
    let out =
        sled(&["test", x.to_str().unwrap(), x.to_str().unwrap(), "--kind", "covariance", "-c", "0.5", "-B", "40"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["result"]["p_value"].as_f64().unwrap() > 0.05);
}

#[test]
fn mismatched_dimensions_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    fs::write(&x, "a,b,c\n1,2,3\n4,5,7\n2,2,2\n").unwrap();
    fs::write(&y, "a,b\n1,2\n4,5\n0,1\n").unwrap();
    let out = sled(&["test", x.to_str().unwrap(), y.to_str().unwrap(), "-B", "5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_file_is_a_data_error() {
    let out = sled(&["test", "/nonexistent/x.csv", "/nonexistent/y.csv"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn beta_needs_adjacency_and_adjacency_needs_beta() {
    let out = sled(&["test", "x.csv", "y.csv", "--beta", "3"]);
    assert_eq!(code(&out), 2);
    let out = sled(&["test", "x.csv", "y.csv", "--kind", "adjacency"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &[]);
    let (x, y) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
    let run = |threads: &str| {
        let out = sled(&[
            "test",
            x.to_str().unwrap(),
            y.to_str().unwrap(),
            "-c",
            "0.4",
            "-B",
            "30",
            "--seed",
            "3",
            "--reproducible",
            "--include-null-stats",
            "--threads",
            threads,
        ]);
        assert_eq!(code(&out), 0);
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn empty_grid_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(&grid, "[]").unwrap();
    assert_eq!(code(&sled(&["power", grid.to_str().unwrap()])), 2);
}

#[test]
fn power_writes_a_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(
        &grid,
        r#"[{"base": "exp-decay", "diff": "sparse-block", "noise": "normal", "n": 20, "m": 20, "p": 10,
             "permutations": 10, "reps": 4, "seed": 1, "null": true}]"#,
    )
    .unwrap();
    let csv = dir.path().join("power.csv");
    let out = sled(&["power", grid.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--methods", "sled,max"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("base,diff,noise"));
    assert!(lines[1].contains(",sled,") && lines[2].contains(",max,"));
}

#[test]
fn power_with_only_failing_cells_fails() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(
        &grid,
        r#"[{"base": "block-diagonal", "diff": "sparse-block", "noise": "normal", "n": 20, "m": 20, "p": 5,
             "permutations": 10, "reps": 4, "seed": 1}]"#,
    )
    .unwrap();
    assert_eq!(code(&sled(&["power", grid.to_str().unwrap()])), 2);
}
