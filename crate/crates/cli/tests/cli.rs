use std::process::{Command, Output};

fn pqapprox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqapprox"))
        .args(args)
        .env_remove("PQAPPROX_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = pqapprox(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn moments_discrepancy_is_small() {
    let csv = stdout(&[
        "--command",
        "moments",
        "--family",
        "pq-lupas",
        "--n",
        "10",
        "--p",
        "0.95",
        "--q",
        "0.9",
        "--grid",
        "101",
    ]);
    let d = column(&csv, "discrepancy");
    assert_eq!(d.len(), 101);
    assert!(d.iter().all(|v| v.parse::<f64>().unwrap() <= 1e-10));
}

#[test]
fn rn_classical_row() {
    let csv = stdout(&["--command", "rn", "--n", "2", "--grid", "3"]);
    let x = column(&csv, "x");
    let r = column(&csv, "r");
    let i = x
        .iter()
        .position(|v| v.parse::<f64>().unwrap() == 0.5)
        .unwrap();
    let r: f64 = r[i].parse().unwrap();
    assert!((r - 0.366_025_403_784_438_6).abs() < 1e-15);
}

#[test]
fn compare_reports_first_third() {
    let out = pqapprox(&["--command", "compare", "--n", "10", "--grid", "1001"]);
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("king wins on [0, 0.354]"), "{stderr}");

    let json = stdout(&[
        "--command",
        "compare",
        "--n",
        "10",
        "--grid",
        "1001",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let end = v["win_intervals"][0][1].as_f64().unwrap();
    assert!((end - 1.0 / 3.0).abs() < 0.03);
}

#[test]
fn output_is_byte_stable() {
    let args = [
        "--command",
        "converge",
        "--family",
        "king-lupas",
        "--fn",
        "runge",
        "--n-max",
        "64",
        "--grid",
        "41",
    ];
    let a = pqapprox(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_pqapprox"))
        .args(args)
        .env("PQAPPROX_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.csv");
    let args = [
        "--command",
        "bounds",
        "--family",
        "king-lupas",
        "--fn",
        "absdev",
        "--n",
        "12",
        "--p",
        "0.95",
        "--q",
        "0.9",
        "--grid",
        "21",
    ];
    let p = path.to_str().unwrap();
    let out = pqapprox(&[&args[..], &["--out", p]].concat());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, stdout(&args));
    assert!(!text.contains('\r'));
    assert_eq!(
        text.lines().next().unwrap(),
        "x,actual,bound,margin,delta_classical,delta_king,king_wins"
    );
    assert!(column(&text, "margin")
        .iter()
        .all(|m| m.parse::<f64>().unwrap() >= -1e-10));
}

#[test]
fn numbers_have_seventeen_digits() {
    let csv = stdout(&[
        "--command",
        "eval",
        "--family",
        "pq-lupas",
        "--fn",
        "runge",
        "--n",
        "7",
        "--p",
        "0.9",
        "--q",
        "0.8",
        "--grid",
        "11",
    ]);
    for line in csv.lines().skip(1) {
        for cell in line.split(',') {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(
                mantissa.chars().filter(char::is_ascii_digit).count(),
                17,
                "{cell}"
            );
        }
    }
}

#[test]
fn density_trajectories() {
    let csv = stdout(&[
        "--command",
        "density",
        "--big-n",
        "1000000",
        "--epsilon",
        "0.5",
    ]);
    assert_eq!(csv.lines().count(), 9);
    let density = column(&csv, "density");
    assert_eq!(density[3].parse::<f64>().unwrap(), 1e-3);
    assert_eq!(density[7].parse::<f64>().unwrap(), 0.999);
}

#[test]
fn exit_codes() {
    let usage = pqapprox(&["--command", "eval"]);
    assert_eq!(usage.status.code(), Some(2));
    let bad_flag = pqapprox(&["--command", "nope"]);
    assert_eq!(bad_flag.status.code(), Some(2));
    let bad_pair = pqapprox(&["--command", "eval", "--n", "3", "--p", "0.5", "--q", "0.9"]);
    assert_eq!(bad_pair.status.code(), Some(2));

    let king = pqapprox(&[
        "--command",
        "eval",
        "--family",
        "king-lupas",
        "--n",
        "2",
        "--p",
        "1",
        "--q",
        "0.5",
    ]);
    assert_eq!(king.status.code(), Some(3));
    let msg = String::from_utf8(king.stderr).unwrap();
    assert!(msg.contains("pq([n]-1) > p^n (p-q)"), "{msg}");

    let threads = Command::new(env!("CARGO_BIN_EXE_pqapprox"))
        .args(["--command", "rn", "--n", "3"])
        .env("PQAPPROX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn converge_validates_whole_schedule_first() {
    // The Bernstein family stops at degree 60; 64 is rejected before any output.
    let out = pqapprox(&[
        "--command",
        "converge",
        "--family",
        "pq-bernstein",
        "--n-max",
        "64",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let ok = stdout(&[
        "--command",
        "converge",
        "--family",
        "king-lupas",
        "--seq",
        "power-decay",
        "--n-max",
        "8",
        "--grid",
        "11",
    ]);
    assert_eq!(column(&ok, "n"), ["2", "4", "8"]);
}
