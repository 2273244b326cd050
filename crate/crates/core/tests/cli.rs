use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timebin-ecp"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_balanced_bell() {
    let o = run(&["simulate", "bell", "--alpha", "0.70710678118654752"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Success 0.5000"), "{out}");
    assert!(out.contains("Recyclable 0.5000"), "{out}");
}

#[test]
fn simulate_separable_input_never_succeeds() {
    let o = run(&["simulate", "ghz", "--parties", "3", "--alpha", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Success 0.0000"));
}

#[test]
fn simulate_with_recycling() {
    let o = run(&["simulate", "--protocol", "bell", "--alpha", "0.6", "--rounds", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Success 0.4608"));
    assert!(out.contains("0.6577"), "{out}");
}

#[test]
fn two_party_ghz_prints_bell_output() {
    let bell = run(&["simulate", "bell", "--alpha", "0.3"]);
    let ghz = run(&["simulate", "ghz", "--parties", "2", "--alpha", "0.3"]);
    assert_eq!(bell.stdout, ghz.stdout);
}

#[test]
fn sweep_csv_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let plot = dir.path().join("sweep.svg");
    let o = run(&[
        "sweep",
        "bell",
        "--out",
        path.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,p_success,p_recyclable,p_total_r1");
    assert_eq!(lines.len(), 100);
    assert!(lines[1].starts_with("0.0100000000000,"));
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("<svg"));

    let again = run(&["sweep", "bell"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let single = Command::new(env!("CARGO_BIN_EXE_timebin-ecp"))
        .args(["sweep", "ghz", "--grid", "20"])
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_timebin-ecp"))
        .args(["sweep", "ghz", "--grid", "20"])
        .env("RAYON_NUM_THREADS", "8")
        .output()
        .unwrap();
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(single.stdout, many.stdout);
}

#[test]
fn verify_default_passes() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("PASS rows=66/66"), "{}", stdout(&o));
}

#[test]
fn verify_five_parties_by_rule() {
    let o = run(&["verify", "--parties", "5", "--grid", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS rows="));
}

#[test]
fn permuted_detectors_fail_verification() {
    let o = run(&["verify", "--permute-detectors"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL rows="));
    assert!(out.contains("failing signature"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["simulate", "bell"][..],
        &["simulate", "bell", "--alpha", "2"],
        &["simulate", "bell", "--parties", "3", "--alpha", "0.5"],
        &["simulate", "ghz", "--parties", "1", "--alpha", "0.5"],
        &["sweep", "--grid", "-3"],
        &["frobnicate"],
        &["simulate", "--alpha", "abc"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_1() {
    let o = run(&["sweep", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
}
