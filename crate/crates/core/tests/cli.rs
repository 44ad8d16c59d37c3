use std::process::Command;

fn cli(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ctrl-robust"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn enumerate_four_nodes_four_edges() {
    let (ok, csv, err) = cli(&["enumerate", "--nodes", "4", "--edges", "4"]);
    assert!(ok, "{err}");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "canonical,edges,enc,rc_num,rc_den,optimal");
    assert_eq!(lines.len(), 23);
    assert_eq!(lines.iter().filter(|l| l.split(',').nth(2) == Some("1")).count(), 1);
}

#[test]
fn generate_rectify_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("sf.txt");
    let fixed = dir.path().join("fixed.txt");
    let raw_s = raw.to_str().unwrap();
    let fixed_s = fixed.to_str().unwrap();
    let gen = ["generate", "--model", "sf", "--nodes", "60", "--edges", "180", "--seed", "4", "--out", raw_s];
    assert!(cli(&gen).0);
    let (_, report, _) = cli(&["enc-check", "--input", raw_s]);
    assert!(report.starts_with("bounds [3, 3]: violated"));
    let (ok, _, err) = cli(&["rectify", "--input", raw_s, "--seed", "1", "--out", fixed_s]);
    assert!(ok);
    assert!(err.contains("enc-satisfied"), "{err}");
    let (_, report, _) = cli(&["enc-check", "--input", fixed_s]);
    assert_eq!(report, "bounds [3, 3]: satisfied\n");
    // generation is deterministic
    let (_, a, _) = cli(&gen[..gen.len() - 2]);
    assert_eq!(a, std::fs::read_to_string(&raw).unwrap());
}

#[test]
fn attack_prints_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cycle.txt");
    std::fs::write(&path, "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n").unwrap();
    let p = path.to_str().unwrap();
    let (ok, csv, err) = cli(&["attack", "--input", p, "--exhaustive", "permutations"]);
    assert!(ok, "{err}");
    assert!(err.contains("R_c = 0.6 (3/5)"), "{err}");
    assert_eq!(csv.lines().count(), 6);
    let (ok, csv, _) = cli(&["attack", "--input", p, "--runs", "10", "--seed", "3"]);
    assert!(ok);
    assert!(csv.lines().last().unwrap().starts_with("5,0.8333333333333334,1,0"));
}

#[test]
fn seed_is_required_and_errors_exit_nonzero() {
    let (ok, _, err) = cli(&["generate", "--model", "er", "--nodes", "10", "--edges", "20"]);
    assert!(!ok);
    assert!(err.contains("--seed"));
    let (ok, _, err) = cli(&["generate", "--model", "er", "--nodes", "5", "--edges", "100", "--seed", "1"]);
    assert!(!ok);
    assert!(err.starts_with("error:"));
    let (ok, _, err) = cli(&["features", "--input", "/nonexistent/file"]);
    assert!(!ok);
    assert!(err.contains("input"));
}

#[test]
fn experiment_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (ok, listing, err) = cli(&[
        "experiment", "--model", "er", "--nodes", "30", "--edges", "90", "--runs", "4",
        "--rer-budget", "0,50,unlimited", "--seed", "9", "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    assert_eq!(listing.lines().count(), 3 * 3 + 3);
    let summary = std::fs::read_to_string(out.join("rc_summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("unlimited,0,") && l.contains("enc-satisfied")));
}
