use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sodatlas")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classes_degree_five() {
    let o = run(&["classes", "--degree", "5", "--r", "-1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.ends_with("count: 10\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("  ")).count(), 10);
}

#[test]
fn classes_table_counts() {
    for (d, r, n) in [(9, 1, 1), (8, 0, 2), (7, -1, 3), (6, 0, 3), (5, 1, 5)] {
        let o = run(&["classes", "--degree", &d.to_string(), "--r", &r.to_string()]);
        assert!(stdout(&o).ends_with(&format!("count: {n}\n")), "degree {d} r {r}");
    }
}

#[test]
fn verify_all_passes_in_catalog_order() {
    let o = run(&["verify-link", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let verdicts: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).expect("json line"))
        .filter(|v| v["kind"] == "verdict")
        .collect();
    let ids: Vec<String> = verdicts.iter().map(|v| v["case"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, sodatlas::catalog::catalog_ids());
    assert_eq!(out, stdout(&run(&["verify-link", "--all"])));
}

#[test]
fn verify_single_and_unknown() {
    assert!(run(&["verify-link", "--id", "I-9-8"]).status.success());
    assert_eq!(run(&["verify-link", "--id", "no-such-link"]).status.code(), Some(2));
    assert_eq!(run(&["verify-link", "--id", "I-9-8", "--all"]).status.code(), Some(2));
}

#[test]
fn roundtrip_invariant_is_zero() {
    let o = run(&["invariant", "--steps", &data("roundtrip.txt")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0\n");
    assert_eq!(stdout(&run(&["invariant", "--steps", &data("steps.txt")])), "-[2:C2]\n");
}

#[test]
fn parse_errors_exit_two() {
    assert_eq!(run(&["sod", "--surface", &data("bad_surface.txt")]).status.code(), Some(2));
    assert_eq!(run(&["sod", "--surface", &data("missing.txt")]).status.code(), Some(2));
    assert_eq!(run(&["classes", "--degree", "5", "--r", "-1", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    let o = run(&["mutate", "--collection", &data("wrong_order.txt"), "--script", &data("script.txt")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 0"));
    let o = run(&["profile", "--file", &data("profiles.txt")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("degree-6 consistency: ok"));
}

#[test]
fn sod_and_mutate() {
    let o = run(&["sod", "--surface", &data("dp6.txt")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("<O(-H+E1), O(-H+E2), O(-H+E3)>"));
    assert!(run(&["sod", "--surface", &data("f0.txt")]).status.success());
    let o = run(&["mutate", "--collection", &data("beilinson.txt"), "--script", &data("script.txt")]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("step 4 helix -K: <O(-2H)> | <O(-H)> | <O>"), "{out}");
}

#[test]
fn group_and_atoms() {
    let o = run(&["group", "--action", &data("dp6_rotation.txt")]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("group order: 3"));
    assert!(out.contains("invariant rank: 2"));
    assert!(out.contains("H1(G, Pic): 0"));
    let o = run(&["group", "--action", &data("dp7_swap.txt"), "--surface", &data("dp7_orbit.txt")]);
    assert!(stdout(&o).contains("[1] H-E1-E2"));
    let o = run(&[
        "atoms",
        "--surface",
        &data("dp6.txt"),
        "--action",
        &data("dp6_rotation.txt"),
        "--contraction",
        &data("contract_point.txt"),
    ]);
    assert_eq!(stdout(&o), "{perm[3], perm[1], perm[1], perm[1]}\n");
}
