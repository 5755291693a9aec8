//! Black-box tests of the chordalgen binary: payload formats, exit codes,
//! cache behavior, and stream separation.

use std::process::{Command, Output};

use chordal::format::from_graph6;
use chordal::graph::is_automorphism;
use chordal::Permutation;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chordalgen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chordalgen"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn count_values() {
    let out = run(&["count", "--n", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "61");

    let out = run(&["count", "--n", "3", "--perm", "(1 2)"]);
    assert_eq!(stdout(&out).trim(), "4");

    let out = run(&["count", "--n", "1"]);
    assert_eq!(stdout(&out).trim(), "1");

    // image-list form parses too
    let out = run(&["count", "--n", "3", "--perm", "2,1,3"]);
    assert_eq!(stdout(&out).trim(), "4");
}

#[test]
fn count_rejects_bad_input() {
    let out = run(&["count", "--n", "3", "--perm", "(1 9)"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["count", "--n", "3", "--perm", "nope(("]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unlabeled_two_vertices() {
    let out = run(&[
        "sample", "--n", "2", "--unlabeled", "--samples", "4", "--seed", "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for l in lines {
        assert!(l == "A?" || l == "A_", "unexpected line {l:?}");
    }
}

#[test]
fn labeled_outputs_respect_perm_and_roundtrip() {
    let out = run(&[
        "sample", "--n", "5", "--labeled", "--perm", "(1 2)", "--samples", "40", "--seed", "9",
    ]);
    assert!(out.status.success());
    let pi = Permutation::parse("(1 2)", 5).unwrap();
    for line in stdout(&out).lines() {
        let g = from_graph6(line).unwrap();
        assert!(g.is_chordal());
        assert!(is_automorphism(&g, &pi).unwrap());
        // bit-exact round trip
        assert_eq!(chordal::format::to_graph6(&g).unwrap(), line);
    }
}

#[test]
fn edges_format_roundtrip() {
    let out = run(&[
        "sample", "--n", "4", "--labeled", "--samples", "6", "--seed", "2", "--format", "edges",
    ]);
    assert!(out.status.success());
    for block in stdout(&out).split("\n\n") {
        let block = block.trim_start_matches('\n');
        let g = chordal::format::from_edge_list(block, 4).unwrap();
        assert!(g.is_chordal());
    }
}

#[test]
fn diagnostics_go_to_stderr_only() {
    let out = run(&[
        "sample", "--n", "4", "--unlabeled", "--samples", "3", "--seed", "1", "--mode", "exact",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 3);
    for l in err.lines() {
        assert!(l.starts_with("mu=") && l.contains("iters=") && l.contains("mode=exact"));
    }
    for l in stdout(&out).lines() {
        assert!(from_graph6(l).is_ok(), "stdout must carry payload only");
    }
}

#[test]
fn canonical_flag_canonicalizes() {
    let out = run(&[
        "sample", "--n", "4", "--unlabeled", "--samples", "10", "--seed", "3", "--mode", "exact",
        "--canonical",
    ]);
    assert!(out.status.success());
    for l in stdout(&out).lines() {
        let g = from_graph6(l).unwrap();
        let canon = chordal::oracle::canonical_bits(&g).unwrap();
        let rep = chordal::oracle::graph_from_canonical_bits(4, canon);
        assert_eq!(&rep, &g, "output not canonical: {l}");
    }
}

#[test]
fn cache_roundtrip_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("memo.txt");
    let cache_s = cache.to_str().unwrap();

    let first = run(&["count", "--n", "5", "--perm", "(1 2)", "--cache", cache_s]);
    assert!(first.status.success());
    assert!(cache.exists());

    let second = run(&["count", "--n", "5", "--perm", "(1 2)", "--cache", cache_s]);
    assert!(second.status.success());
    assert_eq!(stdout(&first), stdout(&second));
    assert!(String::from_utf8(second.stderr).unwrap().contains("loaded"));

    // same path, different session: exit 3
    let bad = run(&["count", "--n", "4", "--cache", cache_s]);
    assert_eq!(bad.status.code(), Some(3));

    // env var overrides the flag
    let env_run = run_env(
        &["count", "--n", "4", "--cache", "/nonexistent/never-used"],
        &[("CHORDALGEN_CACHE", cache_s)],
    );
    assert_eq!(env_run.status.code(), Some(3));
}

#[test]
fn verify_small_passes() {
    let out = run(&["verify", "--n", "3"]);
    assert!(out.status.success(), "verify failed: {}", stdout(&out));
    let text = stdout(&out);
    for suite in ["counts", "fix counts", "burnside", "sampler chi2", "unlabeled chi2"] {
        assert!(text.contains(&format!("{suite}: OK")), "missing {suite} in {text}");
    }
}

#[test]
fn bounds_rows() {
    let out = run(&["bounds", "--n", "4", "--mode", "exact"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4); // mu = 0, 2, 3, 4
    assert!(rows[0].starts_with("0  61"));

    let out = run(&["bounds", "--n", "1", "--mode", "exact"]);
    assert_eq!(stdout(&out).lines().skip(1).count(), 1);
}

#[test]
fn census_export_format() {
    let out = run(&["census", "--n", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    let mut orbit_total = 0u64;
    for line in text.lines() {
        let (g6, orbit) = line.split_once(' ').unwrap();
        let g = from_graph6(g6).unwrap();
        assert!(g.is_chordal());
        orbit_total += orbit.parse::<u64>().unwrap();
    }
    assert_eq!(orbit_total, 61);
}

#[test]
fn seed_changes_output() {
    let a = run(&["sample", "--n", "5", "--labeled", "--samples", "20", "--seed", "1"]);
    let b = run(&["sample", "--n", "5", "--labeled", "--samples", "20", "--seed", "2"]);
    assert_ne!(stdout(&a), stdout(&b));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.g6");
    let to_file = run(&[
        "sample", "--n", "4", "--labeled", "--samples", "5", "--seed", "6", "--output",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let direct = run(&["sample", "--n", "4", "--labeled", "--samples", "5", "--seed", "6"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&direct));
}
