use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn voronoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voronoi"))
        .args(args)
        .env_remove("VORONOI_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn build_writes_two_orbits_for_rank_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = voronoi(&["build", "--n", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(doc["N"], 2);
    let degrees: Vec<u64> = doc["orbits"].as_array().unwrap().iter().map(|o| o["degree"].as_u64().unwrap()).collect();
    assert_eq!(degrees, vec![2, 1]);
}

#[test]
fn build_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&voronoi(&["build", "--n", "3", "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&voronoi(&["--threads", "1", "build", "--n", "3", "--out", b.to_str().unwrap()])), 0);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn laplacian_from_saved_complex_matches_fresh_build() {
    let dir = tempfile::tempdir().unwrap();
    let complex = dir.path().join("c.json");
    let from_file = dir.path().join("l1.json");
    let fresh = dir.path().join("l2.json");
    assert_eq!(code(&voronoi(&["build", "--n", "2", "--out", complex.to_str().unwrap()])), 0);
    let out = voronoi(&[
        "laplacian",
        "--n",
        "2",
        "--degree",
        "2",
        "--complex",
        complex.to_str().unwrap(),
        "--out",
        from_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&voronoi(&["laplacian", "--n", "2", "--degree", "2", "--out", fresh.to_str().unwrap()])), 0);
    assert_eq!(fs::read(&from_file).unwrap(), fs::read(&fresh).unwrap());
    let doc: Value = serde_json::from_slice(&fs::read(&fresh).unwrap()).unwrap();
    assert_eq!((doc["rows"].as_u64(), doc["cols"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn cache_directory_is_used_and_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_voronoi"))
            .args(["build", "--n", "2", "--out", path.to_str().unwrap()])
            .env("VORONOI_CACHE_DIR", &cache)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        fs::read(path).unwrap()
    };
    let first = run("a.json");
    assert!(fs::read_dir(&cache).unwrap().count() > 0);
    assert_eq!(first, run("b.json"));
}

#[test]
fn certify_rank_two_prints_corank() {
    let out = voronoi(&["certify", "--n", "2", "--degree", "2", "--expect", "1", "--json"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["corank"], 1);
    assert_eq!(doc["cross_check_corank"], 1);
}

#[test]
fn wrong_expectation_exits_one() {
    let out = voronoi(&["certify", "--n", "3", "--expect", "5"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("= 4"));
}

#[test]
fn unsupported_rank_is_a_usage_error() {
    assert_eq!(code(&voronoi(&["certify", "--n", "5"])), 2);
    assert_eq!(code(&voronoi(&["build", "--n", "1", "--out", "unused.json"])), 2);
}

#[test]
fn empty_degree_is_rejected() {
    let out = voronoi(&["laplacian", "--n", "2", "--degree", "99"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree 99"));
}

#[test]
fn unreadable_complex_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, b"{\"N\": 2, \"orbits\": 7}").unwrap();
    let out = voronoi(&["laplacian", "--n", "2", "--degree", "1", "--complex", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_rank_three_passes() {
    let out = voronoi(&["verify", "--n", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn rep_limit_truncates_entries() {
    let out = voronoi(&["rep", "--n", "3", "--limit", "3"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["dim"], 156);
    assert_eq!(doc["p"], 3);
    assert_eq!(doc["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn reproduce_reports_headline_corank() {
    let out = voronoi(&["reproduce"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS N=3: corank 4"));
}
