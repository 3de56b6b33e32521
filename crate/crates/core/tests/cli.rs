use std::path::Path;
use std::process::{Command, Output};

fn zsfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zsfree")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    zsfree(args).status.code().expect("exited normally")
}

fn records(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["search", "--k", "9"]), 2);
    assert_eq!(code(&["search", "--k", "0"]), 2);
    assert_eq!(code(&["search", "--k", "3", "--workers", "0"]), 2);
    assert_eq!(code(&["oracle", "--k", "3"]), 2);
    assert_eq!(code(&["oracle", "--k", "3", "--n-range", "9..4"]), 2);
    assert_eq!(code(&["bogus"]), 2);
}

#[test]
fn oracle_capacity_exits_3() {
    assert_eq!(code(&["oracle", "--k", "2", "--n", "2000"]), 3);
}

#[test]
fn missing_input_exits_1() {
    assert_eq!(code(&["table", "--k", "3", "--search-output", "/nonexistent/zsfree.jsonl"]), 1);
}

#[test]
fn search_with_small_bound_is_empty_and_succeeds() {
    let out = zsfree(&["search", "--k", "2", "--lmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains('0'));
}

#[test]
fn oracle_text_and_records() {
    let out = zsfree(&["oracle", "--k", "3", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains('5'));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.jsonl");
    let p = path.to_str().unwrap();
    assert_eq!(code(&["oracle", "--k", "3", "--n-range", "5..8", "--format", "records", "--out", p]), 0);
    let values: Vec<Option<u64>> = records(&path).iter().map(|r| r["value"].as_u64()).collect();
    assert_eq!(values, vec![None, Some(5), Some(6), Some(5)]);
}

#[test]
fn records_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for (w, path) in [("1", &a), ("3", &b)] {
        let p = path.to_str().unwrap();
        assert_eq!(
            code(&["search", "--k", "5", "--workers", w, "--shard-depth", "6", "--format", "records", "--out", p]),
            0
        );
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let recs = records(&a);
    assert_eq!(recs[0]["type"], "summary");
    assert_eq!(recs.iter().filter(|r| r["type"] == "almost_example").count(), 8);
}

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    [base, extra].concat()
}

#[test]
fn interrupted_search_exits_4_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("k5.ck");
    let full = dir.path().join("full.jsonl");
    let resumed = dir.path().join("resumed.jsonl");
    let (ck, full, resumed) = (ck.to_str().unwrap(), full.to_str().unwrap(), resumed.to_str().unwrap());
    let base = ["search", "--k", "5", "--shard-depth", "6", "--format", "records"];

    assert_eq!(code(&with(&base, &["--out", full])), 0);
    assert_eq!(code(&with(&base, &["--checkpoint", ck, "--stop-after-shards", "2"])), 4);
    assert!(std::fs::read_to_string(ck).unwrap().starts_with("zsfree-checkpoint v1\n"));
    assert_eq!(code(&with(&base, &["--resume", ck, "--workers", "2", "--out", resumed])), 0);
    assert_eq!(std::fs::read(full).unwrap(), std::fs::read(resumed).unwrap());

    // a checkpoint from another configuration is a usage error
    assert_eq!(code(&["search", "--k", "5", "--lmax", "13", "--resume", ck]), 2);
}

#[test]
fn table_from_search_records_matches_inline_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.jsonl");
    let t1 = dir.path().join("t1.jsonl");
    let t2 = dir.path().join("t2.jsonl");
    let (s, t1p, t2p) = (s.to_str().unwrap(), t1.to_str().unwrap(), t2.to_str().unwrap());
    assert_eq!(code(&["search", "--k", "4", "--format", "records", "--out", s]), 0);
    assert_eq!(
        code(&["table", "--k", "4", "--search-output", s, "--no-inline", "--format", "records", "--out", t1p]),
        0
    );
    assert_eq!(code(&["table", "--k", "4", "--format", "records", "--out", t2p]), 0);
    assert_eq!(std::fs::read(&t1).unwrap(), std::fs::read(&t2).unwrap());
    let rows: Vec<(u64, u64)> =
        records(&t1).iter().map(|r| (r["divisor"].as_u64().unwrap(), r["value"].as_u64().unwrap())).collect();
    assert_eq!(rows, vec![(9, 8), (2, 9), (3, 9), (1, 10)]);
    assert_eq!(code(&["table", "--k", "4", "--no-inline"]), 2);
}

#[test]
fn audit_passes() {
    let out = zsfree(&["audit", "--k-max", "3", "--n-max", "14"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
