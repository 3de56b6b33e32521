use std::collections::BTreeSet;
use std::io::Write;

use proptest::prelude::*;
use zsfree::search::{dedupe, enumerate, enumerate_with, Decision, Outcome, RelationState, RunControl};
use zsfree::{AlmostExample, Error, SearchConfig, SubsetMask};

fn labels_of(ex: &[AlmostExample]) -> Vec<Vec<u8>> {
    ex.iter().map(AlmostExample::labels).collect()
}

/// Every set partition of `items`, as lists of blocks.
fn partitions(items: &[SubsetMask]) -> Vec<Vec<Vec<SubsetMask>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for p in partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].push(first);
            out.push(q);
        }
        let mut q = p;
        q.push(vec![first]);
        out.push(q);
    }
    out
}

/// All almost-examples for `k`, found by auditing every partition.
fn audited(k: usize) -> Vec<AlmostExample> {
    let masks: Vec<SubsetMask> = SubsetMask::nonempty(k).collect();
    partitions(&masks).into_iter().map(|p| AlmostExample::new(k, p).unwrap()).filter(|ae| ae.audit().is_ok()).collect()
}

#[test]
fn k3_matches_partition_enumeration() {
    let all = audited(3);
    assert_eq!(partitions(&SubsetMask::nonempty(3).collect::<Vec<_>>()).len(), 877);
    for ell_max in 0..=7 {
        let keep: Vec<AlmostExample> = all.iter().filter(|a| a.ell() <= ell_max).cloned().collect();
        let mut want = labels_of(&dedupe(3, &keep));
        want.sort();
        for (sym, ac, memo) in [(true, true, true), (false, false, false), (true, false, true), (false, true, false)] {
            let cfg = SearchConfig::new(3).with_ell_max(ell_max).with_toggles(sym, ac, memo);
            let mut got = labels_of(&enumerate(&cfg).unwrap().examples);
            got.sort();
            assert_eq!(got, want, "ell_max={ell_max} toggles={sym},{ac},{memo}");
        }
    }
}

#[test]
fn toggles_do_not_change_results() {
    for k in 1..=4 {
        let reference = enumerate(&SearchConfig::new(k)).unwrap().examples;
        for bits in 0..8u8 {
            let cfg = SearchConfig::new(k).with_toggles(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            assert_eq!(enumerate(&cfg).unwrap().examples, reference, "k={k} toggles={bits:03b}");
        }
    }
}

#[test]
fn results_are_canonical_audited_and_sorted() {
    for k in 1..=5 {
        let out = enumerate(&SearchConfig::new(k)).unwrap();
        let ell_max = SearchConfig::default_ell_max(k);
        for ae in &out.examples {
            ae.audit().unwrap();
            assert!(ae.ell() <= ell_max);
        }
        let deduped = dedupe(k, &out.examples);
        assert_eq!(deduped.len(), out.examples.len(), "k={k} has relabeled duplicates");
        let keys: Vec<_> = out.examples.iter().map(|a| (a.ell(), a.labels())).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn worker_count_and_shard_depth_do_not_matter() {
    for k in 3..=5 {
        let reference = enumerate(&SearchConfig::new(k)).unwrap().examples;
        for (workers, depth) in [(4, 12), (2, 3), (3, 0), (1, 40)] {
            let mut cfg = SearchConfig::new(k).with_workers(workers);
            cfg.shard_depth = depth;
            assert_eq!(enumerate(&cfg).unwrap().examples, reference, "k={k} workers={workers} depth={depth}");
        }
    }
}

fn compatible(state: &RelationState, ae: &AlmostExample) -> bool {
    let k = ae.k();
    let masks: Vec<SubsetMask> = SubsetMask::nonempty(k).collect();
    masks.iter().enumerate().all(|(i, &a)| {
        masks[i + 1..].iter().all(|&b| match state.decision(a, b) {
            Decision::Equal => ae.same_class(a, b),
            Decision::Unequal => !ae.same_class(a, b),
            Decision::Undecided => true,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The anti-clique size never exceeds the class count of any completion
    /// that agrees with the decisions taken so far.
    #[test]
    fn anti_clique_is_a_lower_bound(steps in prop::collection::vec((1u32..8, 1u32..8, any::<bool>()), 0..8)) {
        let all = audited(3);
        let mut st = RelationState::base(3).unwrap();
        for (a, b, eq) in steps {
            if a == b {
                continue;
            }
            let outcome = if eq { Outcome::Equal } else { Outcome::Unequal };
            let (a, b) = (SubsetMask::new(a, 3).unwrap(), SubsetMask::new(b, 3).unwrap());
            let Some(next) = st.extend(a, b, outcome).unwrap() else { continue };
            st = next;
            let bound = st.clone().anti_clique_bound().unwrap();
            for ae in all.iter().filter(|ae| compatible(&st, ae)) {
                prop_assert!(bound <= ae.ell(), "bound {bound} above completion with {} classes", ae.ell());
            }
        }
    }
}

#[test]
fn empty_range_gives_nothing() {
    let out = enumerate(&SearchConfig::new(4).with_ell_max(3)).unwrap();
    assert!(out.examples.is_empty());
}

fn k5() -> SearchConfig {
    let mut cfg = SearchConfig::new(5);
    cfg.shard_depth = 6;
    cfg
}

#[test]
fn interrupted_search_resumes_to_the_same_answer() {
    let reference = enumerate(&k5()).unwrap();
    assert!(reference.shards > 4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k5.ck");

    let stop = RunControl { checkpoint: Some(path.clone()), stop_after_shards: Some(3), ..RunControl::default() };
    match enumerate_with(&k5(), &stop) {
        Err(Error::Interrupted { completed, total }) => {
            assert!(completed >= 3 && completed < total, "{completed}/{total}");
        }
        other => panic!("expected an interruption, got {other:?}"),
    }

    // a torn final line is ignored and its shard rerun
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    write!(f, "done {} 2 0.1.2", reference.shards - 1).unwrap();
    drop(f);

    let resume = RunControl { checkpoint: Some(path.clone()), resume: true, ..RunControl::default() };
    let out = enumerate_with(&k5().with_workers(3), &resume).unwrap();
    assert!(out.resumed_shards >= 3);
    assert_eq!(out.examples, reference.examples);

    // a finished checkpoint replays without exploring anything
    let again = enumerate_with(&k5(), &resume).unwrap();
    assert_eq!(again.resumed_shards, again.shards);
    assert_eq!(again.examples, reference.examples);
    let shards: BTreeSet<usize> = std::fs::read_to_string(&path)
        .unwrap()
        .lines()
        .filter_map(|l| l.strip_prefix("done ")?.split(' ').next()?.parse().ok())
        .collect();
    assert_eq!(shards.len(), reference.shards);
}

#[test]
fn resume_rejects_a_foreign_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k5.ck");
    let write = RunControl { checkpoint: Some(path.clone()), ..RunControl::default() };
    enumerate_with(&k5(), &write).unwrap();
    let resume = RunControl { checkpoint: Some(path.clone()), resume: true, ..RunControl::default() };
    let other = k5().with_ell_max(13);
    assert!(matches!(enumerate_with(&other, &resume), Err(Error::Checkpoint(_))));

    std::fs::write(&path, "not a checkpoint\n").unwrap();
    assert!(matches!(enumerate_with(&k5(), &resume), Err(Error::Checkpoint(_))));
}
