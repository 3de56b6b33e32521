//! Depth-first enumeration split into shards.
//!
//! Every frame owns one state. Inside a frame, pairs are scanned in order:
//! pairs already in one class or already separated are skipped, pairs whose
//! merge is inconsistent are separated on the spot. At the first pair that
//! could go either way the frame branches: the equal branch runs in a child
//! frame on a merged copy, the unequal branch continues in place.
//!
//! A shard is the subtree below a branching point at a fixed number of
//! branching decisions from the root, named by the decisions on its path.
//! Replaying a path reaches the same node because every pruning step depends
//! only on the frame history along that path.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::ops::AddAssign;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::AlmostExample;

use super::canon::Canonicalizer;
use super::checkpoint::Checkpoint;
use super::order::{PairOrder, Stage};
use super::state::{greedy_order, Memo, Outcome, RelationState};
use super::symmetry::Shapes;
use super::SearchConfig;

/// One branching decision: the position of the pair in the order and the
/// branch taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub pos: u32,
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub branch_points: u64,
    pub leaves: u64,
    pub pruned_symmetry: u64,
    pub pruned_anti_clique: u64,
    pub pruned_class_count: u64,
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, o: Self) {
        self.nodes += o.nodes;
        self.branch_points += o.branch_points;
        self.leaves += o.leaves;
        self.pruned_symmetry += o.pruned_symmetry;
        self.pruned_anti_clique += o.pruned_anti_clique;
        self.pruned_class_count += o.pruned_class_count;
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// One representative per relabeling orbit, canonical, sorted by class
    /// count and then by labels.
    pub examples: Vec<AlmostExample>,
    pub stats: SearchStats,
    pub shards: usize,
    /// Shards taken from a checkpoint instead of being explored.
    pub resumed_shards: usize,
}

/// Interruption and persistence for [`enumerate_with`].
#[derive(Clone, Debug, Default)]
pub struct RunControl {
    /// Progress file, created or extended.
    pub checkpoint: Option<PathBuf>,
    /// Reuse shards already recorded in `checkpoint`.
    pub resume: bool,
    pub interrupt: Option<Arc<AtomicBool>>,
    /// Raise the interrupt after this many shards finish in this run.
    pub stop_after_shards: Option<usize>,
}

pub fn enumerate(cfg: &SearchConfig) -> Result<SearchOutcome> {
    enumerate_with(cfg, &RunControl::default())
}

struct Context {
    order: PairOrder,
    greedy: Vec<u16>,
    shapes: Shapes,
    canon: Canonicalizer,
}

type Labels = Vec<u8>;
type ShardResult = (BTreeSet<Labels>, SearchStats);

struct Explorer<'a> {
    cfg: &'a SearchConfig,
    ctx: &'a Context,
    interrupt: &'a AtomicBool,
    /// Stop at branching points this deep and record them as shards.
    collect_at: Option<usize>,
    prefix: &'a [Step],
    path: Vec<Step>,
    shards: Vec<Vec<Step>>,
    found: BTreeSet<Labels>,
    stats: SearchStats,
}

impl<'a> Explorer<'a> {
    fn new(cfg: &'a SearchConfig, ctx: &'a Context, interrupt: &'a AtomicBool) -> Self {
        Explorer {
            cfg,
            ctx,
            interrupt,
            collect_at: None,
            prefix: &[],
            path: Vec::new(),
            shards: Vec::new(),
            found: BTreeSet::new(),
            stats: SearchStats::default(),
        }
    }

    fn run(&mut self) -> Result<()> {
        if self.cfg.ell_max < self.cfg.k {
            return Ok(());
        }
        let root = RelationState::base(self.cfg.k)?;
        self.frame(root, 0, usize::MAX)
    }

    fn frame(&mut self, st: RelationState, pos: usize, since: usize) -> Result<()> {
        let depth = self.path.len();
        let r = self.frame_inner(st, pos, since);
        self.path.truncate(depth);
        r
    }

    /// Pruning tests at a node. `since` counts decisions since the last
    /// anti-clique computation on this path.
    fn node_ok(&mut self, st: &mut RelationState, memo: &mut Memo, pos: usize, since: &mut usize) -> Result<bool> {
        self.stats.nodes += 1;
        if self.stats.nodes.is_multiple_of(1024) && self.interrupt.load(Ordering::Relaxed) {
            return Err(Error::Interrupted { completed: 0, total: 0 });
        }
        if self.cfg.symmetry && !self.ctx.shapes.admissible(st) {
            self.stats.pruned_symmetry += 1;
            return Ok(false);
        }
        if self.cfg.anti_clique {
            let period = match self.ctx.order.stage(pos.min(self.ctx.order.len().saturating_sub(1))) {
                Stage::OneTwo => self.cfg.bound_period.0,
                _ => self.cfg.bound_period.1,
            };
            if *since >= period {
                *since = 0;
                let bound = st.anti_clique(&self.ctx.greedy, memo, self.cfg.memo)?;
                if bound > self.cfg.ell_max {
                    self.stats.pruned_anti_clique += 1;
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn frame_inner(&mut self, mut st: RelationState, mut pos: usize, mut since: usize) -> Result<()> {
        let order = &self.ctx.order;
        let mut memo = Memo::new(self.cfg.memo);
        if !self.node_ok(&mut st, &mut memo, pos, &mut since)? {
            return Ok(());
        }
        loop {
            let mut merge = None;
            while pos < order.len() {
                let (x, y) = order.pair(pos);
                let (a, b) = (st.class_of(x), st.class_of(y));
                if a != b && !st.separated(a, b) {
                    match st.probe_memo(a, b, &mut memo)? {
                        Some(m) => {
                            merge = Some((a, b, m));
                            break;
                        }
                        None => st.separate(a, b),
                    }
                }
                pos += 1;
            }
            let Some((a, b, merge)) = merge else {
                self.leaf(&st);
                return Ok(());
            };
            self.stats.branch_points += 1;
            let depth = self.path.len();
            if self.collect_at == Some(depth) {
                self.shards.push(self.path.clone());
                return Ok(());
            }
            let replay = self.prefix.get(depth).copied();
            if let Some(step) = replay {
                if step.pos as usize != pos {
                    return Err(Error::Checkpoint(format!(
                        "shard prefix names pair {} at depth {depth}, the search branches on pair {pos}",
                        step.pos
                    )));
                }
            }
            if replay.is_none_or(|s| s.outcome == Outcome::Equal) {
                let child = st.apply(&merge)?;
                self.path.push(Step { pos: pos as u32, outcome: Outcome::Equal });
                self.frame(child, pos + 1, since.saturating_add(1))?;
                self.path.pop();
            }
            if replay.is_some_and(|s| s.outcome == Outcome::Equal) {
                return Ok(());
            }
            drop(merge);
            st.separate(a, b);
            self.path.push(Step { pos: pos as u32, outcome: Outcome::Unequal });
            pos += 1;
            since = since.saturating_add(1);
            if !self.node_ok(&mut st, &mut memo, pos, &mut since)? {
                return Ok(());
            }
        }
    }

    fn leaf(&mut self, st: &RelationState) {
        self.stats.leaves += 1;
        if st.class_count() > self.cfg.ell_max {
            self.stats.pruned_class_count += 1;
            return;
        }
        // all pairs are decided here, so this is the exact profile test
        if self.cfg.symmetry && !self.ctx.shapes.admissible(st) {
            self.stats.pruned_symmetry += 1;
            return;
        }
        let n = 1u16 << self.cfg.k;
        let labels: Labels = (1..n).map(|m| st.class_of(m) as u8 - 1).collect();
        self.found.insert(self.ctx.canon.canonical_labels(&labels));
    }
}

/// Runs the search with optional checkpointing and interruption.
pub fn enumerate_with(cfg: &SearchConfig, control: &RunControl) -> Result<SearchOutcome> {
    cfg.validate()?;
    let k = cfg.k;
    let ctx = Context {
        order: PairOrder::new(k),
        greedy: greedy_order(k),
        shapes: Shapes::new(k),
        canon: Canonicalizer::new(k),
    };
    let local_flag = AtomicBool::new(false);
    let interrupt: &AtomicBool = control.interrupt.as_deref().unwrap_or(&local_flag);

    let mut top = Explorer::new(cfg, &ctx, interrupt);
    top.collect_at = Some(cfg.shard_depth);
    top.run()?;
    let shards = std::mem::take(&mut top.shards);
    let mut found = std::mem::take(&mut top.found);
    let mut stats = top.stats;

    let mut done: Vec<Option<BTreeSet<Labels>>> = vec![None; shards.len()];
    let mut sink: Option<Mutex<BufWriter<File>>> = None;
    if let Some(path) = &control.checkpoint {
        let fresh = Checkpoint::new(cfg, shards.clone());
        let ck = if control.resume && path.exists() {
            let mut old = Checkpoint::read(path)?;
            old.validate_against(&fresh)?;
            old
        } else {
            fresh
        };
        for (id, labels) in &ck.done {
            done[*id] = Some(labels.iter().cloned().collect());
        }
        sink = Some(Mutex::new(ck.rewrite(path)?));
    }
    let resumed = done.iter().filter(|d| d.is_some()).count();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let finished = AtomicUsize::new(0);
    let pending: Vec<usize> = (0..shards.len()).filter(|&i| done[i].is_none()).collect();
    let results: Vec<(usize, Result<ShardResult>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|&id| {
                if interrupt.load(Ordering::Relaxed) {
                    return (id, Err(Error::Interrupted { completed: 0, total: 0 }));
                }
                let mut ex = Explorer::new(cfg, &ctx, interrupt);
                ex.prefix = &shards[id];
                let r = ex.run().and_then(|()| {
                    if let Some(sink) = &sink {
                        let mut w = sink.lock().expect("checkpoint writer poisoned");
                        Checkpoint::append_done(&mut w, id, &ex.found)?;
                    }
                    Ok(())
                });
                if r.is_ok() {
                    let n = finished.fetch_add(1, Ordering::SeqCst) + 1;
                    if control.stop_after_shards.is_some_and(|limit| n >= limit) {
                        interrupt.store(true, Ordering::SeqCst);
                    }
                }
                (id, r.map(|()| (std::mem::take(&mut ex.found), ex.stats)))
            })
            .collect()
    });

    for (id, r) in results {
        match r {
            Ok((labels, s)) => {
                stats += s;
                done[id] = Some(labels);
            }
            Err(Error::Interrupted { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let completed = done.iter().filter(|d| d.is_some()).count();
    if completed < shards.len() {
        return Err(Error::Interrupted { completed, total: shards.len() });
    }
    for labels in done.into_iter().flatten() {
        found.extend(labels);
    }
    let mut examples = Vec::with_capacity(found.len());
    for labels in found {
        let ae = AlmostExample::from_labels(k, &labels)?;
        ae.audit().map_err(|e| Error::Audit(format!("emitted relation fails the consistency audit: {e}")))?;
        examples.push(ae);
    }
    examples.sort_by(|a, b| a.ell().cmp(&b.ell()).then_with(|| a.labels().cmp(&b.labels())));
    Ok(SearchOutcome { examples, stats, shards: shards.len(), resumed_shards: resumed })
}
