//! Enumeration of almost-examples: partitions of the nonempty subsets of
//! `{1, .., k}` by subset sum whose equations imply none of their
//! inequations.

mod canon;
mod checkpoint;
mod engine;
mod order;
mod state;
mod symmetry;

pub use canon::{dedupe, Canonicalizer};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC};
pub use engine::{enumerate, enumerate_with, RunControl, SearchOutcome, SearchStats, Step};
pub use order::{PairOrder, Stage};
pub use state::{Decision, Outcome, RelationState};
pub use symmetry::{is_canonical, profiles, SymmetryProfile};

use crate::error::{Error, Result};
use crate::model::MAX_K;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub k: usize,
    /// Largest class count kept.
    pub ell_max: usize,
    pub symmetry: bool,
    pub anti_clique: bool,
    pub memo: bool,
    pub workers: usize,
    /// Number of branching decisions that defines one shard.
    pub shard_depth: usize,
    /// Decisions between anti-clique recomputations while singleton against
    /// 2-subset pairs are decided, and afterwards.
    pub bound_period: (usize, usize),
}

impl SearchConfig {
    pub fn new(k: usize) -> Self {
        SearchConfig {
            k,
            ell_max: Self::default_ell_max(k),
            symmetry: true,
            anti_clique: true,
            memo: true,
            workers: 1,
            shard_depth: 12,
            bound_period: (1, 4),
        }
    }

    /// One less than the class count of `{1, .., k}` in a large cyclic group.
    pub fn default_ell_max(k: usize) -> usize {
        (k * (k + 1) / 2).saturating_sub(1)
    }

    pub fn with_ell_max(mut self, ell_max: usize) -> Self {
        self.ell_max = ell_max;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_toggles(mut self, symmetry: bool, anti_clique: bool, memo: bool) -> Self {
        self.symmetry = symmetry;
        self.anti_clique = anti_clique;
        self.memo = memo;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > MAX_K {
            return Err(Error::InvalidArgument(format!("k must be in 1..={MAX_K}, got {}", self.k)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("at least one worker is required".into()));
        }
        if self.bound_period.0 == 0 || self.bound_period.1 == 0 {
            return Err(Error::InvalidArgument("bound periods must be positive".into()));
        }
        Ok(())
    }
}
