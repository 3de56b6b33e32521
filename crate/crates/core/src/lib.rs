//! Minimal subset-sum counts of zero-sum-free sets in cyclic groups.
//!
//! A zero-sum-free set `B` of `k` residues in `Z_n` has some number `ell` of
//! distinct nonempty subset sums. The pattern of coincidences among the sums
//! is a partition of the nonempty subsets of `{1, .., k}`. [`search`]
//! enumerates the partitions that survive integer-lattice consistency,
//! [`solver`] solves their equations over `Q/Z` and turns solutions into
//! concrete sets, [`oracle`] computes the minimum by direct enumeration, and
//! [`report`] joins the two into per-`k` tables.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod report;
pub mod search;
pub mod solver;

pub use error::{Error, Result};
pub use lattice::EquationLattice;
pub use model::{AlmostExample, LinearForm, SubsetMask};
pub use search::{enumerate, SearchConfig};
