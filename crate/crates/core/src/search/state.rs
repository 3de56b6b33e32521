//! Partial relations on subset sums.
//!
//! A state keeps the equation lattice, the partition it induces on all
//! masks (the empty mask stands for the value 0), and a separation relation
//! between classes. Two masks share a class iff their difference form lies
//! in the lattice; each class stores its canonical reduced indicator vector.
//! Separations cover the base inequations, the decided inequations, and every
//! pair whose merge was found to be inconsistent. They are stored at mask
//! level, so they survive class merges unchanged.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::lattice::{EquationLattice, Row};
use crate::model::{AlmostExample, SubsetMask, MAX_K};

use super::symmetry::Shapes;

const MAX_MASKS: usize = 1 << MAX_K;

/// A set of masks of `{1, .., k}` for `k <= MAX_K`, the empty mask included.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub(crate) struct MaskSet([u64; MAX_MASKS / 64]);

impl MaskSet {
    #[inline]
    pub fn insert(&mut self, m: usize) {
        self.0[m >> 6] |= 1 << (m & 63);
    }

    #[inline]
    pub fn contains(&self, m: usize) -> bool {
        self.0[m >> 6] >> (m & 63) & 1 == 1
    }

    #[inline]
    pub fn union_with(&mut self, other: &MaskSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    #[inline]
    pub fn intersects(&self, other: &MaskSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_MASKS).filter(|&m| self.contains(m))
    }
}

/// Status of an unordered pair of subsets in a partial relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Equal,
    Unequal,
    Undecided,
}

/// A branch outcome for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Equal,
    Unequal,
}

#[derive(Clone, Debug)]
struct Class {
    /// Smallest member mask.
    rep: u16,
    members: MaskSet,
    /// Masks known to have a different sum from this class.
    sep: MaskSet,
    vec: Row,
}

/// The effect of adding one equation: the enlarged lattice and the classes
/// that fuse (only groups of two or more).
#[derive(Debug)]
pub(crate) struct Merge {
    lattice: EquationLattice,
    groups: Vec<Vec<u8>>,
}

/// Cache of consistent merges for the current lattice, keyed by class pair.
/// Inconsistent merges need no cache: they are recorded as separations.
pub(crate) struct Memo {
    enabled: bool,
    alive: HashMap<(u8, u8), Rc<Merge>>,
}

impl Memo {
    pub fn new(enabled: bool) -> Self {
        Memo { enabled, alive: HashMap::new() }
    }
}

#[derive(Clone, Debug)]
pub struct RelationState {
    k: usize,
    lattice: EquationLattice,
    class_of: [u8; MAX_MASKS],
    /// Sorted by representative; index 0 is the class of the empty mask.
    classes: Vec<Class>,
}

impl RelationState {
    /// No equations yet: every mask alone, with the distinctness and
    /// zero-sum inequations recorded. Nested masks are also separated,
    /// since `C = C'` with `C` inside `C'` forces the zero sum of `C' \ C`.
    pub fn base(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidArgument(format!("k must be in 1..={MAX_K}, got {k}")));
        }
        let n = 1usize << k;
        let mut classes = Vec::with_capacity(n);
        for m in 0..n {
            let mut vec = [0; MAX_K];
            for (i, v) in vec.iter_mut().enumerate().take(k) {
                *v = (m >> i & 1) as i64;
            }
            let mut members = MaskSet::default();
            members.insert(m);
            let mut sep = MaskSet::default();
            for o in 0..n {
                let nested = o != m && (o & m == o || o & m == m);
                let both_single = o != m && o.count_ones() == 1 && m.count_ones() == 1;
                if nested || both_single {
                    sep.insert(o);
                }
            }
            classes.push(Class { rep: m as u16, members, sep, vec });
        }
        let mut class_of = [0u8; MAX_MASKS];
        for (m, c) in class_of.iter_mut().enumerate().take(n) {
            *c = m as u8;
        }
        Ok(RelationState { k, lattice: EquationLattice::new(k)?, class_of, classes })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lattice(&self) -> &EquationLattice {
        &self.lattice
    }

    /// Number of classes of nonempty masks.
    pub fn class_count(&self) -> usize {
        self.classes.len() - 1
    }

    #[inline]
    pub(crate) fn class_of(&self, mask: u16) -> usize {
        self.class_of[mask as usize] as usize
    }

    #[inline]
    pub(crate) fn separated(&self, a: usize, b: usize) -> bool {
        self.classes[a].sep.contains(self.classes[b].rep as usize)
    }

    pub(crate) fn separate(&mut self, a: usize, b: usize) {
        let (ma, mb) = (self.classes[a].members, self.classes[b].members);
        self.classes[a].sep.union_with(&mb);
        self.classes[b].sep.union_with(&ma);
    }

    /// Status of the pair as far as the state already knows it; a pair
    /// whose merge would be inconsistent but has not been probed reads as
    /// undecided.
    pub fn decision(&self, c: SubsetMask, other: SubsetMask) -> Decision {
        let (a, b) = (self.class_of(c.bits()), self.class_of(other.bits()));
        if a == b {
            Decision::Equal
        } else if self.separated(a, b) {
            Decision::Unequal
        } else {
            Decision::Undecided
        }
    }

    /// Every pair of classes decided?
    pub fn is_complete(&self) -> bool {
        (0..self.classes.len()).all(|a| (a + 1..self.classes.len()).all(|b| self.separated(a, b)))
    }

    /// Classes of nonempty masks.
    pub fn classes(&self) -> Vec<Vec<SubsetMask>> {
        self.classes[1..].iter().map(|c| c.members.iter().map(|m| SubsetMask::from_bits(m as u16)).collect()).collect()
    }

    pub fn to_almost_example(&self) -> Result<AlmostExample> {
        AlmostExample::new(self.k, self.classes())
    }

    fn group_is_dead(&self, group: &[u8]) -> bool {
        let mut members = MaskSet::default();
        let mut sep = MaskSet::default();
        for &c in group {
            members.union_with(&self.classes[c as usize].members);
            sep.union_with(&self.classes[c as usize].sep);
        }
        members.intersects(&sep)
    }

    /// Adds the equation between classes `a` and `b` to a copy of the
    /// lattice and finds the classes that fuse. `None` when a fused group
    /// contains a separated pair.
    pub(crate) fn probe(&self, a: usize, b: usize) -> Result<Option<Merge>> {
        let k = self.k;
        // Representative masks differ from the pair by a lattice element and
        // keep the new generator in {-1, 0, 1}.
        let (ra, rb) = (self.classes[a].rep, self.classes[b].rep);
        let mut g = [0; MAX_K];
        for (j, x) in g.iter_mut().enumerate().take(k) {
            *x = (ra >> j & 1) as i64 - (rb >> j & 1) as i64;
        }
        let mut lattice = self.lattice.clone();
        lattice.insert_row(g)?;
        let mut keyed: Vec<(Row, u8)> = Vec::with_capacity(self.classes.len());
        for (i, c) in self.classes.iter().enumerate() {
            let mut v = c.vec;
            lattice.reduce_row(&mut v)?;
            keyed.push((v, i as u8));
        }
        keyed.sort_unstable();
        let mut groups = Vec::new();
        let mut start = 0;
        while start < keyed.len() {
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == keyed[start].0 {
                end += 1;
            }
            if end - start > 1 {
                let group: Vec<u8> = keyed[start..end].iter().map(|x| x.1).collect();
                if self.group_is_dead(&group) {
                    return Ok(None);
                }
                groups.push(group);
            }
            start = end;
        }
        Ok(Some(Merge { lattice, groups }))
    }

    /// [`RelationState::probe`] through the cache. Cached merges are
    /// rechecked against separations added since they were stored.
    pub(crate) fn probe_memo(&self, a: usize, b: usize, memo: &mut Memo) -> Result<Option<Rc<Merge>>> {
        let key = (a.min(b) as u8, a.max(b) as u8);
        if let Some(m) = memo.alive.get(&key) {
            if m.groups.iter().any(|g| self.group_is_dead(g)) {
                memo.alive.remove(&key);
                return Ok(None);
            }
            return Ok(Some(Rc::clone(m)));
        }
        let merge = self.probe(a, b)?.map(Rc::new);
        if memo.enabled {
            if let Some(m) = &merge {
                memo.alive.insert(key, Rc::clone(m));
            }
        }
        Ok(merge)
    }

    /// The state after a consistent merge.
    pub(crate) fn apply(&self, merge: &Merge) -> Result<RelationState> {
        let mut group_of: Vec<usize> = (0..self.classes.len()).collect();
        for g in &merge.groups {
            let head = g[0] as usize;
            for &c in &g[1..] {
                group_of[c as usize] = head;
            }
        }
        let mut fused: Vec<Option<Class>> = vec![None; self.classes.len()];
        for (i, c) in self.classes.iter().enumerate() {
            let slot = &mut fused[group_of[i]];
            match slot {
                None => *slot = Some(c.clone()),
                Some(f) => {
                    f.rep = f.rep.min(c.rep);
                    f.members.union_with(&c.members);
                    f.sep.union_with(&c.sep);
                }
            }
        }
        let mut classes: Vec<Class> = fused.into_iter().flatten().collect();
        for c in &mut classes {
            merge.lattice.reduce_row(&mut c.vec)?;
        }
        classes.sort_unstable_by_key(|c| c.rep);
        let mut class_of = [0u8; MAX_MASKS];
        for (i, c) in classes.iter().enumerate() {
            for m in c.members.iter() {
                class_of[m] = i as u8;
            }
        }
        Ok(RelationState { k: self.k, lattice: merge.lattice.clone(), class_of, classes })
    }

    /// Decides one pair. `Ok(None)` means the system became inconsistent.
    pub fn extend(&self, c: SubsetMask, other: SubsetMask, outcome: Outcome) -> Result<Option<RelationState>> {
        let limit = 1u32 << self.k;
        if c.is_empty() || other.is_empty() || c.bits() as u32 >= limit || other.bits() as u32 >= limit {
            return Err(Error::InvalidArgument(format!("pair {c}, {other} is not a pair of nonempty subsets")));
        }
        let (a, b) = (self.class_of(c.bits()), self.class_of(other.bits()));
        match outcome {
            Outcome::Unequal => {
                if a == b {
                    return Ok(None);
                }
                let mut next = self.clone();
                next.separate(a, b);
                Ok(Some(next))
            }
            Outcome::Equal => {
                if a == b {
                    return Ok(Some(self.clone()));
                }
                if self.separated(a, b) {
                    return Ok(None);
                }
                match self.probe(a, b)? {
                    None => Ok(None),
                    Some(m) => self.apply(&m).map(Some),
                }
            }
        }
    }

    /// Greedy anti-clique over classes. Candidates come in the given mask
    /// order; a class joins when merging it with every current member is
    /// inconsistent. With `persist`, inconsistent merges found on the way
    /// are recorded as separations.
    pub(crate) fn anti_clique(&mut self, order: &[u16], memo: &mut Memo, persist: bool) -> Result<usize> {
        let mut seen = [false; MAX_MASKS];
        let mut chosen: Vec<usize> = Vec::with_capacity(64);
        for &m in order {
            let c = self.class_of(m);
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let mut joins = true;
            for &a in &chosen {
                if self.separated(c, a) {
                    continue;
                }
                if self.probe_memo(c, a, memo)?.is_some() {
                    joins = false;
                    break;
                }
                if persist {
                    self.separate(c, a);
                }
            }
            if joins {
                chosen.push(c);
            }
        }
        Ok(chosen.len())
    }

    /// Lower bound on the class count of every consistent completion.
    pub fn anti_clique_bound(&mut self) -> Result<usize> {
        let order = greedy_order(self.k);
        self.anti_clique(&order, &mut Memo::new(true), true)
    }

    /// False only if no completion can give weakly increasing profiles.
    pub fn symmetry_admissible(&self) -> bool {
        Shapes::new(self.k).admissible(self)
    }
}

/// Candidate order for the anti-clique: singletons, then 2-subsets, then
/// every other nonempty mask, each block by increasing mask.
pub(crate) fn greedy_order(k: usize) -> Vec<u16> {
    let all: Vec<u16> = (1..(1u32 << k) as u16).collect();
    let mut out: Vec<u16> = all.iter().copied().filter(|m| m.count_ones() == 1).collect();
    out.extend(all.iter().copied().filter(|m| m.count_ones() == 2));
    out.extend(all.iter().copied().filter(|m| m.count_ones() > 2));
    out
}
