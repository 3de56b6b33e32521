//! Shared vocabulary: index subsets, integer linear forms over the unknowns
//! `x_1..x_k`, and partitions of the nonempty subsets by equal sum.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::EquationLattice;

/// Largest `k` the lattice and the search engine accept.
pub const MAX_K: usize = 8;

/// Largest `k` a [`SubsetMask`] can address.
pub const MAX_MASK_BITS: usize = 16;

/// A subset of `{1, .., k}` stored as a bit set; bit `i` is element `i + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetMask(u16);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// Builds a mask, rejecting bits outside `{1, .., k}`.
    pub fn new(bits: u32, k: usize) -> Result<Self> {
        if k > MAX_MASK_BITS {
            return Err(Error::InvalidArgument(format!("k = {k} exceeds the mask width {MAX_MASK_BITS}")));
        }
        if bits >= 1u32 << k {
            return Err(Error::InvalidArgument(format!("mask {bits:#b} has bits outside {{1..{k}}}")));
        }
        Ok(SubsetMask(bits as u16))
    }

    pub(crate) const fn from_bits(bits: u16) -> Self {
        SubsetMask(bits)
    }

    /// The subset `{i + 1}` for a zero-based variable index `i`.
    pub fn singleton(i: usize) -> Self {
        SubsetMask(1 << i)
    }

    /// Builds a mask from zero-based variable indices.
    pub fn from_indices(indices: &[usize]) -> Self {
        SubsetMask(indices.iter().fold(0u16, |m, &i| m | (1 << i)))
    }

    pub fn full(k: usize) -> Self {
        SubsetMask(((1u32 << k) - 1) as u16)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    /// Zero-based indices of the elements, ascending.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_MASK_BITS).filter(move |&i| bits >> i & 1 == 1)
    }

    /// Relabels the elements: element `i` goes to `perm[i]`.
    pub fn permuted(self, perm: &[usize]) -> SubsetMask {
        SubsetMask(self.indices().fold(0u16, |m, i| m | (1 << perm[i])))
    }

    /// All nonempty masks of `{1, .., k}` in increasing integer order.
    pub fn nonempty(k: usize) -> impl Iterator<Item = SubsetMask> {
        (1u32..(1u32 << k)).map(|b| SubsetMask(b as u16))
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.indices().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// Integer coefficient vector `(c_1, .., c_k)` standing for `sum c_i x_i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinearForm(Vec<i64>);

impl LinearForm {
    pub fn new(coeffs: Vec<i64>) -> Self {
        LinearForm(coeffs)
    }

    pub fn zero(k: usize) -> Self {
        LinearForm(vec![0; k])
    }

    /// The indicator form `sum_{i in C} x_i`.
    pub fn subset_sum(k: usize, mask: SubsetMask) -> Self {
        LinearForm((0..k).map(|i| mask.contains(i) as i64).collect())
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> LinearForm {
        LinearForm(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        LinearForm(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> LinearForm {
        let mut out = vec![0; self.0.len()];
        for (i, &c) in self.0.iter().enumerate() {
            out[perm[i]] = c;
        }
        LinearForm(out)
    }
}

impl From<Vec<i64>> for LinearForm {
    fn from(v: Vec<i64>) -> Self {
        LinearForm(v)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidArgument(format!("k must be in 1..={MAX_K}, got {k}")));
    }
    Ok(())
}

/// The form `sum_{i in C} x_i - sum_{i in C'} x_i`; `other` may be empty,
/// which yields the zero-sum form of `c`.
pub fn pair_form(k: usize, c: SubsetMask, other: SubsetMask) -> Result<LinearForm> {
    check_k(k)?;
    if c.is_empty() {
        return Err(Error::InvalidArgument("first subset of a pair must be nonempty".into()));
    }
    let full = SubsetMask::full(k);
    if !c.is_subset_of(full) || !other.is_subset_of(full) {
        return Err(Error::InvalidArgument(format!("mask outside {{1..{k}}}")));
    }
    Ok(LinearForm((0..k).map(|i| c.contains(i) as i64 - other.contains(i) as i64).collect()))
}

/// Distinctness forms `x_i - x_j` (`i < j`) followed by the zero-sum forms of
/// every nonempty subset in increasing mask order.
pub fn base_inequations(k: usize) -> Result<Vec<LinearForm>> {
    check_k(k)?;
    let mut out = Vec::with_capacity(k * (k - 1) / 2 + (1 << k) - 1);
    for i in 0..k {
        for j in i + 1..k {
            out.push(pair_form(k, SubsetMask::singleton(i), SubsetMask::singleton(j))?);
        }
    }
    out.extend(SubsetMask::nonempty(k).map(|m| LinearForm::subset_sum(k, m)));
    Ok(out)
}

/// An equivalence relation on the nonempty subsets of `{1, .., k}` whose
/// equation lattice contains none of its inequations.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AlmostExample {
    k: usize,
    /// Each class sorted; classes ordered by their smallest mask.
    classes: Vec<Vec<SubsetMask>>,
}

impl AlmostExample {
    /// Normalizes the class order; rejects anything that is not a partition
    /// of the nonempty masks.
    pub fn new(k: usize, mut classes: Vec<Vec<SubsetMask>>) -> Result<Self> {
        check_k(k)?;
        let mut seen = vec![false; 1 << k];
        for class in &mut classes {
            if class.is_empty() {
                return Err(Error::InvalidArgument("empty class".into()));
            }
            class.sort();
            for m in class.iter() {
                if m.is_empty() || m.index() >= seen.len() || seen[m.index()] {
                    return Err(Error::InvalidArgument(format!("bad or repeated mask {m}")));
                }
                seen[m.index()] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::InvalidArgument("classes do not cover every nonempty mask".into()));
        }
        classes.sort();
        Ok(AlmostExample { k, classes })
    }

    /// Builds the relation from class labels indexed by `mask - 1`.
    pub fn from_labels(k: usize, labels: &[u8]) -> Result<Self> {
        check_k(k)?;
        if labels.len() != (1 << k) - 1 {
            return Err(Error::InvalidArgument("label vector has the wrong length".into()));
        }
        let mut classes: Vec<Vec<SubsetMask>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            let l = l as usize;
            if l >= classes.len() {
                classes.resize_with(l + 1, Vec::new);
            }
            classes[l].push(SubsetMask::from_bits(i as u16 + 1));
        }
        AlmostExample::new(k, classes)
    }

    /// The relation realized by a concrete set in `Z_n`: subsets are related
    /// iff their sums agree modulo `n`.
    pub fn from_witness(n: u64, elements: &[u64]) -> Result<Self> {
        let k = elements.len();
        check_k(k)?;
        if n == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let mut sums = vec![0u64; 1 << k];
        for m in 1..1usize << k {
            let low = m.trailing_zeros() as usize;
            sums[m] = (sums[m & (m - 1)] + elements[low] % n) % n;
        }
        let mut by_sum: std::collections::BTreeMap<u64, Vec<SubsetMask>> = Default::default();
        for m in SubsetMask::nonempty(k) {
            by_sum.entry(sums[m.index()]).or_default().push(m);
        }
        AlmostExample::new(k, by_sum.into_values().collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of classes, i.e. the number of distinct nonempty sums.
    pub fn ell(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<SubsetMask>] {
        &self.classes
    }

    /// Restricted-growth labels: entry `mask - 1` holds the class index,
    /// classes numbered by first appearance.
    pub fn labels(&self) -> Vec<u8> {
        let mut labels = vec![0u8; (1 << self.k) - 1];
        for (c, class) in self.classes.iter().enumerate() {
            for m in class {
                labels[m.index() - 1] = c as u8;
            }
        }
        labels
    }

    pub fn same_class(&self, a: SubsetMask, b: SubsetMask) -> bool {
        let labels = self.labels();
        labels[a.index() - 1] == labels[b.index() - 1]
    }

    /// Relabels the underlying variables: element `i` goes to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> AlmostExample {
        let classes = self.classes.iter().map(|c| c.iter().map(|m| m.permuted(perm)).collect()).collect();
        AlmostExample::new(self.k, classes).expect("a permutation maps partitions to partitions")
    }

    /// Forms `C - C'` for every pair inside a class (each member against the
    /// class minimum); these generate the equation lattice.
    pub fn equations(&self) -> Vec<LinearForm> {
        let k = self.k;
        self.classes
            .iter()
            .flat_map(|class| {
                class[1..].iter().map(move |&m| pair_form(k, m, class[0]).expect("masks validated at construction"))
            })
            .collect()
    }

    /// Base inequations plus one form per pair of distinct classes. Any
    /// other cross-class pair differs from these by a lattice element.
    pub fn inequations(&self) -> Vec<LinearForm> {
        let k = self.k;
        let mut out = base_inequations(k).expect("k validated at construction");
        for (i, a) in self.classes.iter().enumerate() {
            for b in &self.classes[i + 1..] {
                out.push(pair_form(k, a[0], b[0]).expect("masks validated at construction"));
            }
        }
        out
    }

    /// The lattice generated by [`AlmostExample::equations`], built from
    /// scratch.
    pub fn lattice(&self) -> Result<EquationLattice> {
        let mut lat = EquationLattice::new(self.k)?;
        for eq in self.equations() {
            lat.insert(&eq)?;
        }
        Ok(lat)
    }

    /// Rebuilds the lattice and checks that no base inequation and no
    /// cross-class pair of masks is contained in it.
    pub fn audit(&self) -> Result<()> {
        let lat = self.lattice()?;
        for form in base_inequations(self.k)? {
            if lat.contains(&form)? {
                return Err(Error::Audit(format!("base inequation {:?} is implied", form.coeffs())));
            }
        }
        let labels = self.labels();
        for a in SubsetMask::nonempty(self.k) {
            for b in SubsetMask::nonempty(self.k).filter(|b| *b > a) {
                if labels[a.index() - 1] != labels[b.index() - 1] && lat.contains(&pair_form(self.k, a, b)?)? {
                    return Err(Error::Audit(format!("classes of {a} and {b} are forced equal")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(idx: &[usize]) -> SubsetMask {
        SubsetMask::from_indices(&idx.iter().map(|i| i - 1).collect::<Vec<_>>())
    }

    #[test]
    fn pair_form_examples() {
        assert_eq!(pair_form(4, m(&[1, 2]), m(&[3])).unwrap().coeffs(), &[1, 1, -1, 0]);
        assert!(pair_form(3, m(&[1]), m(&[1])).unwrap().is_zero());
        assert_eq!(pair_form(3, m(&[2]), SubsetMask::EMPTY).unwrap().coeffs(), &[0, 1, 0]);
    }

    #[test]
    fn pair_form_rejects_empty_first_side() {
        assert!(matches!(pair_form(3, SubsetMask::EMPTY, m(&[1])), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn base_inequations_small() {
        let forms: Vec<Vec<i64>> = base_inequations(2).unwrap().into_iter().map(|f| f.coeffs().to_vec()).collect();
        assert_eq!(forms, vec![vec![1, -1], vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(base_inequations(1).unwrap(), vec![LinearForm::new(vec![1])]);
        assert_eq!(base_inequations(3).unwrap().len(), 10);
    }

    #[test]
    fn base_inequation_counts() {
        for k in 1..=7 {
            assert_eq!(base_inequations(k).unwrap().len(), k * (k - 1) / 2 + (1 << k) - 1);
        }
    }

    #[test]
    fn witness_relation_of_z9_example() {
        let ae = AlmostExample::from_witness(9, &[3, 1, 4, 7]).unwrap();
        assert_eq!(ae.ell(), 8);
        ae.audit().unwrap();
    }

    #[test]
    fn labels_round_trip() {
        let ae = AlmostExample::from_witness(6, &[1, 3, 4]).unwrap();
        assert_eq!(AlmostExample::from_labels(3, &ae.labels()).unwrap(), ae);
    }

    #[test]
    fn rejects_non_partitions() {
        assert!(AlmostExample::new(2, vec![vec![m(&[1])], vec![m(&[2])]]).is_err());
        assert!(AlmostExample::new(2, vec![vec![m(&[1]), m(&[1])], vec![m(&[2]), m(&[1, 2])]]).is_err());
    }

    #[test]
    fn mask_display() {
        assert_eq!(m(&[1, 3]).to_string(), "{1,3}");
        assert_eq!(SubsetMask::new(8, 3).ok(), None);
    }
}
