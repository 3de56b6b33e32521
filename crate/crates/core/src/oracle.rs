//! Ground truth by direct enumeration: subset sums in `Z_n`, the minimal
//! sum count `f_n(k)`, and checks of concrete example sets.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus the bit-set enumeration handles.
pub const CAPACITY: u64 = 1024;

const WORDS: usize = (CAPACITY as usize) / 64;

/// A subset of `Z_n` for `n <= CAPACITY`.
#[derive(Clone, Copy, PartialEq, Eq)]
struct CyclicSet {
    w: [u64; WORDS],
}

impl CyclicSet {
    const EMPTY: CyclicSet = CyclicSet { w: [0; WORDS] };

    #[inline]
    fn words(n: usize) -> usize {
        n.div_ceil(64)
    }

    #[inline]
    fn insert(&mut self, x: usize) {
        self.w[x / 64] |= 1 << (x % 64);
    }

    #[inline]
    fn contains(&self, x: usize) -> bool {
        self.w[x / 64] >> (x % 64) & 1 == 1
    }

    #[inline]
    fn count(&self, n: usize) -> usize {
        self.w[..Self::words(n)].iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `{x + b mod n : x in self}` for `0 < b < n`.
    #[inline]
    fn rotated(&self, b: usize, n: usize) -> CyclicSet {
        let nw = Self::words(n);
        if nw == 1 {
            let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let x = self.w[0];
            let hi = if n - b >= 64 { 0 } else { x >> (n - b) };
            return CyclicSet {
                w: {
                    let mut w = [0; WORDS];
                    w[0] = ((x << b) | hi) & mask;
                    w
                },
            };
        }
        let mut out = CyclicSet::EMPTY;
        shl_into(&self.w[..nw], b, &mut out.w[..nw]);
        let mut wrapped = [0u64; WORDS];
        shr_into(&self.w[..nw], n - b, &mut wrapped[..nw]);
        for (o, w) in out.w[..nw].iter_mut().zip(&wrapped[..nw]) {
            *o |= w;
        }
        let tail = n % 64;
        if tail != 0 {
            out.w[nw - 1] &= (1u64 << tail) - 1;
        }
        out
    }

    #[inline]
    fn union(mut self, other: &CyclicSet, n: usize) -> CyclicSet {
        for i in 0..Self::words(n) {
            self.w[i] |= other.w[i];
        }
        self
    }

    /// Nonempty sums after adjoining `b`.
    #[inline]
    fn add_element(&self, b: usize, n: usize) -> CyclicSet {
        let mut next = self.rotated(b, n).union(self, n);
        next.insert(b);
        next
    }
}

fn shl_into(src: &[u64], s: usize, dst: &mut [u64]) {
    let (ws, bs) = (s / 64, s % 64);
    for i in (0..src.len()).rev() {
        let mut v = 0;
        if i >= ws {
            v = src[i - ws] << bs;
            if bs > 0 && i > ws {
                v |= src[i - ws - 1] >> (64 - bs);
            }
        }
        dst[i] = v;
    }
}

fn shr_into(src: &[u64], s: usize, dst: &mut [u64]) {
    let (ws, bs) = (s / 64, s % 64);
    for i in 0..src.len() {
        let mut v = 0;
        if i + ws < src.len() {
            v = src[i + ws] >> bs;
            if bs > 0 && i + ws + 1 < src.len() {
                v |= src[i + ws + 1] << (64 - bs);
            }
        }
        dst[i] = v;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumsetInfo {
    pub zero_sum_free: bool,
    /// Number of distinct nonempty subset sums.
    pub count: usize,
}

/// Builds the nonempty subset sums one element at a time. Uses the bit set
/// for `n <= CAPACITY` and a sorted residue list above that.
pub fn sumset_size(n: u64, elements: &[u64]) -> SumsetInfo {
    assert!(n > 0, "modulus must be positive");
    if n <= CAPACITY {
        let n = n as usize;
        let mut s = CyclicSet::EMPTY;
        for &b in elements {
            let b = (b % n as u64) as usize;
            s = if b == 0 {
                let mut t = s;
                t.insert(0);
                t
            } else {
                s.add_element(b, n)
            };
        }
        return SumsetInfo { zero_sum_free: !s.contains(0), count: s.count(n) };
    }
    let mut sums: Vec<u64> = Vec::new();
    for &b in elements {
        let b = b % n;
        let mut next: Vec<u64> = sums.iter().map(|&s| (s + b) % n).collect();
        next.push(b);
        next.extend_from_slice(&sums);
        next.sort_unstable();
        next.dedup();
        sums = next;
    }
    SumsetInfo { zero_sum_free: sums.first() != Some(&0), count: sums.len() }
}

/// A candidate set together with what enumeration says about it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub n: u64,
    pub elements: Vec<u64>,
    /// `|Sigma(B)| - 1`.
    pub sum_count: usize,
    pub zero_sum_free: bool,
}

impl WitnessReport {
    pub fn of(n: u64, elements: &[u64]) -> Self {
        let info = sumset_size(n, elements);
        WitnessReport { n, elements: elements.to_vec(), sum_count: info.count, zero_sum_free: info.zero_sum_free }
    }
}

/// `f_n(k)` with a minimizing set; `value == None` means no zero-sum-free
/// `k`-set exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FValue {
    pub value: Option<usize>,
    pub witness: Option<WitnessReport>,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Only visit one set per orbit of `B -> uB`, `u` a unit mod `n`.
    pub orbit_reduction: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { orbit_reduction: true }
    }
}

struct Enumerator<'a> {
    n: usize,
    k: usize,
    units: &'a [usize],
    orbit_reduction: bool,
    best: usize,
    best_set: Option<Vec<usize>>,
    chosen: Vec<usize>,
}

impl Enumerator<'_> {
    /// Depth-first over increasing elements; prefixes with a zero sum or more
    /// sums than the incumbent are cut, since sums only grow.
    fn walk(&mut self, sums: &CyclicSet, next: usize) {
        if self.chosen.len() == self.k {
            let count = sums.count(self.n);
            if count < self.best || (count == self.best && self.best_set.is_none()) {
                if self.orbit_reduction && !self.is_orbit_minimum() {
                    return;
                }
                self.best = count;
                self.best_set = Some(self.chosen.clone());
            }
            return;
        }
        let need = self.k - self.chosen.len();
        for e in next..self.n {
            if self.n - e < need {
                break;
            }
            let s = sums.add_element(e, self.n);
            if s.contains(0) || s.count(self.n) > self.best {
                continue;
            }
            self.chosen.push(e);
            self.walk(&s, e + 1);
            self.chosen.pop();
        }
    }

    fn is_orbit_minimum(&self) -> bool {
        let mut image = vec![0usize; self.k];
        for &u in self.units {
            for (dst, &b) in image.iter_mut().zip(&self.chosen) {
                *dst = u * b % self.n;
            }
            image.sort_unstable();
            if image < self.chosen {
                return false;
            }
        }
        true
    }
}

/// Minimum of `|Sigma(B)| - 1` over zero-sum-free `k`-subsets of `Z_n`.
/// Ties resolve to the lexicographically smallest sorted set, so the
/// witness does not depend on the thread schedule.
pub fn brute_force_f(n: u64, k: usize, opts: OracleOptions) -> Result<FValue> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if n > CAPACITY {
        return Err(Error::Capacity { n, capacity: CAPACITY });
    }
    let n = n as usize;
    let units: Vec<usize> = (1..n).filter(|u| u.gcd(&n) == 1).collect();
    // The orbit minimum starts with min_i gcd(b_i, n), a divisor of n.
    let firsts: Vec<usize> = (1..n).filter(|&b| !opts.orbit_reduction || n.is_multiple_of(b)).collect();
    let best = firsts
        .par_iter()
        .filter_map(|&first| {
            let mut en = Enumerator {
                n,
                k,
                units: &units,
                orbit_reduction: opts.orbit_reduction,
                best: usize::MAX,
                best_set: None,
                chosen: vec![first],
            };
            let start = CyclicSet::EMPTY.add_element(first, n);
            if start.contains(0) {
                return None;
            }
            en.walk(&start, first + 1);
            en.best_set.map(|set| (en.best, set))
        })
        .min();
    Ok(match best {
        None => FValue { value: None, witness: None },
        Some((value, set)) => {
            let elements: Vec<u64> = set.iter().map(|&b| b as u64).collect();
            FValue { value: Some(value), witness: Some(WitnessReport::of(n as u64, &elements)) }
        }
    })
}

/// True iff `B` consists of distinct nonzero residues, is zero-sum free, and
/// has exactly `expected_ell` distinct nonempty sums.
pub fn verify_example(n: u64, elements: &[u64], expected_ell: usize) -> bool {
    if n == 0 {
        return false;
    }
    let mut reduced: Vec<u64> = elements.iter().map(|b| b % n).collect();
    if reduced.contains(&0) {
        return false;
    }
    reduced.sort_unstable();
    reduced.dedup();
    if reduced.len() != elements.len() {
        return false;
    }
    let info = sumset_size(n, elements);
    info.zero_sum_free && info.count == expected_ell
}

/// `C(k+1, 2) - delta`, `delta = 1` for odd `k`: the lower bound on `f_p(k)`
/// for prime `p`.
pub fn prime_lower_bound(k: usize) -> usize {
    k * (k + 1) / 2 - (k % 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_sums(n: u64, b: &[u64]) -> SumsetInfo {
        let mut seen = std::collections::BTreeSet::new();
        let mut zero = false;
        for m in 1..1u32 << b.len() {
            let s = (0..b.len()).filter(|i| m >> i & 1 == 1).map(|i| b[i]).sum::<u64>() % n;
            zero |= s == 0;
            seen.insert(s);
        }
        SumsetInfo { zero_sum_free: !zero, count: seen.len() }
    }

    #[test]
    fn sumset_examples() {
        assert_eq!(sumset_size(9, &[3, 1, 4, 7]), SumsetInfo { zero_sum_free: true, count: 8 });
        assert_eq!(sumset_size(6, &[1, 3, 4]), SumsetInfo { zero_sum_free: true, count: 5 });
        assert!(!sumset_size(5, &[1, 4]).zero_sum_free);
    }

    #[test]
    fn sumset_matches_naive_across_word_boundaries() {
        for n in [63u64, 64, 65, 127, 128, 129, 200, 1000, 1024, 5000] {
            let b: Vec<u64> = vec![1, n / 2, n / 3 + 5, n - 7, 62, 64 % n];
            let got = sumset_size(n, &b);
            assert_eq!(got, naive_sums(n, &b), "n = {n}");
        }
    }

    #[test]
    fn brute_force_examples() {
        let o = OracleOptions::default();
        let f = brute_force_f(9, 4, o).unwrap();
        assert_eq!(f.value, Some(8));
        assert!(verify_example(9, &f.witness.unwrap().elements, 8));
        let f = brute_force_f(7, 3, o).unwrap();
        assert_eq!(f.value, Some(6));
        assert_eq!(f.witness.unwrap().elements, vec![1, 2, 3]);
        assert_eq!(brute_force_f(8, 4, o).unwrap().value, None);
    }

    #[test]
    fn orbit_reduction_is_transparent() {
        for n in 2..=20u64 {
            for k in 1..=4 {
                let a = brute_force_f(n, k, OracleOptions { orbit_reduction: true }).unwrap();
                let b = brute_force_f(n, k, OracleOptions { orbit_reduction: false }).unwrap();
                assert_eq!(a, b, "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(brute_force_f(CAPACITY + 1, 2, OracleOptions::default()), Err(Error::Capacity { .. })));
    }

    #[test]
    fn verify_examples() {
        assert!(verify_example(25, &[5, 10, 1, 6, 11, 16, 21], 24));
        assert!(verify_example(15, &[14, 2, 3, 4, 5], 14));
        assert!(!verify_example(6, &[1, 2, 3], 6));
        assert!(!verify_example(10, &[1, 1, 2], 3));
        assert!(!verify_example(10, &[0, 1, 2], 3));
    }

    #[test]
    fn prime_bound_values() {
        assert_eq!(prime_lower_bound(4), 10);
        assert_eq!(prime_lower_bound(5), 14);
    }
}
