//! Canonical representatives of relations up to relabeling `x_1..x_k`.

use crate::model::AlmostExample;

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        out.push(perm.clone());
        // next lexicographic permutation
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return out;
        };
        let j = (i + 1..k).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

fn permute_mask(m: usize, perm: &[usize]) -> usize {
    (0..perm.len()).filter(|&i| m >> i & 1 == 1).fold(0, |acc, i| acc | 1 << perm[i])
}

/// Precomputed mask images for every permutation of `k` variables.
pub struct Canonicalizer {
    k: usize,
    /// For each permutation, the preimage of every mask.
    preimages: Vec<Vec<u8>>,
}

impl Canonicalizer {
    pub fn new(k: usize) -> Self {
        let n = 1usize << k;
        let preimages = permutations(k)
            .into_iter()
            .map(|perm| {
                let mut pre = vec![0u8; n];
                for m in 0..n {
                    pre[permute_mask(m, &perm)] = m as u8;
                }
                pre
            })
            .collect();
        Canonicalizer { k, preimages }
    }

    /// Lexicographically least restricted-growth label vector over all
    /// relabelings.
    pub fn canonical_labels(&self, labels: &[u8]) -> Vec<u8> {
        let n = 1usize << self.k;
        debug_assert_eq!(labels.len(), n - 1);
        let mut best: Option<Vec<u8>> = None;
        let mut cur = vec![0u8; n - 1];
        let mut rename = vec![u8::MAX; 256];
        'perm: for pre in &self.preimages {
            rename.iter_mut().for_each(|r| *r = u8::MAX);
            let mut next = 0u8;
            let mut tied = best.is_some();
            for m in 1..n {
                let old = labels[pre[m] as usize - 1] as usize;
                if rename[old] == u8::MAX {
                    rename[old] = next;
                    next += 1;
                }
                let l = rename[old];
                if tied {
                    let b = best.as_ref().unwrap()[m - 1];
                    if l > b {
                        continue 'perm;
                    }
                    if l < b {
                        tied = false;
                    }
                }
                cur[m - 1] = l;
            }
            if tied {
                continue;
            }
            best = Some(cur.clone());
        }
        best.expect("at least the identity permutation")
    }

    pub fn canonical(&self, ae: &AlmostExample) -> AlmostExample {
        AlmostExample::from_labels(self.k, &self.canonical_labels(&ae.labels()))
            .expect("canonical labels describe a partition")
    }
}

/// One representative per relabeling orbit, sorted by class count and then
/// by canonical labels.
pub fn dedupe(k: usize, examples: &[AlmostExample]) -> Vec<AlmostExample> {
    let canon = Canonicalizer::new(k);
    let mut keyed: Vec<(usize, Vec<u8>)> =
        examples.iter().map(|ae| (ae.ell(), canon.canonical_labels(&ae.labels()))).collect();
    keyed.sort();
    keyed.dedup();
    keyed
        .into_iter()
        .map(|(_, l)| AlmostExample::from_labels(k, &l).expect("canonical labels describe a partition"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1).len(), 1);
    }

    #[test]
    fn relabelings_collapse() {
        let a = AlmostExample::from_witness(1000, &[5, 2, 3]).unwrap();
        let b = AlmostExample::from_witness(1000, &[2, 3, 5]).unwrap();
        assert_ne!(a, b);
        assert_eq!(dedupe(3, &[a.clone(), b]).len(), 1);
        assert_eq!(dedupe(3, std::slice::from_ref(&a)).len(), 1);
    }

    #[test]
    fn canonical_is_orbit_invariant() {
        let c = Canonicalizer::new(4);
        let ae = AlmostExample::from_witness(9, &[3, 1, 4, 7]).unwrap();
        let want = c.canonical(&ae);
        for perm in permutations(4) {
            assert_eq!(c.canonical(&ae.permuted(&perm)), want);
        }
    }
}
