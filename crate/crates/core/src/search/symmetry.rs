//! Per-variable profiles used to break the symmetry of relabeling `x_1..x_k`.
//!
//! The profile of `x_i` counts, among the equations of the relation,
//! those of the shape `x_i = a + b`, those of the shape `a = x_i + b`, and
//! those of the shape `x_i + a = b + c`. Profiles are compared
//! lexicographically; the search only keeps relations whose profiles weakly
//! increase with the variable index.

use crate::model::AlmostExample;

use super::state::{Decision, RelationState};

/// Profile triple of one variable.
pub type SymmetryProfile = [u32; 3];

#[derive(Clone, Debug)]
pub(crate) struct Shapes {
    k: usize,
    /// `x_s = x_a + x_b`: (s, a, b, mask of {s}, mask of {a, b}).
    one_two: Vec<(usize, usize, usize, u16, u16)>,
    /// `x_a + x_b = x_c + x_d` with disjoint sides.
    two_two: Vec<([usize; 4], u16, u16)>,
}

impl Shapes {
    pub fn new(k: usize) -> Self {
        let mut one_two = Vec::new();
        let mut two_two = Vec::new();
        for s in 0..k {
            for a in 0..k {
                for b in a + 1..k {
                    if s != a && s != b {
                        one_two.push((s, a, b, 1 << s, (1 << a | 1 << b) as u16));
                    }
                }
            }
        }
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            for &(c, d) in &pairs[i + 1..] {
                if a != c && a != d && b != c && b != d {
                    two_two.push(([a, b, c, d], (1 << a | 1 << b) as u16, (1 << c | 1 << d) as u16));
                }
            }
        }
        Shapes { k, one_two, two_two }
    }

    /// Componentwise lower and upper bounds on the final profiles: decided
    /// equations count toward both, undecided pairs only toward the upper.
    pub fn bounds(&self, st: &RelationState) -> (Vec<SymmetryProfile>, Vec<SymmetryProfile>) {
        self.bounds_by(|x, y| decide(st, x, y))
    }

    fn bounds_by(&self, status: impl Fn(u16, u16) -> Decision) -> (Vec<SymmetryProfile>, Vec<SymmetryProfile>) {
        let mut lo = vec![[0u32; 3]; self.k];
        let mut hi = vec![[0u32; 3]; self.k];
        let mut bump = |d: Decision, hits: &[(usize, usize)]| {
            for &(v, comp) in hits {
                match d {
                    Decision::Equal => {
                        lo[v][comp] += 1;
                        hi[v][comp] += 1;
                    }
                    Decision::Undecided => hi[v][comp] += 1,
                    Decision::Unequal => {}
                }
            }
        };
        for &(s, a, b, ms, mp) in &self.one_two {
            bump(status(ms, mp), &[(s, 0), (a, 1), (b, 1)]);
        }
        for &(vars, m1, m2) in &self.two_two {
            bump(status(m1, m2), &[(vars[0], 2), (vars[1], 2), (vars[2], 2), (vars[3], 2)]);
        }
        (lo, hi)
    }

    /// Conservative test: false only when some `i < j` has a lower bound of
    /// `v(i)` lexicographically above the upper bound of `v(j)`.
    pub fn admissible(&self, st: &RelationState) -> bool {
        let (lo, hi) = self.bounds(st);
        let mut max_lo = [0u32; 3];
        for j in 0..self.k {
            if j > 0 && max_lo > hi[j] {
                return false;
            }
            max_lo = max_lo.max(lo[j]);
        }
        true
    }
}

fn decide(st: &RelationState, x: u16, y: u16) -> Decision {
    let (a, b) = (st.class_of(x), st.class_of(y));
    if a == b {
        Decision::Equal
    } else if st.separated(a, b) {
        Decision::Unequal
    } else {
        Decision::Undecided
    }
}

/// Exact profiles of a complete relation.
pub fn profiles(ae: &AlmostExample) -> Vec<SymmetryProfile> {
    let labels = ae.labels();
    let shapes = Shapes::new(ae.k());
    let (lo, _) = shapes.bounds_by(|x, y| {
        if labels[x as usize - 1] == labels[y as usize - 1] {
            Decision::Equal
        } else {
            Decision::Unequal
        }
    });
    lo
}

/// Whether the exact profiles weakly increase.
pub fn is_canonical(ae: &AlmostExample) -> bool {
    profiles(ae).windows(2).all(|w| w[0] <= w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts() {
        let s = Shapes::new(4);
        assert_eq!(s.one_two.len(), 4 * 3);
        assert_eq!(s.two_two.len(), 3);
        let s = Shapes::new(7);
        assert_eq!(s.one_two.len(), 7 * 15);
        assert_eq!(s.two_two.len(), 21 * 10 / 2);
    }

    #[test]
    fn first_variable_as_sum_is_not_canonical() {
        // 5 = 2 + 3 is the only coincidence among these sums
        let ae = AlmostExample::from_witness(1000, &[5, 2, 3]).unwrap();
        assert_eq!(profiles(&ae), vec![[1, 0, 0], [0, 1, 0], [0, 1, 0]]);
        assert!(!is_canonical(&ae));
        let ae = AlmostExample::from_witness(1000, &[2, 3, 5]).unwrap();
        assert_eq!(profiles(&ae), vec![[0, 1, 0], [0, 1, 0], [1, 0, 0]]);
        assert!(is_canonical(&ae));
    }

    #[test]
    fn profiles_are_permutation_equivariant() {
        let ae = AlmostExample::from_witness(9, &[3, 1, 4, 7]).unwrap();
        let base = profiles(&ae);
        let perm = [2, 0, 3, 1];
        let moved = profiles(&ae.permuted(&perm));
        for i in 0..4 {
            assert_eq!(moved[perm[i]], base[i]);
        }
    }
}
