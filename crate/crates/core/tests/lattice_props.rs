use proptest::prelude::*;
use zsfree::model::pair_form;
use zsfree::{EquationLattice, LinearForm, SubsetMask};

fn lattice(k: usize, gens: &[Vec<i64>]) -> EquationLattice {
    let mut l = EquationLattice::new(k).unwrap();
    for g in gens {
        l.insert(&LinearForm::new(g.clone())).unwrap();
    }
    l
}

fn gens_strategy(k: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, k), 0..=4)
}

/// Every integer combination `sum c_i g_i` with `|c_i| <= bound`.
fn combinations(k: usize, gens: &[Vec<i64>], bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0; k]];
    for g in gens {
        let mut next = Vec::new();
        for v in &out {
            for c in -bound..=bound {
                next.push(v.iter().zip(g).map(|(a, b)| a + c * b).collect());
            }
        }
        next.sort();
        next.dedup();
        out = next;
    }
    out
}

proptest! {
    #[test]
    fn combinations_are_members(k in 1usize..=4, gens in gens_strategy(4)) {
        let gens: Vec<Vec<i64>> = gens.into_iter().map(|g| g[..k].to_vec()).collect();
        let l = lattice(k, &gens);
        for v in combinations(k, &gens, 2) {
            prop_assert!(l.contains(&LinearForm::new(v)).unwrap());
        }
    }

    #[test]
    fn membership_ignores_generator_order(gens in gens_strategy(3), probe in prop::collection::vec(prop::collection::vec(-6i64..=6, 3), 20)) {
        let a = lattice(3, &gens);
        let mut rev = gens.clone();
        rev.reverse();
        let b = lattice(3, &rev);
        prop_assert_eq!(a.rank(), b.rank());
        for v in probe {
            let v = LinearForm::new(v);
            prop_assert_eq!(a.contains(&v).unwrap(), b.contains(&v).unwrap());
            prop_assert_eq!(a.reduce(&v).unwrap(), b.reduce(&v).unwrap());
        }
    }

    #[test]
    fn reduction_is_a_canonical_coset_representative(gens in gens_strategy(3), v in prop::collection::vec(-9i64..=9, 3), w in prop::collection::vec(-9i64..=9, 3)) {
        let l = lattice(3, &gens);
        let (v, w) = (LinearForm::new(v), LinearForm::new(w));
        let r = l.reduce(&v).unwrap();
        prop_assert_eq!(l.reduce(&r).unwrap(), r.clone());
        prop_assert!(l.contains(&v.add(&r.neg())).unwrap());
        // congruent inputs reduce alike
        prop_assert_eq!(l.contains(&v.add(&w.neg())).unwrap(), l.reduce(&w).unwrap() == r);
    }

    #[test]
    fn inserting_a_member_changes_nothing(gens in gens_strategy(3), c in prop::collection::vec(-3i64..=3, 4)) {
        let mut l = lattice(3, &gens);
        let mut v = vec![0i64; 3];
        for (g, c) in gens.iter().zip(&c) {
            for j in 0..3 {
                v[j] += c * g[j];
            }
        }
        let before = l.clone();
        prop_assert!(!l.insert(&LinearForm::new(v)).unwrap());
        prop_assert_eq!(l, before);
    }

    #[test]
    fn pair_forms_are_antisymmetric(k in 1usize..=6, a in 1u32..64, b in 0u32..64) {
        let full = (1u32 << k) - 1;
        let (a, b) = (a & full, b & full);
        prop_assume!(a != 0 && b != 0);
        let a = SubsetMask::new(a, k).unwrap();
        let b = SubsetMask::new(b, k).unwrap();
        let ab = pair_form(k, a, b).unwrap();
        let ba = pair_form(k, b, a).unwrap();
        prop_assert_eq!(ab.neg(), ba);
        prop_assert_eq!(ab.is_zero(), a == b);
    }
}

/// The lattice index equals the number of distinct reductions of a box
/// that covers every coset.
#[test]
fn full_rank_index_matches_coset_count() {
    let gens = vec![vec![2, 1, 0], vec![0, 3, 1], vec![1, 0, 2]];
    let l = lattice(3, &gens);
    assert_eq!(l.rank(), 3);
    // det = 2*(6-0) - 1*(0-1) + 0 = 13
    let mut reps = std::collections::BTreeSet::new();
    for x in 0..13 {
        for y in 0..13 {
            for z in 0..13 {
                reps.insert(l.reduce(&LinearForm::new(vec![x, y, z])).unwrap());
            }
        }
    }
    assert_eq!(reps.len(), 13);
}

#[test]
fn two_torsion_system_excludes_its_inequations() {
    let l = lattice(2, &[vec![2, 0], vec![0, 2]]);
    for v in [[1, 0], [0, 1], [1, -1]] {
        assert!(!l.contains(&LinearForm::new(v.to_vec())).unwrap());
    }
}
