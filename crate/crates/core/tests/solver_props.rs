use proptest::prelude::*;
use zsfree::solver::{frac, instantiate, solve_mod1, substitute_check, Equation, Q};
use zsfree::LinearForm;

fn holds(eq: &Equation, x: &[Q]) -> bool {
    let lhs = eq.form.coeffs().iter().zip(x).fold(Q::from_integer(0), |acc, (c, v)| acc + Q::from_integer(*c) * v);
    (lhs - eq.constant).is_integer()
}

fn system(k: usize) -> impl Strategy<Value = Vec<Equation>> {
    let eq = (prop::collection::vec(-3i64..=3, k), 0i64..6, 1i64..=6)
        .prop_map(|(c, a, b)| Equation { form: LinearForm::new(c), constant: frac(Q::new(a, b)) });
    prop::collection::vec(eq, 0..=3)
}

/// Every point of `((1/d)Z / Z)^k`.
fn grid(k: usize, d: i64) -> Vec<Vec<Q>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..d).map(move |i| {
                    let mut q = p.clone();
                    q.push(Q::new(i, d));
                    q
                })
            })
            .collect();
    }
    out
}

fn sys_and_k() -> impl Strategy<Value = (usize, Vec<Equation>)> {
    (1usize..=3).prop_flat_map(|k| (Just(k), system(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Points of every family solve the system.
    #[test]
    fn families_are_sound((k, eqs) in sys_and_k(), d in 1i64..=12) {
        let fams = solve_mod1(k, &eqs).unwrap();
        for fam in &fams {
            for eq in &eqs {
                prop_assert!(fam.satisfies(eq));
            }
            for params in grid(fam.free().len(), d) {
                let x = fam.point(&params);
                prop_assert!(eqs.iter().all(|e| holds(e, &x)), "{fam} at {params:?}");
            }
        }
    }

    /// Every solution on a finite grid lies in some family. Free variables
    /// are their own parameters, so the parameters are read off the point.
    #[test]
    fn families_are_complete((k, eqs) in sys_and_k(), d in 1i64..=12) {
        let fams = solve_mod1(k, &eqs).unwrap();
        for x in grid(k, d) {
            if !eqs.iter().all(|e| holds(e, &x)) {
                continue;
            }
            let covered = fams.iter().any(|fam| {
                let params: Vec<Q> = fam.free().iter().map(|&v| x[v]).collect();
                fam.point(&params) == x
            });
            prop_assert!(covered, "{x:?} solves the system but no family contains it");
        }
    }

    /// Generic instantiation of a family that passes the substitution
    /// check yields a set whose relation matches the family.
    #[test]
    fn generic_points_respect_the_inequations(c in prop::collection::vec(-2i64..=2, 3)) {
        let eqs = [Equation::homogeneous(LinearForm::new(c))];
        let ineq = zsfree::model::base_inequations(3).unwrap();
        for fam in solve_mod1(3, &eqs).unwrap() {
            if !substitute_check(&fam, &ineq) {
                continue;
            }
            if let Ok(w) = instantiate(&fam, &zsfree::solver::Strategy::GenericPrimes { above: 20 }) {
                prop_assert_eq!(w.n as i64 % fam.modulus(), 0);
                prop_assert!(zsfree::oracle::sumset_size(w.n, &w.elements).zero_sum_free);
            }
        }
    }
}

#[test]
fn inconsistent_system_has_no_families() {
    let eqs = [
        Equation::homogeneous(LinearForm::new(vec![2])),
        Equation { form: LinearForm::new(vec![2]), constant: Q::new(1, 3) },
    ];
    assert!(solve_mod1(1, &eqs).unwrap().is_empty());
}

#[test]
fn torsion_splits_into_families() {
    // 3x = 0 has the three solutions 0, 1/3, 2/3
    let fams = solve_mod1(1, &[Equation::homogeneous(LinearForm::new(vec![3]))]).unwrap();
    let mut pts: Vec<Q> = fams.iter().map(|f| f.point(&[])[0]).collect();
    pts.sort();
    assert_eq!(pts, vec![Q::new(0, 1), Q::new(1, 3), Q::new(2, 3)]);
    assert!(fams.iter().all(|f| f.free().is_empty()));
}
