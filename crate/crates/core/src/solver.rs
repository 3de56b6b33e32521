//! Solving integer linear systems over `Q/Z`.
//!
//! Elimination runs with unimodular row operations, so the solution set
//! modulo 1 never changes. Back substitution then divides each pivot row by
//! its pivot `a`, forking into the `a` cosets `j/a`. The result is a finite
//! list of affine families in the free variables.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::LinearForm;
use crate::oracle;

pub type Q = Ratio<i64>;

/// Reduces a rational into `[0, 1)`.
pub fn frac(q: Q) -> Q {
    q - q.floor()
}

/// `form . x == constant (mod 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub form: LinearForm,
    pub constant: Q,
}

impl Equation {
    pub fn homogeneous(form: LinearForm) -> Self {
        Equation { form, constant: Q::zero() }
    }
}

/// `sum coeffs[j] * t_j + constant`, read modulo 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineExpr {
    pub coeffs: Vec<Q>,
    pub constant: Q,
}

impl AffineExpr {
    pub fn zero(params: usize) -> Self {
        AffineExpr { coeffs: vec![Q::zero(); params], constant: Q::zero() }
    }

    pub fn param(params: usize, j: usize) -> Self {
        let mut e = AffineExpr::zero(params);
        e.coeffs[j] = Q::one();
        e
    }

    fn add_scaled(&mut self, c: Q, other: &AffineExpr) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
        self.constant += c * other.constant;
    }

    fn normalize(&mut self) {
        self.constant = frac(self.constant);
    }

    /// True when every parameter coefficient vanishes and the constant is
    /// an integer, i.e. the expression is identically zero modulo 1.
    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero) && self.constant.is_integer()
    }

    pub fn eval(&self, params: &[Q]) -> Q {
        self.coeffs.iter().zip(params).fold(self.constant, |acc, (c, t)| acc + c * t)
    }
}

/// One affine piece of the solution set: `free` variables are parameters,
/// every other variable is an affine expression in them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SolutionFamily {
    k: usize,
    free: Vec<usize>,
    /// One entry per variable; free variables map to their own parameter.
    exprs: Vec<AffineExpr>,
    modulus: i64,
}

impl SolutionFamily {
    /// Builds a family from explicit bound expressions, normalizing constants
    /// and computing the modulus.
    pub fn new(k: usize, free: Vec<usize>, bound: Vec<(usize, AffineExpr)>) -> Result<Self> {
        let f = free.len();
        let mut exprs: Vec<Option<AffineExpr>> = vec![None; k];
        for (j, &v) in free.iter().enumerate() {
            if v >= k || exprs[v].is_some() {
                return Err(Error::InvalidArgument(format!("bad free variable {v}")));
            }
            exprs[v] = Some(AffineExpr::param(f, j));
        }
        for (v, e) in bound {
            if v >= k || exprs[v].is_some() || e.coeffs.len() != f {
                return Err(Error::InvalidArgument(format!("bad bound variable {v}")));
            }
            exprs[v] = Some(e);
        }
        let exprs = exprs
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("free and bound do not cover all variables".into()))?;
        Ok(Self::from_exprs(k, free, exprs))
    }

    fn from_exprs(k: usize, free: Vec<usize>, mut exprs: Vec<AffineExpr>) -> Self {
        let mut modulus = 1i64;
        for e in &mut exprs {
            e.normalize();
            modulus = modulus.lcm(e.constant.denom());
            for c in &e.coeffs {
                modulus = modulus.lcm(c.denom());
            }
        }
        SolutionFamily { k, free, exprs, modulus }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Zero-based indices of the parameter variables, ascending.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Bound variables with their expressions.
    pub fn bound(&self) -> impl Iterator<Item = (usize, &AffineExpr)> {
        self.exprs.iter().enumerate().filter(|(i, _)| !self.free.contains(i))
    }

    pub fn expr(&self, var: usize) -> &AffineExpr {
        &self.exprs[var]
    }

    /// Least common multiple of every denominator in the family.
    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    /// `form . x` with the family substituted in, constant reduced mod 1.
    pub fn substitute(&self, form: &LinearForm) -> AffineExpr {
        let mut out = AffineExpr::zero(self.free.len());
        for (i, &c) in form.coeffs().iter().enumerate() {
            if c != 0 {
                out.add_scaled(Q::from_integer(c), &self.exprs[i]);
            }
        }
        out.normalize();
        out
    }

    /// Whether every equation holds identically on the family.
    pub fn satisfies(&self, eq: &Equation) -> bool {
        let mut e = self.substitute(&eq.form);
        e.constant -= eq.constant;
        e.is_identically_zero()
    }

    /// Values of `x_1..x_k` in `[0, 1)` for the given parameter values.
    pub fn point(&self, params: &[Q]) -> Vec<Q> {
        self.exprs.iter().map(|e| frac(e.eval(params))).collect()
    }
}

impl fmt::Display for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exprs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "x{} = ", i + 1)?;
            if let Some(j) = self.free.iter().position(|&v| v == i) {
                write!(f, "t{}", j + 1)?;
                continue;
            }
            let mut wrote = false;
            for (j, c) in e.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let sign = if c.is_negative() {
                    "-"
                } else if wrote {
                    "+"
                } else {
                    ""
                };
                let mag = c.abs();
                if wrote {
                    write!(f, " {sign} ")?;
                } else {
                    f.write_str(sign)?;
                }
                if mag.is_one() {
                    write!(f, "t{}", j + 1)?;
                } else {
                    write!(f, "{mag}*t{}", j + 1)?;
                }
                wrote = true;
            }
            if !e.constant.is_zero() || !wrote {
                if wrote {
                    write!(f, " + {}", e.constant)?;
                } else {
                    write!(f, "{}", e.constant)?;
                }
            }
        }
        Ok(())
    }
}

struct EchelonRow {
    coeffs: Vec<i64>,
    constant: Q,
    pivot: usize,
}

fn gcd_of_column(rows: &[(Vec<i64>, Q)], col: usize) -> i64 {
    rows.iter().fold(0i64, |g, r| g.gcd(&r.0[col]))
}

/// Triangularizes the system with unimodular row operations. Returns `None`
/// when some combination reads `0 == c` with `c` not an integer.
fn echelon(k: usize, equations: &[Equation]) -> Result<Option<Vec<EchelonRow>>> {
    let mut rows: Vec<(Vec<i64>, Q)> = Vec::with_capacity(equations.len());
    for eq in equations {
        if eq.form.k() != k {
            return Err(Error::InvalidArgument("equation length does not match k".into()));
        }
        rows.push((eq.form.coeffs().to_vec(), frac(eq.constant)));
    }
    let mut done = Vec::new();
    let mut remaining: Vec<usize> = (0..k).collect();
    loop {
        rows.retain(|(c, q)| !(c.iter().all(|&x| x == 0) && q.is_zero()));
        if rows.iter().any(|(c, _)| c.iter().all(|&x| x == 0)) {
            return Ok(None);
        }
        if rows.is_empty() {
            return Ok(Some(done));
        }
        // Highest-index column with a unit gcd; otherwise the smallest gcd.
        let col = *remaining
            .iter()
            .rev()
            .filter(|&&c| gcd_of_column(&rows, c) != 0)
            .min_by_key(|&&c| gcd_of_column(&rows, c))
            .expect("a nonzero row has a nonzero column");
        remaining.retain(|&c| c != col);
        // Euclid on the column: keep reducing by the smallest nonzero entry.
        loop {
            let nonzero: Vec<usize> = (0..rows.len()).filter(|&r| rows[r].0[col] != 0).collect();
            let &p = nonzero.iter().min_by_key(|&&r| rows[r].0[col].abs()).unwrap();
            if nonzero.len() == 1 {
                let (mut coeffs, mut constant) = rows.swap_remove(p);
                if coeffs[col] < 0 {
                    coeffs.iter_mut().for_each(|c| *c = -*c);
                    constant = frac(-constant);
                }
                done.push(EchelonRow { coeffs, constant, pivot: col });
                break;
            }
            let (pc, pq) = rows[p].clone();
            for &r in nonzero.iter().filter(|&&r| r != p) {
                let q = Integer::div_floor(&rows[r].0[col], &pc[col]);
                for (x, y) in rows[r].0.iter_mut().zip(&pc) {
                    *x = x.checked_sub(q.checked_mul(*y).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
                }
                rows[r].1 = frac(rows[r].1 - Q::from_integer(q) * pq);
            }
        }
    }
}

/// All solutions of the system in `(Q/Z)^k`, as a sorted, duplicate-free
/// list of families. An inconsistent system yields an empty list.
pub fn solve_mod1(k: usize, equations: &[Equation]) -> Result<Vec<SolutionFamily>> {
    let Some(rows) = echelon(k, equations)? else {
        return Ok(Vec::new());
    };
    let bound: BTreeSet<usize> = rows.iter().map(|r| r.pivot).collect();
    let free: Vec<usize> = (0..k).filter(|v| !bound.contains(v)).collect();
    let f = free.len();
    let mut partial: Vec<Option<AffineExpr>> = vec![None; k];
    for (j, &v) in free.iter().enumerate() {
        partial[v] = Some(AffineExpr::param(f, j));
    }
    let mut out = BTreeSet::new();
    // Each pivot row only involves variables eliminated after it, so solve
    // from the last row back.
    back_substitute(&rows, rows.len(), &mut partial, &free, k, &mut out);
    Ok(out.into_iter().collect())
}

fn back_substitute(
    rows: &[EchelonRow],
    upto: usize,
    partial: &mut Vec<Option<AffineExpr>>,
    free: &[usize],
    k: usize,
    out: &mut BTreeSet<SolutionFamily>,
) {
    if upto == 0 {
        let exprs = partial.iter().map(|e| e.clone().expect("all variables solved")).collect();
        out.insert(SolutionFamily::from_exprs(k, free.to_vec(), exprs));
        return;
    }
    let row = &rows[upto - 1];
    let a = row.coeffs[row.pivot];
    // a*x_p == c - sum_{q != p} r_q x_q  (mod 1)
    let mut rhs = AffineExpr::zero(free.len());
    rhs.constant = row.constant;
    for (q, &c) in row.coeffs.iter().enumerate() {
        if q != row.pivot && c != 0 {
            let e = partial[q].as_ref().expect("later pivots are solved first");
            rhs.add_scaled(Q::from_integer(-c), e);
        }
    }
    let inv = Q::new(1, a);
    for j in 0..a {
        let mut e = AffineExpr::zero(free.len());
        e.add_scaled(inv, &rhs);
        e.constant += Q::new(j, a);
        e.normalize();
        partial[row.pivot] = Some(e);
        back_substitute(rows, upto - 1, partial, free, k, out);
    }
    partial[row.pivot] = None;
}

/// False iff some inequation collapses to an identity on the family.
pub fn substitute_check(fam: &SolutionFamily, inequations: &[LinearForm]) -> bool {
    inequations.iter().all(|w| !fam.substitute(w).is_identically_zero())
}

/// How to pick parameter values when turning a family into a set in `Z_n`.
#[derive(Clone, Debug)]
pub enum Strategy {
    /// Parameter `j` becomes `1/p_j` for distinct primes `p_j` above the
    /// given bound (and above every coefficient the family could scale).
    GenericPrimes { above: u64 },
    /// Explicit parameter values.
    Params(Vec<Q>),
}

/// A concrete set `B` in `Z_n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Witness {
    pub n: u64,
    pub elements: Vec<u64>,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn primes_above(bound: u64, count: usize, avoid: i64) -> Vec<u64> {
    (bound + 1..).filter(|&p| is_prime(p) && avoid % p as i64 != 0).take(count).collect()
}

/// Maps the family point at `params` into `Z_n` with `n` the lcm of the
/// modulus and every coordinate denominator.
fn realize(fam: &SolutionFamily, params: &[Q]) -> Result<Witness> {
    let point = fam.point(params);
    let n = point.iter().try_fold(fam.modulus(), |acc, x| {
        let l = acc.lcm(x.denom());
        (l > 0).then_some(l).ok_or(Error::Overflow)
    })?;
    let elements = point.iter().map(|x| (*x * Q::from_integer(n)).to_integer() as u64).collect();
    Ok(Witness { n: n as u64, elements })
}

fn is_valid_set(w: &Witness) -> bool {
    let mut sorted = w.elements.clone();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == w.elements.len()
        && w.elements.iter().all(|&b| b != 0)
        && oracle::sumset_size(w.n, &w.elements).zero_sum_free
}

/// Turns an admissible family into a zero-sum-free set of `k` distinct
/// nonzero residues. The result is re-checked by direct enumeration.
pub fn instantiate(fam: &SolutionFamily, strategy: &Strategy) -> Result<Witness> {
    let f = fam.free().len();
    match strategy {
        Strategy::Params(params) => {
            if params.len() != f {
                return Err(Error::InvalidArgument(format!("family has {f} parameters, got {}", params.len())));
            }
            let w = realize(fam, params)?;
            if !is_valid_set(&w) {
                return Err(Error::InstantiationFailed(format!(
                    "{:?} in Z_{} is not a zero-sum-free set",
                    w.elements, w.n
                )));
            }
            Ok(w)
        }
        Strategy::GenericPrimes { above } => {
            // Scaled coefficients `d * c` must stay below every prime, or
            // `sum c_j / p_j` could become an integer.
            let d = fam.modulus();
            let scale = fam
                .exprs
                .iter()
                .flat_map(|e| e.coeffs.iter())
                .map(|c| (*c * Q::from_integer(d)).abs().to_integer() as u64)
                .max()
                .unwrap_or(0);
            let bound = (*above).max(scale * fam.k() as u64).max(d as u64);
            let mut start = bound;
            for _attempt in 0..2 {
                let primes = primes_above(start, f, d);
                let params: Vec<Q> = primes.iter().map(|&p| Q::new(1, p as i64)).collect();
                let w = realize(fam, &params)?;
                if is_valid_set(&w) {
                    return Ok(w);
                }
                start = *primes.last().unwrap_or(&start) * 2;
            }
            Err(Error::InstantiationFailed(format!("family [{fam}] has no generic point")))
        }
    }
}

/// Searches parameter values in `(1/n)Z` for a realization in `Z_n` with
/// exactly `ell` distinct nonempty sums. Returns the first hit in
/// lexicographic parameter order, or `None` if there is none or more than
/// `max_nodes` partial assignments were visited.
///
/// Parameters are fixed one at a time; a variable is evaluated as soon as
/// the parameters it depends on are fixed, and partial sets with a zero sum,
/// a repeated element or more than `ell` sums are cut.
pub fn instantiate_at_modulus(fam: &SolutionFamily, n: u64, ell: usize, max_nodes: u64) -> Option<Witness> {
    if n < 2 || n as i64 % fam.modulus() != 0 {
        return None;
    }
    let f = fam.free().len();
    // variables grouped by the last parameter they depend on (0 = none)
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); f + 1];
    for (v, e) in fam.exprs.iter().enumerate() {
        let last = e.coeffs.iter().rposition(|c| !c.is_zero()).map_or(0, |j| j + 1);
        ready[last].push(v);
    }
    let mut walk =
        ModulusWalk { fam, n, ell, ready, params: vec![Q::zero(); f], values: vec![None; fam.k], budget: max_nodes };
    if !walk.place(0) {
        return None;
    }
    walk.descend(0)
}

struct ModulusWalk<'a> {
    fam: &'a SolutionFamily,
    n: u64,
    ell: usize,
    ready: Vec<Vec<usize>>,
    params: Vec<Q>,
    values: Vec<Option<u64>>,
    budget: u64,
}

impl ModulusWalk<'_> {
    /// Evaluates the variables that become known once `level` parameters
    /// are fixed; false when the partial set is already unusable.
    fn place(&mut self, level: usize) -> bool {
        let nq = Q::from_integer(self.n as i64);
        for &v in &self.ready[level] {
            let x = frac(self.fam.exprs[v].eval(&self.params)) * nq;
            if !x.is_integer() {
                return false;
            }
            let x = x.to_integer() as u64;
            if x == 0 || self.values.contains(&Some(x)) {
                return false;
            }
            self.values[v] = Some(x);
        }
        let known: Vec<u64> = self.values.iter().flatten().copied().collect();
        let info = oracle::sumset_size(self.n, &known);
        info.zero_sum_free && info.count <= self.ell
    }

    fn clear(&mut self, level: usize) {
        for &v in &self.ready[level] {
            self.values[v] = None;
        }
    }

    fn descend(&mut self, fixed: usize) -> Option<Witness> {
        if fixed == self.params.len() {
            let elements: Vec<u64> = self.values.iter().map(|v| v.expect("all variables placed")).collect();
            return oracle::verify_example(self.n, &elements, self.ell).then_some(Witness { n: self.n, elements });
        }
        for c in 0..self.n {
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            self.params[fixed] = Q::new(c as i64, self.n as i64);
            let ok = self.place(fixed + 1);
            if ok {
                if let Some(w) = self.descend(fixed + 1) {
                    return Some(w);
                }
            }
            self.clear(fixed + 1);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::base_inequations;

    fn eq(c: &[i64]) -> Equation {
        Equation::homogeneous(LinearForm::new(c.to_vec()))
    }

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn halving_forks_in_two() {
        let fams = solve_mod1(1, &[eq(&[2])]).unwrap();
        let pts: Vec<Q> = fams.iter().map(|f| f.point(&[])[0]).collect();
        assert_eq!(pts, vec![q(0, 1), q(1, 2)]);
    }

    #[test]
    fn empty_system_is_all_free() {
        let fams = solve_mod1(2, &[]).unwrap();
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].free(), &[0, 1]);
        assert!(substitute_check(&fams[0], &base_inequations(2).unwrap()));
    }

    #[test]
    fn contradictory_constant_gives_nothing() {
        let e = Equation { form: LinearForm::zero(2), constant: q(1, 2) };
        assert!(solve_mod1(2, &[e]).unwrap().is_empty());
        let sys = [eq(&[2, 0]), Equation { form: LinearForm::new(vec![1, 0]), constant: q(1, 4) }];
        assert!(solve_mod1(2, &sys).unwrap().is_empty());
    }

    #[test]
    fn even_k3_system() {
        let fams = solve_mod1(3, &[eq(&[1, 1, -1]), eq(&[-1, 1, 1])]).unwrap();
        assert_eq!(fams.len(), 2);
        for fam in &fams {
            assert_eq!(fam.free(), &[0]);
            let x2 = fam.expr(1);
            assert!(x2.coeffs[0].is_zero());
            assert!(x2.constant == q(0, 1) || x2.constant == q(1, 2));
            // x3 = x1 + x2
            let diff = fam.substitute(&LinearForm::new(vec![1, 1, -1]));
            assert!(diff.is_identically_zero());
        }
    }

    #[test]
    fn doubled_coordinates_collapse() {
        let fams = solve_mod1(2, &[eq(&[2, 0]), eq(&[0, 2])]).unwrap();
        assert_eq!(fams.len(), 4);
        let ineq = [LinearForm::new(vec![1, 0]), LinearForm::new(vec![0, 1]), LinearForm::new(vec![1, -1])];
        for fam in &fams {
            assert!(!substitute_check(fam, &ineq));
        }
    }

    fn k3_family() -> SolutionFamily {
        SolutionFamily::new(
            3,
            vec![0],
            vec![
                (1, AffineExpr { coeffs: vec![q(0, 1)], constant: q(1, 2) }),
                (2, AffineExpr { coeffs: vec![q(1, 1)], constant: q(1, 2) }),
            ],
        )
        .unwrap()
    }

    #[test]
    fn k3_family_is_admissible() {
        let fam = k3_family();
        assert_eq!(fam.modulus(), 2);
        assert!(substitute_check(&fam, &base_inequations(3).unwrap()));
    }

    #[test]
    fn explicit_instantiation() {
        let fam = k3_family();
        let w = instantiate(&fam, &Strategy::Params(vec![q(1, 6)])).unwrap();
        assert_eq!(w, Witness { n: 6, elements: vec![1, 3, 4] });
        let w = instantiate(&fam, &Strategy::Params(vec![q(1, 10)])).unwrap();
        assert_eq!(w, Witness { n: 10, elements: vec![1, 5, 6] });

        let free = SolutionFamily::new(1, vec![0], vec![]).unwrap();
        let w = instantiate(&free, &Strategy::Params(vec![q(1, 3)])).unwrap();
        assert_eq!(w, Witness { n: 3, elements: vec![1] });
    }

    #[test]
    fn generic_instantiation_verifies() {
        let fam = k3_family();
        let w = instantiate(&fam, &Strategy::GenericPrimes { above: 15 }).unwrap();
        assert_eq!(w.n % 2, 0);
        assert_eq!(oracle::sumset_size(w.n, &w.elements).count, 5);
    }

    #[test]
    fn bad_explicit_point_fails() {
        let fam = k3_family();
        // x1 = 0 collides with the zero-sum constraint
        assert!(matches!(instantiate(&fam, &Strategy::Params(vec![q(0, 1)])), Err(Error::InstantiationFailed(_))));
    }

    #[test]
    fn at_modulus_finds_smallest_parameter() {
        let fam = k3_family();
        assert_eq!(instantiate_at_modulus(&fam, 6, 5, 1000), Some(Witness { n: 6, elements: vec![1, 3, 4] }));
        assert_eq!(instantiate_at_modulus(&fam, 4, 5, 1000), None);
        assert_eq!(instantiate_at_modulus(&fam, 7, 5, 1000), None);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(k3_family().to_string(), "x1 = t1, x2 = 1/2, x3 = t1 + 1/2");
    }

    #[test]
    fn parameters_are_numbered_by_position() {
        let mut x3 = AffineExpr::param(1, 0);
        x3.constant = Q::new(1, 2);
        let mut x1 = AffineExpr::zero(1);
        x1.constant = Q::new(1, 2);
        let fam = SolutionFamily::new(3, vec![1], vec![(0, x1), (2, x3)]).unwrap();
        assert_eq!(fam.to_string(), "x1 = 1/2, x2 = t1, x3 = t1 + 1/2");
    }
}
