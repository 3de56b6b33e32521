//! Z-lattices of linear forms kept in integer row echelon form.
//!
//! Rows are stored with strictly increasing pivot columns and positive pivot
//! entries. Off-pivot entries are not reduced. Membership only needs
//! divisibility at the pivots, and the canonical reduction used by the search
//! only needs the pivot residues in `[0, pivot)`.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::model::{LinearForm, MAX_K};

/// Fixed-width coefficient row; entries past `k` stay zero.
pub type Row = [i64; MAX_K];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationLattice {
    k: usize,
    rows: Vec<Row>,
    pivots: Vec<usize>,
}

#[inline]
fn sub_scaled(dst: &mut Row, q: i64, src: &Row, from: usize, k: usize) -> Result<()> {
    for j in from..k {
        let t = q.checked_mul(src[j]).ok_or(Error::Overflow)?;
        dst[j] = dst[j].checked_sub(t).ok_or(Error::Overflow)?;
    }
    Ok(())
}

#[inline]
fn leading(v: &Row, k: usize) -> Option<usize> {
    v[..k].iter().position(|&c| c != 0)
}

/// `a*x + b*y` on the columns `from..k`.
fn combine(a: i64, x: &Row, b: i64, y: &Row, from: usize, k: usize) -> Result<Row> {
    let mut out = [0; MAX_K];
    for j in from..k {
        let l = a.checked_mul(x[j]).ok_or(Error::Overflow)?;
        let r = b.checked_mul(y[j]).ok_or(Error::Overflow)?;
        out[j] = l.checked_add(r).ok_or(Error::Overflow)?;
    }
    Ok(out)
}

pub(crate) fn row_of(form: &LinearForm, k: usize) -> Result<Row> {
    if form.k() != k {
        return Err(Error::InvalidArgument(format!("form has {} coefficients, lattice has {k}", form.k())));
    }
    let mut row = [0; MAX_K];
    row[..k].copy_from_slice(form.coeffs());
    Ok(row)
}

impl EquationLattice {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidArgument(format!("k must be in 1..={MAX_K}, got {k}")));
        }
        Ok(EquationLattice { k, rows: Vec::with_capacity(k), pivots: Vec::with_capacity(k) })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Echelon rows as linear forms.
    pub fn rows(&self) -> Vec<LinearForm> {
        self.rows.iter().map(|r| LinearForm::new(r[..self.k].to_vec())).collect()
    }

    /// Pivot column of each row, strictly increasing.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Adds a generator. Returns whether the lattice grew.
    pub fn insert(&mut self, v: &LinearForm) -> Result<bool> {
        let row = row_of(v, self.k)?;
        self.insert_row(row)
    }

    /// Functional form of [`EquationLattice::insert`].
    pub fn inserted(&self, v: &LinearForm) -> Result<Self> {
        let mut out = self.clone();
        out.insert(v)?;
        Ok(out)
    }

    pub fn contains(&self, v: &LinearForm) -> Result<bool> {
        let mut row = row_of(v, self.k)?;
        self.reduce_row(&mut row)?;
        Ok(row[..self.k].iter().all(|&c| c == 0))
    }

    /// The canonical representative of `v` modulo the lattice, as a form.
    pub fn reduce(&self, v: &LinearForm) -> Result<LinearForm> {
        let mut row = row_of(v, self.k)?;
        self.reduce_row(&mut row)?;
        Ok(LinearForm::new(row[..self.k].to_vec()))
    }

    pub(crate) fn insert_row(&mut self, mut v: Row) -> Result<bool> {
        let k = self.k;
        let mut i = 0;
        loop {
            let Some(lead) = leading(&v, k) else {
                return Ok(false);
            };
            if i == self.rows.len() || lead < self.pivots[i] {
                if v[lead] < 0 {
                    for c in &mut v[lead..k] {
                        *c = -*c;
                    }
                }
                self.rows.insert(i, v);
                self.pivots.insert(i, lead);
                return Ok(true);
            }
            let p = self.pivots[i];
            if lead > p {
                i += 1;
                continue;
            }
            let a = self.rows[i][p];
            let b = v[p];
            if b % a == 0 {
                sub_scaled(&mut v, b / a, &self.rows[i], p, k)?;
            } else {
                let eg = a.extended_gcd(&b);
                let (g, s, t) = (eg.gcd, eg.x, eg.y);
                let row = self.rows[i];
                let mut pivot_row = combine(s, &row, t, &v, p, k)?;
                if pivot_row[p] < 0 {
                    for c in &mut pivot_row[p..k] {
                        *c = -*c;
                    }
                }
                v = combine(b / g, &row, -(a / g), &v, p, k)?;
                debug_assert_eq!(v[p], 0);
                self.rows[i] = pivot_row;
            }
            i += 1;
        }
    }

    /// Reduces `v` in place to its canonical coset representative: every
    /// pivot column ends up in `[0, pivot)`. Two rows are congruent modulo
    /// the lattice iff their reductions coincide.
    #[inline]
    pub(crate) fn reduce_row(&self, v: &mut Row) -> Result<()> {
        let k = self.k;
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let a = row[p];
            let q = if a == 1 { v[p] } else { v[p].div_euclid(a) };
            if q != 0 {
                sub_scaled(v, q, row, p, k)?;
            }
        }
        Ok(())
    }
}
