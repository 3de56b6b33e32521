//! From almost-examples to per-`k` tables of `f_n(k)`.
//!
//! Every almost-example is solved over `Q/Z`; families that keep all
//! inequations alive are realized as concrete sets. Families are grouped by
//! modulus `d` and class count; a group yields a row "`d | n` gives at most
//! `ell` sums" unless a row with a divisor of `d` and no larger value exists.
//! The smallest working `n` of a row is observed, not proved.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AlmostExample;
use crate::oracle;
use crate::search::{SearchConfig, SearchOutcome};
use crate::solver::{
    instantiate, instantiate_at_modulus, solve_mod1, substitute_check, Equation, SolutionFamily, Strategy, Witness, Q,
};

pub const SEARCH_SCHEMA: &str = "zsfree.search/1";
pub const TABLE_SCHEMA: &str = "zsfree.table/1";

/// Partial assignments tried per family and modulus when looking for the
/// smallest working `n`.
const MODULUS_BUDGET: u64 = 5_000_000;

/// An admissible family together with where it came from and a verified
/// generic point.
#[derive(Clone, Debug)]
pub struct FamilyRecord {
    pub family_id: usize,
    /// Index into the search output; `None` for the relation of `{1, .., k}`.
    pub almost_example_id: Option<usize>,
    pub ell: usize,
    pub family: SolutionFamily,
    pub witness: Witness,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub k: usize,
    pub families: Vec<FamilyRecord>,
    /// Families dropped because some inequation vanishes on them.
    pub rejected: usize,
}

fn families_of(ae: &AlmostExample) -> Result<(Vec<SolutionFamily>, usize)> {
    let eqs: Vec<Equation> = ae.equations().into_iter().map(Equation::homogeneous).collect();
    let all = solve_mod1(ae.k(), &eqs)?;
    let total = all.len();
    let ineqs = ae.inequations();
    let kept: Vec<SolutionFamily> = all.into_iter().filter(|f| substitute_check(f, &ineqs)).collect();
    let rejected = total - kept.len();
    Ok((kept, rejected))
}

fn realize(ae: &AlmostExample, fam: &SolutionFamily) -> Result<Witness> {
    let above = (ae.k() * ae.ell()) as u64;
    let w = instantiate(fam, &Strategy::GenericPrimes { above })?;
    if !oracle::verify_example(w.n, &w.elements, ae.ell()) {
        return Err(Error::Audit(format!(
            "generic point {:?} in Z_{} of family [{fam}] does not have {} sums",
            w.elements,
            w.n,
            ae.ell()
        )));
    }
    Ok(w)
}

/// The relation of `{1, .., k}` in a group large enough that no sum wraps
/// around; it has `k(k+1)/2` classes.
pub fn trivial_example(k: usize) -> Result<AlmostExample> {
    let n = (k * (k + 1) / 2 + 1) as u64;
    let elements: Vec<u64> = (1..=k as u64).collect();
    AlmostExample::from_witness(n, &elements)
}

/// Solves every almost-example, keeps the admissible families, and appends
/// the families of the relation of `{1, .., k}`.
pub fn analyze(k: usize, examples: &[AlmostExample]) -> Result<Analysis> {
    let mut families = Vec::new();
    let mut rejected = 0;
    let trivial = trivial_example(k)?;
    let sources = examples.iter().enumerate().map(|(i, ae)| (Some(i), ae)).chain([(None, &trivial)]);
    for (id, ae) in sources {
        if ae.k() != k {
            return Err(Error::InvalidArgument(format!("relation for k={} in a k={k} analysis", ae.k())));
        }
        let (kept, r) = families_of(ae)?;
        rejected += r;
        for family in kept {
            let witness = realize(ae, &family)?;
            families.push(FamilyRecord {
                family_id: families.len(),
                almost_example_id: id,
                ell: ae.ell(),
                family,
                witness,
            });
        }
    }
    Ok(Analysis { k, families, rejected })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub k: usize,
    /// The row applies when `divisor | n`.
    pub divisor: u64,
    /// Smallest `n` with `divisor | n` at which a family of the row was
    /// realized with exactly `value` sums.
    pub n_min_observed: u64,
    pub value: usize,
    pub example_n: u64,
    pub example_elements: Vec<u64>,
    pub family_id: usize,
    pub almost_example_id: Option<usize>,
    /// `value` equals the minimum over the table.
    pub minimal: bool,
}

impl TableRow {
    pub fn applies_to(&self, n: u64) -> bool {
        n.is_multiple_of(self.divisor) && n >= self.n_min_observed
    }
}

fn first_realization<'a>(
    group: &[&'a FamilyRecord],
    d: u64,
    ell: usize,
    limit: u64,
) -> Option<(u64, &'a FamilyRecord, Witness)> {
    let start = d.max(2).div_ceil(d) * d;
    (start..=limit).step_by(d as usize).find_map(|n| {
        group.iter().find_map(|&f| instantiate_at_modulus(&f.family, n, ell, MODULUS_BUDGET).map(|w| (n, f, w)))
    })
}

/// Builds the rows for `k`. `sweep_limit` bounds the moduli tried for
/// `n_min_observed`; a row that has no realization up to the limit is
/// searched further along multiples of its divisor, and as a last resort
/// reports the generic point of its first family.
pub fn build_table(k: usize, families: &[FamilyRecord], sweep_limit: u64) -> Result<Vec<TableRow>> {
    let mut groups: BTreeMap<(u64, usize), Vec<&FamilyRecord>> = BTreeMap::new();
    for f in families {
        if f.family.k() != k {
            return Err(Error::InvalidArgument(format!("family for k={} in a k={k} table", f.family.k())));
        }
        groups.entry((f.family.modulus() as u64, f.ell)).or_default().push(f);
    }
    let keys: Vec<(u64, usize)> = groups.keys().copied().collect();
    let dominated =
        |&(d, ell): &(u64, usize)| keys.iter().any(|&(d2, l2)| (d2, l2) != (d, ell) && d % d2 == 0 && l2 <= ell);
    let mut rows = Vec::new();
    for (key, group) in &groups {
        if dominated(key) {
            continue;
        }
        let (d, ell) = *key;
        let found = first_realization(group, d, ell, sweep_limit)
            .or_else(|| first_realization(group, d, ell, (sweep_limit * 4).max(d * 16).min(oracle::CAPACITY)));
        let (n_min, source, w) = match found {
            Some(hit) => hit,
            None => (group[0].witness.n, group[0], group[0].witness.clone()),
        };
        if !oracle::verify_example(w.n, &w.elements, ell) || w.n % d != 0 {
            return Err(Error::Audit(format!("row example {:?} in Z_{} does not verify", w.elements, w.n)));
        }
        rows.push(TableRow {
            k,
            divisor: d,
            n_min_observed: n_min,
            value: ell,
            example_n: w.n,
            example_elements: w.elements,
            family_id: source.family_id,
            almost_example_id: source.almost_example_id,
            minimal: false,
        });
    }
    let best = rows.iter().map(|r| r.value).min();
    for r in &mut rows {
        r.minimal = Some(r.value) == best;
    }
    rows.sort_by_key(|r| (r.value, r.divisor));
    Ok(rows)
}

/// `f(k)` read off a table.
pub fn min_f(rows: &[TableRow]) -> Option<usize> {
    rows.iter().map(|r| r.value).min()
}

/// What the table says about `f_n(k)`: the least value among the rows that
/// apply to `n`, `None` when none does.
pub fn predicted_f(rows: &[TableRow], n: u64) -> Option<usize> {
    rows.iter().filter(|r| r.applies_to(n)).map(|r| r.value).min()
}

pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>2}  {:<10} {:>6}  {:>6}  example", "k", "condition", "n_min", "value");
    for r in rows {
        let cond = if r.divisor == 1 { "any n".to_string() } else { format!("{} | n", r.divisor) };
        let value = if r.minimal { format!("{}*", r.value) } else { r.value.to_string() };
        let elems: Vec<String> = r.example_elements.iter().map(u64::to_string).collect();
        let _ = writeln!(
            out,
            "{:>2}  {:<10} {:>6}  {:>6}  {{{}}} in Z_{}",
            r.k,
            cond,
            r.n_min_observed,
            value,
            elems.join(", "),
            r.example_n
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRecord {
    pub schema: String,
    #[serde(flatten)]
    pub row: TableRow,
}

pub fn table_records(rows: &[TableRow]) -> Result<String> {
    let mut out = String::new();
    for row in rows {
        let rec = TableRecord { schema: TABLE_SCHEMA.into(), row: row.clone() };
        out.push_str(&serde_json::to_string(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

/// An affine expression with rationals written as `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExprRecord {
    pub coeffs: Vec<String>,
    pub constant: String,
}

fn q_str(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// One line of search output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SearchRecord {
    Summary {
        schema: String,
        k: usize,
        ell_max: usize,
        symmetry: bool,
        anti_clique: bool,
        memo: bool,
        almost_examples: usize,
        min_ell: Option<usize>,
    },
    AlmostExample {
        schema: String,
        id: usize,
        k: usize,
        ell: usize,
        /// Class index of every nonempty subset, in increasing mask order.
        labels: Vec<u8>,
        /// Each class as lists of 1-based variable indices.
        classes: Vec<Vec<Vec<usize>>>,
    },
    Family {
        schema: String,
        id: usize,
        almost_example_id: Option<usize>,
        ell: usize,
        modulus: i64,
        /// 1-based.
        free: Vec<usize>,
        exprs: Vec<ExprRecord>,
        display: String,
        witness_n: u64,
        witness_elements: Vec<u64>,
    },
}

fn class_lists(ae: &AlmostExample) -> Vec<Vec<Vec<usize>>> {
    ae.classes().iter().map(|c| c.iter().map(|m| m.indices().map(|i| i + 1).collect()).collect()).collect()
}

pub fn search_records(cfg: &SearchConfig, outcome: &SearchOutcome, analysis: &Analysis) -> Result<String> {
    let mut recs = vec![SearchRecord::Summary {
        schema: SEARCH_SCHEMA.into(),
        k: cfg.k,
        ell_max: cfg.ell_max,
        symmetry: cfg.symmetry,
        anti_clique: cfg.anti_clique,
        memo: cfg.memo,
        almost_examples: outcome.examples.len(),
        min_ell: outcome.examples.iter().map(AlmostExample::ell).min(),
    }];
    for (id, ae) in outcome.examples.iter().enumerate() {
        recs.push(SearchRecord::AlmostExample {
            schema: SEARCH_SCHEMA.into(),
            id,
            k: ae.k(),
            ell: ae.ell(),
            labels: ae.labels(),
            classes: class_lists(ae),
        });
    }
    for f in &analysis.families {
        let fam = &f.family;
        recs.push(SearchRecord::Family {
            schema: SEARCH_SCHEMA.into(),
            id: f.family_id,
            almost_example_id: f.almost_example_id,
            ell: f.ell,
            modulus: fam.modulus(),
            free: fam.free().iter().map(|v| v + 1).collect(),
            exprs: (0..fam.k())
                .map(|v| {
                    let e = fam.expr(v);
                    ExprRecord { coeffs: e.coeffs.iter().map(q_str).collect(), constant: q_str(&e.constant) }
                })
                .collect(),
            display: fam.to_string(),
            witness_n: f.witness.n,
            witness_elements: f.witness.elements.clone(),
        });
    }
    let mut out = String::new();
    for r in &recs {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Coincidences of a relation as `{1,2} = {3}; ...`.
pub fn describe(ae: &AlmostExample) -> String {
    let parts: Vec<String> = ae
        .classes()
        .iter()
        .filter(|c| c.len() > 1)
        .map(|c| c.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" = "))
        .collect();
    if parts.is_empty() {
        "(all sums distinct)".into()
    } else {
        parts.join("; ")
    }
}

pub fn search_text(cfg: &SearchConfig, outcome: &SearchOutcome, analysis: &Analysis) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "k = {}, ell_max = {}: {} almost-examples up to relabeling",
        cfg.k,
        cfg.ell_max,
        outcome.examples.len()
    );
    for (id, ae) in outcome.examples.iter().enumerate() {
        let _ = writeln!(out, "[{id}] ell = {}: {}", ae.ell(), describe(ae));
        for f in analysis.families.iter().filter(|f| f.almost_example_id == Some(id)) {
            let elems: Vec<String> = f.witness.elements.iter().map(u64::to_string).collect();
            let _ = writeln!(
                out,
                "    family {} (d = {}): {}  e.g. {{{}}} in Z_{}",
                f.family_id,
                f.family.modulus(),
                f.family,
                elems.join(", "),
                f.witness.n
            );
        }
    }
    if let Some(min) = outcome.examples.iter().map(AlmostExample::ell).min() {
        let _ = writeln!(out, "minimal ell = {min}");
    }
    out
}

/// The almost-examples and search settings stored in search records.
pub fn parse_search_records(text: &str) -> Result<(usize, usize, Vec<AlmostExample>)> {
    let mut header = None;
    let mut examples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SearchRecord = serde_json::from_str(line)?;
        match rec {
            SearchRecord::Summary { schema, k, ell_max, .. } => {
                if schema != SEARCH_SCHEMA {
                    return Err(Error::InvalidArgument(format!("line {}: unknown schema {schema}", i + 1)));
                }
                header = Some((k, ell_max));
            }
            SearchRecord::AlmostExample { k, labels, .. } => examples.push(AlmostExample::from_labels(k, &labels)?),
            SearchRecord::Family { .. } => {}
        }
    }
    let (k, ell_max) = header.ok_or_else(|| Error::InvalidArgument("search output has no summary record".into()))?;
    if examples.iter().any(|ae| ae.k() != k) {
        return Err(Error::InvalidArgument("search output mixes different k".into()));
    }
    Ok((k, ell_max, examples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::enumerate;

    fn table(k: usize, sweep: u64) -> Vec<TableRow> {
        let out = enumerate(&SearchConfig::new(k)).unwrap();
        let a = analyze(k, &out.examples).unwrap();
        build_table(k, &a.families, sweep).unwrap()
    }

    fn summary(rows: &[TableRow]) -> Vec<(u64, usize, u64)> {
        rows.iter().map(|r| (r.divisor, r.value, r.n_min_observed)).collect()
    }

    #[test]
    fn k1_single_row() {
        assert_eq!(summary(&table(1, 20)), vec![(1, 1, 2)]);
    }

    #[test]
    fn k3_rows() {
        assert_eq!(summary(&table(3, 20)), vec![(2, 5, 6), (1, 6, 7)]);
    }

    #[test]
    fn trivial_family_has_modulus_one() {
        // only x3 = x1 + x2 holds among the sums of {1, 2, 3}
        let a = analyze(3, &[]).unwrap();
        assert_eq!(a.families.len(), 1);
        assert_eq!(a.families[0].family.free().len(), 2);
        assert_eq!(a.families[0].family.modulus(), 1);
        assert_eq!(a.families[0].ell, 6);
    }

    #[test]
    fn records_round_trip() {
        let cfg = SearchConfig::new(3);
        let out = enumerate(&cfg).unwrap();
        let a = analyze(3, &out.examples).unwrap();
        let text = search_records(&cfg, &out, &a).unwrap();
        let (k, lmax, back) = parse_search_records(&text).unwrap();
        assert_eq!((k, lmax), (3, 5));
        assert_eq!(back, out.examples);
    }
}
