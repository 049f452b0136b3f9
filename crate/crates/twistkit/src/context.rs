//! Quotient contexts for the Artin base.
//!
//! `D'` is the free square-zero extension on all `u`,`v` symbols. `D` is cut
//! out by the relations
//! `u^0_(i-1,j-1) + u^1_(i-1,j) + u^2_(i,j-1) + u^3_(i,j) = 0` for
//! `0 <= i,j <= d` (symbols with indices outside the index set read as
//! zero), and `D_s` additionally by
//! `s0 u^0 + s1 u^2`, `s0 u^1 + s1 u^3`, `s0 v^0 + s1 v^2`,
//! `s0 v^1 + s1 v^3`.
//!
//! A context is realized as an idempotent substitution table sending every
//! full symbol to a linear combination of reduced symbols; it is built from
//! the relation set by row reduction, which is canonical (independent of the
//! order the relations are listed in).

use crate::error::{Error, Result};
use crate::family::index_pairs;
use crate::nil::NilSymbol;
use crate::scalar::Rat;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A rational linear combination of nilpotent symbols.
pub type LinComb = Vec<(NilSymbol, Rat)>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ContextLabel {
    DPrime,
    D,
    /// The subscheme over the point `[s0 : s1]` of the base line.
    Ds {
        s0: Rat,
        s1: Rat,
    },
}

impl fmt::Display for ContextLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextLabel::DPrime => write!(f, "D'"),
            ContextLabel::D => write!(f, "D"),
            ContextLabel::Ds { s0, s1 } => write!(f, "D_s([{s0}:{s1}])"),
        }
    }
}

#[derive(Debug)]
pub struct QuotientContext {
    d: u32,
    label: ContextLabel,
    /// Substituted symbols only; absent symbols map to themselves.
    subst: BTreeMap<NilSymbol, LinComb>,
    /// Ordered basis of the maximal ideal in this context.
    reduced: Vec<NilSymbol>,
}

/// All full symbols for degree `d`, in canonical order.
pub fn full_symbols(d: u32) -> Vec<NilSymbol> {
    let mut out = Vec::new();
    for (i, j) in index_pairs(d) {
        for l in 0..4 {
            out.push(NilSymbol::u(i, j, l));
        }
    }
    for l in 0..4 {
        out.push(NilSymbol::v(l));
    }
    out.sort();
    out
}

/// The defining relations of `D` inside `D'`.
pub fn d_relations(d: u32) -> Vec<LinComb> {
    let in_index = |i: i32, j: i32| -> bool {
        i >= 0
            && j >= 0
            && i < d as i32
            && j < d as i32
            && !matches!((i, j), (0, 0) | (0, 1) | (1, 0) | (1, 1))
    };
    let mut rels = Vec::new();
    for i in 0..=d as i32 {
        for j in 0..=d as i32 {
            let mut rel: LinComb = Vec::new();
            for (di, dj, l) in [(-1, -1, 0u8), (-1, 0, 1), (0, -1, 2), (0, 0, 3)] {
                let (a, b) = (i + di, j + dj);
                if in_index(a, b) {
                    rel.push((NilSymbol::u(a as u8, b as u8, l), Rat::one()));
                }
            }
            if !rel.is_empty() {
                rels.push(rel);
            }
        }
    }
    rels
}

/// The extra relations of `D_s` at `[s0 : s1]`.
pub fn ds_relations(d: u32, s0: &Rat, s1: &Rat) -> Vec<LinComb> {
    let mut rels = Vec::new();
    let mut push = |a: NilSymbol, b: NilSymbol| {
        let mut rel: LinComb = Vec::new();
        if !s0.is_zero() {
            rel.push((a, s0.clone()));
        }
        if !s1.is_zero() {
            rel.push((b, s1.clone()));
        }
        if !rel.is_empty() {
            rels.push(rel);
        }
    };
    for (i, j) in index_pairs(d) {
        push(NilSymbol::u(i, j, 0), NilSymbol::u(i, j, 2));
        push(NilSymbol::u(i, j, 1), NilSymbol::u(i, j, 3));
    }
    push(NilSymbol::v(0), NilSymbol::v(2));
    push(NilSymbol::v(1), NilSymbol::v(3));
    rels
}

impl QuotientContext {
    pub fn d_prime(d: u32) -> Result<Arc<Self>> {
        if d < 3 {
            return Err(Error::DegreeTooSmall(d));
        }
        Ok(Arc::new(QuotientContext {
            d,
            label: ContextLabel::DPrime,
            subst: BTreeMap::new(),
            reduced: full_symbols(d),
        }))
    }

    pub fn d_full(d: u32) -> Result<Arc<Self>> {
        Self::from_relations(d, ContextLabel::D, &d_relations(d))
    }

    pub fn d_s(d: u32, s0: Rat, s1: Rat) -> Result<Arc<Self>> {
        if s0.is_zero() && s1.is_zero() {
            return Err(Error::InvalidPoint(s0.to_string(), s1.to_string()));
        }
        // Normalize projective coordinates so labels are canonical.
        let (s0, s1) = if s0.is_zero() {
            (Rat::zero(), Rat::one())
        } else {
            (Rat::one(), &s1 / &s0)
        };
        let mut rels = d_relations(d);
        rels.extend(ds_relations(d, &s0, &s1));
        let ctx = Self::from_relations(d, ContextLabel::Ds { s0: s0.clone(), s1 }, &rels)?;
        // At s = [1:0] the surviving u-symbols are renamed to the reduced
        // w-symbols of the basis table.
        let ctx = Arc::try_unwrap(ctx).expect("fresh context");
        if matches!(&ctx.label, ContextLabel::Ds { s0, s1 } if s0.is_one() && s1.is_zero()) {
            Ok(Arc::new(ctx.rename_u3_to_w()))
        } else {
            Ok(Arc::new(ctx))
        }
    }

    /// Build a context from an arbitrary relation set (used for mutation
    /// tests as well as the standard contexts).
    pub fn from_relations(d: u32, label: ContextLabel, rels: &[LinComb]) -> Result<Arc<Self>> {
        if d < 3 {
            return Err(Error::DegreeTooSmall(d));
        }
        let symbols = full_symbols(d);
        let col_of: BTreeMap<NilSymbol, usize> = symbols
            .iter()
            .enumerate()
            .map(|(k, &s)| (s, k))
            .collect();
        let n = symbols.len();
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        for rel in rels {
            let mut row = vec![Rat::zero(); n];
            for (sym, c) in rel {
                let col = *col_of
                    .get(sym)
                    .ok_or_else(|| Error::SymbolOutOfContext(sym.to_string(), "D'".into()))?;
                row[col] = &row[col] + c;
            }
            if row.iter().any(|c| !c.is_zero()) {
                rows.push(row);
            }
        }
        rref(&mut rows);
        let mut subst = BTreeMap::new();
        let mut pivot_cols = Vec::new();
        for row in &rows {
            let Some(p) = row.iter().position(|c| !c.is_zero()) else {
                continue;
            };
            pivot_cols.push(p);
            let mut comb: LinComb = Vec::new();
            for (k, c) in row.iter().enumerate().skip(p + 1) {
                if !c.is_zero() {
                    comb.push((symbols[k], -c.clone()));
                }
            }
            subst.insert(symbols[p], comb);
        }
        let reduced = symbols
            .iter()
            .enumerate()
            .filter(|(k, _)| !pivot_cols.contains(k))
            .map(|(_, &s)| s)
            .collect();
        let ctx = QuotientContext {
            d,
            label,
            subst,
            reduced,
        };
        // Every generating relation must die in its own quotient.
        for rel in rels {
            if !ctx.reduce_comb(rel).is_empty() {
                return Err(Error::RelationFailure(format!(
                    "relation {} does not reduce to zero",
                    fmt_comb(rel)
                )));
            }
        }
        Ok(Arc::new(ctx))
    }

    fn rename_u3_to_w(mut self) -> Self {
        let rename = |s: NilSymbol| match s {
            NilSymbol::U { i, j, l: 3 } => NilSymbol::w(i, j),
            other => other,
        };
        let mut subst = BTreeMap::new();
        for (sym, comb) in std::mem::take(&mut self.subst) {
            let comb = comb.into_iter().map(|(s, c)| (rename(s), c)).collect();
            subst.insert(sym, comb);
        }
        self.subst = subst;
        for s in &mut self.reduced {
            *s = rename(*s);
        }
        self.reduced.sort();
        // A renamed symbol still reduces: record the identification itself.
        for (i, j) in index_pairs(self.d) {
            let u3 = NilSymbol::u(i, j, 3);
            self.subst.entry(u3).or_insert_with(|| vec![(NilSymbol::w(i, j), Rat::one())]);
        }
        self
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn label(&self) -> &ContextLabel {
        &self.label
    }

    pub fn reduced_basis(&self) -> &[NilSymbol] {
        &self.reduced
    }

    /// The image of a single symbol, `None` meaning "maps to itself".
    pub fn image(&self, sym: &NilSymbol) -> Option<&LinComb> {
        self.subst.get(sym)
    }

    pub fn is_reduced_symbol(&self, sym: &NilSymbol) -> bool {
        self.reduced.contains(sym)
    }

    /// Reduce a linear combination of symbols, dropping zero coefficients.
    pub fn reduce_comb(&self, comb: &[(NilSymbol, Rat)]) -> LinComb {
        let mut acc: BTreeMap<NilSymbol, Rat> = BTreeMap::new();
        let mut add = |sym: NilSymbol, c: Rat| {
            let e = acc.entry(sym).or_insert_with(Rat::zero);
            *e = &*e + &c;
        };
        for (sym, c) in comb {
            match self.subst.get(sym) {
                None => add(*sym, c.clone()),
                Some(image) => {
                    for (s2, c2) in image {
                        add(*s2, c * c2);
                    }
                }
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }

    pub fn same_context(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || (a.d == b.d && a.label == b.label)
    }
}

impl fmt::Display for QuotientContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (d = {})", self.label, self.d)
    }
}

pub fn fmt_comb(comb: &[(NilSymbol, Rat)]) -> String {
    if comb.is_empty() {
        return "0".into();
    }
    comb.iter()
        .map(|(s, c)| {
            if c.is_one() {
                s.to_string()
            } else {
                format!("{c}*{s}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Reduced row echelon form over the rationals, in place.
fn rref(rows: &mut Vec<Vec<Rat>>) {
    if rows.is_empty() {
        return;
    }
    let ncols = rows[0].len();
    let mut lead = 0usize;
    for r in 0..rows.len() {
        if lead >= ncols {
            break;
        }
        let mut pivot_row = None;
        'search: while lead < ncols {
            for k in r..rows.len() {
                if !rows[k][lead].is_zero() {
                    pivot_row = Some(k);
                    break 'search;
                }
            }
            lead += 1;
        }
        let Some(k) = pivot_row else { break };
        rows.swap(r, k);
        let inv = rows[r][lead].clone();
        for c in lead..ncols {
            rows[r][c] = &rows[r][c] / &inv;
        }
        for k in 0..rows.len() {
            if k != r && !rows[k][lead].is_zero() {
                let factor = rows[k][lead].clone();
                for c in lead..ncols {
                    rows[k][c] = &rows[k][c] - &(&factor * &rows[r][c]);
                }
            }
        }
        lead += 1;
    }
    rows.retain(|row| row.iter().any(|c| !c.is_zero()));
}
