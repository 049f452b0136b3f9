//! Printed golden tables and the comparison harness.
//!
//! Each table the computation reproduces is encoded here exactly as
//! printed, independently of the pipeline that recomputes it. Two
//! deviations are documented and expected: the `e0` row of the map table
//! (the printed T-degree contradicts the derivation), and the global
//! factor 2 on the `v`-rows of the step tables (the printed rows drop the
//! factor coming from differentiating the square term). Comparisons are
//! strict everywhere else.

use crate::artin::ArtinElement;
use crate::bigraded::BiSection;
use crate::derivative::{printed_basis_table, DerivMatrix, MsBasis, Step2, Step3};
use crate::error::Result;
use crate::family::FamilyData;
use crate::modules::{ModSymbol, Section};
use crate::nil::NilSymbol;
use crate::normal_bundle::DGMap;
use crate::params::ParamRing;
use crate::poly::ParamPoly;
use crate::scalar::{Rat, Scalar};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum RowStatus {
    Match,
    /// Matches after multiplying the printed row by the stated factor.
    MatchUpToFactor(i64),
    Mismatch,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowDiff {
    pub label: String,
    pub status: RowStatus,
    pub computed: String,
    pub printed: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureDiff {
    pub figure: u8,
    pub d: u32,
    pub rows: Vec<RowDiff>,
}

impl FigureDiff {
    pub fn mismatches(&self) -> Vec<&RowDiff> {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Mismatch)
            .collect()
    }

    pub fn strict(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Match)
    }

    pub fn ok_up_to_documented(&self) -> bool {
        self.mismatches().is_empty()
    }
}

fn constant_artin(family: &FamilyData, p: ParamPoly<Rat>) -> ArtinElement<Rat> {
    ArtinElement::from_constant(family.ctx_dprime.clone(), p)
}

fn param(ring: &Arc<ParamRing>, name: &str) -> ParamPoly<Rat> {
    ParamPoly::param(ring.clone(), ring.param(name).expect("known parameter"))
}

fn mono(
    family: &FamilyData,
    s_deg: u16,
    t_deg: u16,
    s0: u16,
    t0: u16,
    coeff: ParamPoly<Rat>,
) -> BiSection<Rat> {
    BiSection::monomial(s_deg, t_deg, s0, t0, constant_artin(family, coeff))
}

/// Printed pullback column of the gamma table (third column).
pub fn printed_gamma_pullback(family: &FamilyData, i: u8, j: u8) -> BiSection<Rat> {
    let d = family.d as u16;
    let ring = &family.ring;
    let du = family.d as u8;
    let zero = BiSection::zero(ring.clone(), family.ctx_dprime.clone(), d - 2, d - 2);
    if (i == du - 1 && j == 0) || (j == du - 1 && i <= du - 2) {
        return zero;
    }
    if i <= du - 2 && j <= du - 2 {
        let c = ParamPoly::c_pair_or_zero(ring, i, j);
        return mono(family, d - 2, d - 2, i as u16, j as u16, c);
    }
    if i == du - 1 && j == 1 {
        let a = mono(family, d - 2, d - 2, 1, 0, param(ring, "C_1a"));
        let b = mono(family, d - 2, d - 2, 0, 1, param(ring, "C_1b"));
        return &a + &b;
    }
    if i == du - 1 && j >= 2 {
        let c = match ring.c_col(j) {
            Some(p) => ParamPoly::param(ring.clone(), p),
            None => ParamPoly::zero(ring.clone()),
        };
        return mono(family, d - 2, d - 2, (j - 1) as u16, 0, c);
    }
    unreachable!("gamma row ({i},{j})")
}

pub fn printed_gamma_z_pullback(family: &FamilyData) -> BiSection<Rat> {
    let d = family.d as u16;
    let ring = &family.ring;
    let a = mono(family, d - 2, d - 2, 1, 1, param(ring, "C_za"));
    let b = mono(family, d - 2, d - 2, 1, 0, param(ring, "C_zb"));
    &a + &b
}

/// The gamma table check: recompute the pullback column from the
/// polynomial column and compare with the printed one, rowwise.
pub fn compare_gamma_pullbacks(family: &FamilyData) -> Result<FigureDiff> {
    let mut rows = Vec::new();
    let mut push = |label: String, computed: BiSection<Rat>, printed: BiSection<Rat>| {
        let status = if computed == printed || (computed.is_zero() && printed.is_zero()) {
            RowStatus::Match
        } else {
            RowStatus::Mismatch
        };
        rows.push(RowDiff {
            label,
            status,
            computed: computed.to_string(),
            printed: printed.to_string(),
        });
    };
    for &(i, j) in family.index.full() {
        let computed = family.pullback(family.gamma.row(i, j), &family.ctx_dprime)?;
        push(
            format!("gamma_({i},{j})"),
            computed,
            printed_gamma_pullback(family, i, j),
        );
    }
    let computed = family.pullback(family.gamma.z_row(), &family.ctx_dprime)?;
    push("gamma_z".into(), computed, printed_gamma_z_pullback(family));
    Ok(FigureDiff {
        figure: 2,
        d: family.d,
        rows,
    })
}

/// One printed row of the map table: a signed monomial with explicit
/// `(S0, S1, T0, T1)` exponents (the `e0` row is printed outside the
/// target convention, so exponents are kept raw).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PrintedMono {
    pub sign: i8,
    pub exps: [u16; 4],
}

impl PrintedMono {
    fn render(&self) -> String {
        let names = ["S0", "S1", "T0", "T1"];
        let mut parts = Vec::new();
        for (k, &e) in self.exps.iter().enumerate() {
            if e == 1 {
                parts.push(names[k].to_string());
            } else if e > 1 {
                parts.push(format!("{}^{e}", names[k]));
            }
        }
        let m = if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        };
        if self.sign < 0 {
            format!("-{m}")
        } else {
            m
        }
    }
}

/// Printed rows of the map table, keyed by row label. The `e0` row is kept
/// exactly as printed, with its T-degree inconsistent with the derivation.
pub fn printed_map_table(d: u32) -> Vec<(String, PrintedMono)> {
    let d = d as u16;
    let row = |label: &str, sign: i8, exps: [u16; 4]| (label.to_string(), PrintedMono { sign, exps });
    vec![
        row("a0", 1, [0, d - 1, 0, d - 1]),
        row("a1", -1, [0, d - 1, 1, d - 2]),
        row("a2", -1, [1, d - 2, 0, d - 1]),
        row("a3", 1, [1, d - 2, 1, d - 2]),
        row("e0", 1, [0, d - 2, 0, d - 2]),
        row("e1", -1, [0, d - 2, 1, d - 2]),
    ]
}

/// The derived value of the `e0` row that the relations force.
pub fn derived_e0_row(d: u32) -> PrintedMono {
    let d = d as u16;
    PrintedMono {
        sign: 1,
        exps: [0, d - 2, 0, d - 1],
    }
}

fn single_mono_of(section: &BiSection<Rat>) -> Option<PrintedMono> {
    let mut it = section.terms();
    let (key, coeff) = it.next()?;
    if it.next().is_some() {
        return None;
    }
    let c = coeff.constant_part().as_constant()?;
    let sign = if c == Rat::from_i64(1) {
        1
    } else if c == Rat::from_i64(-1) {
        -1
    } else {
        return None;
    };
    let (sd, td) = section.bidegree();
    Some(PrintedMono {
        sign,
        exps: [key.0, sd - key.0, key.1, td - key.1],
    })
}

/// Compare the computed map rows against the printed table. The `b` rows
/// and the expected c-row formula (rebuilt from the printed gamma
/// pullbacks) are strict; the `e0` row must match the derived value and is
/// reported as a documented deviation from the print.
pub fn compare_map_table(family: &FamilyData, dg: &DGMap) -> Result<FigureDiff> {
    let d = family.d;
    let mut rows = Vec::new();

    // b-rows: single monomials S0^i S1^(d-1-i) T0^j T1^(d-1-j)
    for &(i, j) in family.index.full() {
        let computed = dg.row_constant(ModSymbol::B(i, j));
        let printed = PrintedMono {
            sign: 1,
            exps: [
                i as u16,
                (d - 1) as u16 - i as u16,
                j as u16,
                (d - 1) as u16 - j as u16,
            ],
        };
        let status = match single_mono_of(&computed) {
            Some(m) if m == printed => RowStatus::Match,
            _ => RowStatus::Mismatch,
        };
        rows.push(RowDiff {
            label: format!("b_({i},{j})"),
            status,
            computed: computed.to_string(),
            printed: printed.render(),
        });
    }

    // a-rows and e-rows
    for (label, printed) in printed_map_table(d) {
        let computed = match label.as_str() {
            "a0" => dg.a_row(0).constant_part(),
            "a1" => dg.a_row(1).constant_part(),
            "a2" => dg.a_row(2).constant_part(),
            "a3" => dg.a_row(3).constant_part(),
            "e0" => dg.row_constant(ModSymbol::E0),
            "e1" => dg.row_constant(ModSymbol::E1),
            _ => unreachable!(),
        };
        let got = single_mono_of(&computed);
        let status = if label == "e0" {
            // must equal the derived value and differ from the print in
            // exactly the documented way
            match got {
                Some(m) if m == derived_e0_row(d) && m != printed => {
                    RowStatus::MatchUpToFactor(1)
                }
                Some(m) if m == printed => RowStatus::Mismatch,
                _ => RowStatus::Mismatch,
            }
        } else {
            match got {
                Some(m) if m == printed => RowStatus::Match,
                _ => RowStatus::Mismatch,
            }
        };
        rows.push(RowDiff {
            label,
            status,
            computed: computed.to_string(),
            printed: printed.render(),
        });
    }

    // c-row: rebuild the printed formula from the printed gamma pullbacks
    let expected_c = {
        let ring = family.ring.clone();
        let ctx = family.ctx_dprime.clone();
        let mut acc = BiSection::zero(ring.clone(), ctx.clone(), (d - 1) as u16, (d - 1) as u16);
        for l in 0..4u8 {
            let (s0, t0) = match l {
                0 => (1, 1),
                1 => (1, 0),
                2 => (0, 1),
                _ => (0, 0),
            };
            let fx = BiSection::monomial(1, 1, s0, t0, ArtinElement::one(ring.clone(), ctx.clone()));
            let v = ArtinElement::from_symbol(ring.clone(), ctx.clone(), NilSymbol::v(l))?
                .scale_poly(&ParamPoly::int(ring.clone(), 2));
            let mut slot = printed_gamma_z_pullback(family).scale_artin(&v);
            for &(i, j) in family.index.full() {
                let u = ArtinElement::from_symbol(ring.clone(), ctx.clone(), NilSymbol::u(i, j, l))?;
                slot = slot.checked_add(&printed_gamma_pullback(family, i, j).scale_artin(&u))?;
            }
            acc = acc.checked_add(&(&slot * &fx))?;
        }
        acc.reduce_in(dg.context())?
    };
    let computed_c = dg.row(ModSymbol::C).clone();
    rows.push(RowDiff {
        label: "c".into(),
        status: if computed_c == expected_c {
            RowStatus::Match
        } else {
            RowStatus::Mismatch
        },
        computed: computed_c.to_string(),
        printed: expected_c.to_string(),
    });

    Ok(FigureDiff {
        figure: 1,
        d,
        rows,
    })
}

/// Compare the reduced-basis substitution table against its printed form.
pub fn compare_basis_table(family: &FamilyData, ms: &MsBasis) -> FigureDiff {
    let mut rows = Vec::new();
    for (sym, expected) in printed_basis_table(family) {
        let got = ms.context().reduce_comb(&[(sym, num_traits::One::one())]);
        rows.push(RowDiff {
            label: sym.to_string(),
            status: if got == expected {
                RowStatus::Match
            } else {
                RowStatus::Mismatch
            },
            computed: crate::context::fmt_comb(&got),
            printed: crate::context::fmt_comb(&expected),
        });
    }
    FigureDiff {
        figure: 3,
        d: family.d,
        rows,
    }
}

fn w_label(sym: &NilSymbol) -> String {
    sym.to_string()
}

/// Printed step-2 rows: the coefficient of each basis symbol in the
/// nilpotent image of the distinguished generator.
pub fn printed_step2_rows(family: &FamilyData) -> BTreeMap<NilSymbol, BiSection<Rat>> {
    let d = family.d as u16;
    let du = family.d as u8;
    let ring = &family.ring;
    let mut rows = BTreeMap::new();
    let m = |s0: u16, t0: u16, c: ParamPoly<Rat>| mono(family, d - 1, d - 1, s0, t0, c);
    for &(i, j) in family.index.reduced() {
        if i <= du - 2 {
            // (C_(i,j) - C_(i,j-1)) S0^i S1^(d-1-i) T0^j T1^(d-1-j)
            let c = &ParamPoly::c_pair_or_zero(ring, i, j)
                - &ParamPoly::c_pair_or_zero(ring, i, j - 1);
            rows.insert(NilSymbol::w(i, j), m(i as u16, j as u16, c));
        } else if j >= 3 {
            // C_j S0^(j-1) S1^(d-j) T1^(d-1) - C_(j-1) S0^(j-2) S1^(d+1-j) T0 T1^(d-2)
            let cj = ParamPoly::param(ring.clone(), ring.c_col(j).expect("column"));
            let cj1 = ParamPoly::param(ring.clone(), ring.c_col(j - 1).expect("column"));
            let row = &m((j - 1) as u16, 0, cj) - &m((j - 2) as u16, 1, cj1);
            rows.insert(NilSymbol::w(i, j), row);
        } else if j == 2 {
            let row = &(&m(1, 1, -&param(ring, "C_1a")) + &m(0, 2, -&param(ring, "C_1b")))
                + &m(1, 0, param(ring, "C_2"));
            rows.insert(NilSymbol::w(i, j), row);
        } else {
            // j == 1
            let row = &m(1, 0, param(ring, "C_1a")) + &m(0, 1, param(ring, "C_1b"));
            rows.insert(NilSymbol::w(i, j), row);
        }
    }
    rows.insert(
        NilSymbol::v(2),
        &m(1, 2, param(ring, "C_za")) + &m(1, 1, param(ring, "C_zb")),
    );
    rows.insert(
        NilSymbol::v(3),
        &m(1, 1, param(ring, "C_za")) + &m(1, 0, param(ring, "C_zb")),
    );
    rows
}

fn diff_rows_scaled<K: Ord + std::fmt::Display, V: PartialEq + std::fmt::Display>(
    figure: u8,
    d: u32,
    computed: &BTreeMap<K, V>,
    printed: &BTreeMap<K, V>,
    scale2: impl Fn(&V) -> V,
    is_v_row: impl Fn(&K) -> bool,
) -> FigureDiff {
    let mut rows = Vec::new();
    for (sym, comp) in computed {
        let Some(print) = printed.get(sym) else {
            rows.push(RowDiff {
                label: sym.to_string(),
                status: RowStatus::Mismatch,
                computed: comp.to_string(),
                printed: "<absent>".into(),
            });
            continue;
        };
        let status = if is_v_row(sym) {
            if *comp == scale2(print) {
                RowStatus::MatchUpToFactor(2)
            } else {
                RowStatus::Mismatch
            }
        } else if comp == print {
            RowStatus::Match
        } else {
            RowStatus::Mismatch
        };
        rows.push(RowDiff {
            label: sym.to_string(),
            status,
            computed: comp.to_string(),
            printed: print.to_string(),
        });
    }
    FigureDiff { figure, d, rows }
}

pub fn compare_step2(family: &FamilyData, step2: &Step2) -> FigureDiff {
    let printed = printed_step2_rows(family);
    diff_rows_scaled(
        4,
        family.d,
        &step2.rows,
        &printed,
        |v| v.scale_poly(&ParamPoly::int(family.ring.clone(), 2)),
        |sym| matches!(sym, NilSymbol::V { .. }),
    )
}

/// Printed step-3 rows: sections on the `b`, `e` symbols.
pub fn printed_step3_rows(
    family: &FamilyData,
    dg: &DGMap,
) -> BTreeMap<NilSymbol, Section<Rat>> {
    let ring = &family.ring;
    let du = family.d as u8;
    let tev = dg.source().clone();
    let mk = |entries: Vec<(ModSymbol, u16, ParamPoly<Rat>)>| {
        let mut sec = Section::zero(tev.clone(), -1);
        for (sym, s0, c) in entries {
            let deg = match sym {
                ModSymbol::E0 | ModSymbol::E1 => 1,
                _ => 0,
            };
            let form = mono(family, deg, 0, s0, 0, c);
            sec.add_coeff(sym, form).expect("printed row shape");
        }
        sec
    };
    let mut rows = BTreeMap::new();
    for &(i, j) in family.index.reduced() {
        if i <= du - 2 {
            let c = &ParamPoly::c_pair_or_zero(ring, i, j - 1)
                - &ParamPoly::c_pair_or_zero(ring, i, j);
            rows.insert(NilSymbol::w(i, j), mk(vec![(ModSymbol::B(i, j), 0, c)]));
        } else if j >= 4 {
            let cj = ParamPoly::param(ring.clone(), ring.c_col(j).expect("column"));
            let cj1 = ParamPoly::param(ring.clone(), ring.c_col(j - 1).expect("column"));
            rows.insert(
                NilSymbol::w(i, j),
                mk(vec![
                    (ModSymbol::B(j - 1, 0), 0, -&cj),
                    (ModSymbol::B(j - 2, 1), 0, cj1),
                ]),
            );
        } else if j == 3 {
            let c3 = ParamPoly::param(ring.clone(), ring.c_col(3).expect("column"));
            rows.insert(
                NilSymbol::w(i, j),
                mk(vec![
                    (ModSymbol::B(2, 0), 0, -&c3),
                    (ModSymbol::E1, 1, -&param(ring, "C_2")),
                ]),
            );
        } else if j == 2 {
            rows.insert(
                NilSymbol::w(i, j),
                mk(vec![
                    (ModSymbol::E1, 1, -&param(ring, "C_1a")),
                    (ModSymbol::B(0, 2), 0, param(ring, "C_1b")),
                    (ModSymbol::E0, 1, -&param(ring, "C_2")),
                ]),
            );
        } else {
            rows.insert(
                NilSymbol::w(i, j),
                mk(vec![
                    (ModSymbol::E0, 1, -&param(ring, "C_1a")),
                    (ModSymbol::E1, 0, param(ring, "C_1b")),
                ]),
            );
        }
    }
    rows.insert(
        NilSymbol::v(2),
        mk(vec![
            (ModSymbol::B(1, 2), 0, -&param(ring, "C_za")),
            (ModSymbol::E1, 1, param(ring, "C_zb")),
        ]),
    );
    rows.insert(
        NilSymbol::v(3),
        mk(vec![
            (ModSymbol::E1, 1, param(ring, "C_za")),
            (ModSymbol::E0, 1, -&param(ring, "C_zb")),
        ]),
    );
    rows
}

pub fn compare_step3(family: &FamilyData, dg: &DGMap, step3: &Step3) -> FigureDiff {
    let printed = printed_step3_rows(family, dg);
    let scale2 = |sec: &Section<Rat>| {
        let mut out = Section::zero(sec.module().clone(), sec.twist());
        for (sym, c) in sec.coeffs() {
            out.add_coeff(*sym, c.scale_poly(&ParamPoly::int(family.ring.clone(), 2)))
                .unwrap();
        }
        out
    };
    diff_rows_scaled(
        5,
        family.d,
        &step3.rows,
        &printed,
        scale2,
        |sym| matches!(sym, NilSymbol::V { .. }),
    )
}

/// Printed derivative-matrix rows: entries on the kernel symbols, common
/// prefactor `1/S0` understood.
pub fn printed_dq_rows(family: &FamilyData) -> BTreeMap<NilSymbol, Vec<(ModSymbol, ParamPoly<Rat>)>> {
    let ring = &family.ring;
    let du = family.d as u8;
    let mut rows = BTreeMap::new();
    for &(i, j) in family.index.reduced() {
        let entries = if i <= du - 2 {
            let c = &ParamPoly::c_pair_or_zero(ring, i, j - 1)
                - &ParamPoly::c_pair_or_zero(ring, i, j);
            vec![(ModSymbol::F(i, j), c)]
        } else if j >= 4 {
            let cj = ParamPoly::param(ring.clone(), ring.c_col(j).expect("column"));
            let cj1 = ParamPoly::param(ring.clone(), ring.c_col(j - 1).expect("column"));
            vec![
                (ModSymbol::F(j - 1, 0), -&cj),
                (ModSymbol::F(j - 2, 1), cj1),
            ]
        } else if j == 3 {
            let c3 = ParamPoly::param(ring.clone(), ring.c_col(3).expect("column"));
            vec![
                (ModSymbol::F(2, 0), -&c3),
                (ModSymbol::G1, -&param(ring, "C_2")),
            ]
        } else if j == 2 {
            vec![
                (ModSymbol::G1, -&param(ring, "C_1a")),
                (ModSymbol::F(0, 2), param(ring, "C_1b")),
                (ModSymbol::G0, -&param(ring, "C_2")),
            ]
        } else {
            vec![(ModSymbol::G0, -&param(ring, "C_1a"))]
        };
        rows.insert(NilSymbol::w(i, j), entries);
    }
    rows.insert(
        NilSymbol::v(2),
        vec![
            (ModSymbol::F(1, 2), -&param(ring, "C_za")),
            (ModSymbol::G1, param(ring, "C_zb")),
        ],
    );
    rows.insert(
        NilSymbol::v(3),
        vec![
            (ModSymbol::G1, param(ring, "C_za")),
            (ModSymbol::G0, -&param(ring, "C_zb")),
        ],
    );
    rows
}

fn render_dq_row(entries: &[(ModSymbol, ParamPoly<Rat>)]) -> String {
    if entries.is_empty() {
        return "0".into();
    }
    entries
        .iter()
        .map(|(sym, c)| format!("({c}) * (1/S0) {sym}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn compare_dq(family: &FamilyData, dq: &DerivMatrix) -> FigureDiff {
    let printed = printed_dq_rows(family);
    let mut rows = Vec::new();
    for &sym in dq.rows() {
        let computed = dq.row_support(sym);
        let print = printed.get(&sym).cloned().unwrap_or_default();
        let print_sorted: BTreeMap<ModSymbol, ParamPoly<Rat>> = print.iter().cloned().collect();
        let comp_sorted: BTreeMap<ModSymbol, ParamPoly<Rat>> =
            computed.iter().cloned().collect();
        let is_v = matches!(sym, NilSymbol::V { .. });
        let status = if is_v {
            let scaled: BTreeMap<ModSymbol, ParamPoly<Rat>> = print_sorted
                .iter()
                .map(|(k, v)| (*k, v.scale(&Rat::from_i64(2))))
                .collect();
            if comp_sorted == scaled {
                RowStatus::MatchUpToFactor(2)
            } else {
                RowStatus::Mismatch
            }
        } else if comp_sorted == print_sorted {
            RowStatus::Match
        } else {
            RowStatus::Mismatch
        };
        rows.push(RowDiff {
            label: w_label(&sym),
            status,
            computed: render_dq_row(&computed),
            printed: render_dq_row(&print),
        });
    }
    FigureDiff {
        figure: 6,
        d: family.d,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivative::derivative_pipeline;
    use crate::normal_bundle::{build_dg, check_dg_surjective};

    fn run(d: u32) -> (FamilyData, DGMap, MsBasis, Step2, Step3, DerivMatrix) {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let (_, inv) = check_dg_surjective(&dg).unwrap();
        let (ms, s2, s3, dq) = derivative_pipeline(&family, &dg, &inv).unwrap();
        (family, dg, ms, s2, s3, dq)
    }

    #[test]
    fn gamma_pullback_column_is_reproduced() {
        for d in [3u32, 4, 5, 6] {
            let family = FamilyData::new(d).unwrap();
            let diff = compare_gamma_pullbacks(&family).unwrap();
            assert!(diff.strict(), "d={d}: {:?}", diff.mismatches());
        }
    }

    #[test]
    fn map_table_matches_with_the_documented_e0_deviation() {
        for d in [3u32, 4, 5] {
            let family = FamilyData::new(d).unwrap();
            let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
            let diff = compare_map_table(&family, &dg).unwrap();
            assert!(diff.ok_up_to_documented(), "d={d}: {:?}", diff.mismatches());
            let e0 = diff.rows.iter().find(|r| r.label == "e0").unwrap();
            assert_eq!(e0.status, RowStatus::MatchUpToFactor(1));
            let strict_rows = diff.rows.iter().filter(|r| r.label != "e0");
            assert!(strict_rows.clone().all(|r| r.status == RowStatus::Match));
        }
    }

    #[test]
    fn basis_and_step_tables_for_small_degrees() {
        for d in [3u32, 4, 5] {
            let (family, dg, ms, s2, s3, dq) = run(d);
            let f3 = compare_basis_table(&family, &ms);
            assert!(f3.strict(), "d={d} figure 3: {:?}", f3.mismatches());
            let f4 = compare_step2(&family, &s2);
            assert!(f4.ok_up_to_documented(), "d={d} figure 4: {:?}", f4.mismatches());
            let f5 = compare_step3(&family, &dg, &s3);
            assert!(f5.ok_up_to_documented(), "d={d} figure 5: {:?}", f5.mismatches());
            let f6 = compare_dq(&family, &dq);
            assert!(f6.ok_up_to_documented(), "d={d} figure 6: {:?}", f6.mismatches());
            // w-rows strict, v-rows off by the documented factor
            for fig in [&f4, &f5, &f6] {
                for row in &fig.rows {
                    if row.label.starts_with('w') || row.label.starts_with('u') {
                        assert_eq!(row.status, RowStatus::Match, "fig {} row {}", fig.figure, row.label);
                    } else if row.label.starts_with('v') {
                        assert_eq!(
                            row.status,
                            RowStatus::MatchUpToFactor(2),
                            "fig {} row {}",
                            fig.figure,
                            row.label
                        );
                    }
                }
            }
        }
    }
}
