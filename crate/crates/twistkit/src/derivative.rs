//! The derivative map at the distinguished point `[1:0]` of the base line:
//! the reduced basis of the maximal ideal, the coefficient tables of the
//! canonical correction, the square derivative matrix over the parameter
//! ring, and its surjectivity certificate.

use crate::bigraded::BiSection;
use crate::context::QuotientContext;
use crate::error::{Error, Result};
use crate::family::FamilyData;
use crate::linalg::{block_det, ff_rank_det, Mat};
use crate::modules::{ModSymbol, Section};
use crate::nil::NilSymbol;
use crate::normal_bundle::{DGInverse, DGMap};
use crate::params::{random_assignment, Assignment, ParamRing};
use crate::poly::ParamPoly;
use crate::scalar::{Fp62, Rat, Scalar, SPECIALIZATION_PRIME};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error as ThisError;

/// Ordered reduced basis of the maximal ideal at `[1:0]`, together with its
/// substitution table.
pub struct MsBasis {
    pub d: u32,
    ctx: Arc<QuotientContext>,
    symbols: Vec<NilSymbol>,
}

impl MsBasis {
    pub fn context(&self) -> &Arc<QuotientContext> {
        &self.ctx
    }

    pub fn symbols(&self) -> &[NilSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// The substitution table at `[1:0]` in its printed form: every full symbol
/// with its reduced image.
pub fn printed_basis_table(family: &FamilyData) -> Vec<(NilSymbol, Vec<(NilSymbol, Rat)>)> {
    let d = family.d as u8;
    let mut out = Vec::new();
    for &(i, j) in family.index.full() {
        out.push((NilSymbol::u(i, j, 0), vec![]));
        out.push((NilSymbol::u(i, j, 1), vec![]));
        let u2 = if j <= d - 2 {
            vec![(NilSymbol::w(i, j + 1), -Rat::one())]
        } else {
            vec![]
        };
        out.push((NilSymbol::u(i, j, 2), u2));
        let u3 = if family.index.contains_reduced(i, j) {
            vec![(NilSymbol::w(i, j), Rat::one())]
        } else {
            vec![]
        };
        out.push((NilSymbol::u(i, j, 3), u3));
    }
    out.push((NilSymbol::v(0), vec![]));
    out.push((NilSymbol::v(1), vec![]));
    out.push((NilSymbol::v(2), vec![(NilSymbol::v(2), Rat::one())]));
    out.push((NilSymbol::v(3), vec![(NilSymbol::v(3), Rat::one())]));
    out
}

/// Build the reduced basis at `[1:0]` and verify it against the printed
/// substitution table and the defining relations.
pub fn ms_basis(family: &FamilyData) -> Result<MsBasis> {
    let d = family.d;
    let ctx = QuotientContext::d_s(d, Rat::one(), Rat::zero())?;
    for (sym, expected) in printed_basis_table(family) {
        let got = ctx.reduce_comb(&[(sym, Rat::one())]);
        if got != expected {
            return Err(Error::RelationFailure(format!(
                "substitution of {sym} is {}, table says {}",
                crate::context::fmt_comb(&got),
                crate::context::fmt_comb(&expected)
            )));
        }
    }
    for rel in crate::context::d_relations(d) {
        if !ctx.reduce_comb(&rel).is_empty() {
            return Err(Error::RelationFailure(format!(
                "defining relation {} survives",
                crate::context::fmt_comb(&rel)
            )));
        }
    }
    let symbols = ctx.reduced_basis().to_vec();
    if symbols.len() as u32 != d * d - d - 2 {
        return Err(Error::RelationFailure(format!(
            "basis has {} symbols, expected {}",
            symbols.len(),
            d * d - d - 2
        )));
    }
    Ok(MsBasis { d, ctx, symbols })
}

/// Step 2: the coefficient of each basis symbol in the nilpotent image of
/// the distinguished generator, a constant-coefficient bisection per row.
pub struct Step2 {
    pub rows: BTreeMap<NilSymbol, BiSection<Rat>>,
}

pub fn step2_coefficients(dg: &DGMap, ms: &MsBasis) -> Result<Step2> {
    let c_nil = dg.c_row_nilpotent().reduce_in(ms.context())?;
    let mut components = c_nil.nil_components();
    let mut rows = BTreeMap::new();
    let (sd, td) = c_nil.bidegree();
    for &sym in ms.symbols() {
        let row = components.remove(&sym).unwrap_or_else(|| {
            BiSection::zero(dg.ring().clone(), ms.context().clone(), sd, td)
        });
        rows.insert(sym, row);
    }
    if let Some((sym, _)) = components.into_iter().next() {
        return Err(Error::RelationFailure(format!(
            "image involves {sym}, which is not a basis symbol"
        )));
    }
    Ok(Step2 { rows })
}

/// Step 3: minus the inverse of the constant part, rowwise.
pub struct Step3 {
    pub rows: BTreeMap<NilSymbol, Section<Rat>>,
}

pub fn step3_preimages(inv: &DGInverse, step2: &Step2) -> Result<Step3> {
    let mut rows = BTreeMap::new();
    for (sym, row) in &step2.rows {
        rows.insert(*sym, inv.invert(&-row)?);
    }
    Ok(Step3 { rows })
}

/// The square derivative matrix over the parameter ring. Rows follow the
/// reduced basis, columns the kernel symbols `f_(i,j)` (lexicographic,
/// `i <= d-2`) then `g0`, `g1`; the common prefactor `1/S0` is factored
/// out and recorded.
pub struct DerivMatrix {
    pub d: u32,
    ring: Arc<ParamRing>,
    rows: Vec<NilSymbol>,
    cols: Vec<ModSymbol>,
    mat: Mat<ParamPoly<Rat>>,
    /// Power of `1/S0` normalized out of every entry.
    pub s0_normalization: u32,
}

impl DerivMatrix {
    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn rows(&self) -> &[NilSymbol] {
        &self.rows
    }

    pub fn cols(&self) -> &[ModSymbol] {
        &self.cols
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn matrix(&self) -> &Mat<ParamPoly<Rat>> {
        &self.mat
    }

    pub fn entry(&self, row: NilSymbol, col: ModSymbol) -> &ParamPoly<Rat> {
        let r = self.rows.iter().position(|&s| s == row).expect("row");
        let c = self.cols.iter().position(|&s| s == col).expect("col");
        self.mat.at(r, c)
    }

    /// Entries of one row that are not zero.
    pub fn row_support(&self, row: NilSymbol) -> Vec<(ModSymbol, ParamPoly<Rat>)> {
        let r = self.rows.iter().position(|&s| s == row).expect("row");
        self.cols
            .iter()
            .enumerate()
            .filter(|(c, _)| !self.mat.at(r, *c).is_zero())
            .map(|(c, &sym)| (sym, self.mat.at(r, c).clone()))
            .collect()
    }

    /// The matrix with one parameter substituted by a rational value.
    pub fn substituted(&self, name: &str, value: &Rat) -> Result<DerivMatrix> {
        let p = self.ring.param(name)?;
        Ok(DerivMatrix {
            d: self.d,
            ring: self.ring.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            mat: self.mat.map(|e| e.substitute(p, value)),
            s0_normalization: self.s0_normalization,
        })
    }
}

/// Steps 4 and 5: evaluate at the distinguished point (`S1 = 0` on the
/// `e`-coefficients) and rewrite through the fiber identification
/// `f -> S0 b`, `g -> S0^2 e`, factoring out `1/S0`.
pub fn dq_matrix(family: &FamilyData, ms: &MsBasis, step3: &Step3) -> Result<DerivMatrix> {
    let d = family.d as u8;
    let ring = family.ring.clone();
    let mut cols: Vec<ModSymbol> = Vec::new();
    for &(i, j) in family.index.full() {
        if i <= d - 2 {
            cols.push(ModSymbol::F(i, j));
        }
    }
    cols.push(ModSymbol::G0);
    cols.push(ModSymbol::G1);
    let col_pos: BTreeMap<ModSymbol, usize> =
        cols.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let rows: Vec<NilSymbol> = ms.symbols().to_vec();
    let mut mat = Mat::from_fn(rows.len(), cols.len(), |_, _| ParamPoly::zero(ring.clone()));

    for (r, row_sym) in rows.iter().enumerate() {
        let sec = &step3.rows[row_sym];
        for (sym, form) in sec.coeffs() {
            let scalar_at = |s0: u16, t0: u16| -> Result<ParamPoly<Rat>> {
                match form.coefficient(s0, t0) {
                    None => Ok(ParamPoly::zero(ring.clone())),
                    Some(a) => {
                        if a.nilpotent_terms().count() > 0 {
                            return Err(Error::Precondition(
                                "nilpotent coefficient in a step-3 row".into(),
                            ));
                        }
                        Ok(a.constant_part().clone())
                    }
                }
            };
            match sym {
                ModSymbol::B(i, j) => {
                    if *i > d - 2 {
                        return Err(Error::Precondition(format!(
                            "row {row_sym}: b_({i},{j}) has no kernel preimage"
                        )));
                    }
                    // degree-0 coefficient lifts through f_(i,j) -> S0 b_(i,j)
                    let c = scalar_at(0, 0)?;
                    let pos = col_pos[&ModSymbol::F(*i, *j)];
                    let e = mat.at(r, pos) + &c;
                    mat.set(r, pos, e);
                }
                ModSymbol::E0 | ModSymbol::E1 => {
                    // alpha*S0 survives the fiber evaluation; beta*S1 dies
                    let alpha = scalar_at(1, 0)?;
                    let target = if *sym == ModSymbol::E0 {
                        ModSymbol::G0
                    } else {
                        ModSymbol::G1
                    };
                    let pos = col_pos[&target];
                    let e = mat.at(r, pos) + &alpha;
                    mat.set(r, pos, e);
                }
                ModSymbol::C => {
                    return Err(Error::Precondition(format!(
                        "row {row_sym}: unexpected c-component"
                    )));
                }
                other => {
                    return Err(Error::Precondition(format!(
                        "row {row_sym}: unexpected component {other}"
                    )));
                }
            }
        }
    }
    if rows.len() != cols.len() {
        return Err(Error::Precondition(format!(
            "derivative matrix is {}x{}, expected square",
            rows.len(),
            cols.len()
        )));
    }
    Ok(DerivMatrix {
        d: family.d,
        ring,
        rows,
        cols,
        mat,
        s0_normalization: 1,
    })
}

/// Full pipeline to the derivative matrix.
pub fn derivative_pipeline(family: &FamilyData, dg: &DGMap, inv: &DGInverse) -> Result<(MsBasis, Step2, Step3, DerivMatrix)> {
    let ms = ms_basis(family)?;
    let s2 = step2_coefficients(dg, &ms)?;
    let s3 = step3_preimages(inv, &s2)?;
    let dq = dq_matrix(family, &ms, &s3)?;
    Ok((ms, s2, s3, dq))
}

#[derive(Debug, Clone, ThisError)]
pub enum CertifyError {
    #[error("derivative matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("determinant is identically zero: {diagnostics}")]
    ZeroDeterminant { diagnostics: String },
    #[error("specialization round {round} disagrees with the symbolic result: {detail}")]
    SpecializationMismatch { round: usize, detail: String },
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub seed: u64,
    pub specialization_rounds: usize,
    /// Maximum number of expanded determinant terms; beyond it the
    /// certificate keeps only the factored form.
    pub expansion_budget: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            seed: 0,
            specialization_rounds: 24,
            expansion_budget: Some(1_000_000),
        }
    }
}

/// Evidence from randomized prime-field checks.
#[derive(Clone, Debug)]
pub struct SpecializationEvidence {
    pub prime: u64,
    pub seed: u64,
    pub rounds: usize,
    pub full_rank_rounds: usize,
    pub determinant_agreements: usize,
}

/// A certificate that the derivative matrix is generically invertible.
pub struct GenericityCertificate {
    pub d: u32,
    pub size: usize,
    ring: Arc<ParamRing>,
    /// Expanded determinant, when within the expansion budget.
    pub determinant: Option<ParamPoly<Rat>>,
    /// Exact determinant in factored form: `sign * product(factors)`.
    pub det_sign: i8,
    pub det_factors: Vec<ParamPoly<Rat>>,
    /// Monic polynomials whose joint nonvanishing implies invertibility.
    pub conditions: Vec<ParamPoly<Rat>>,
    /// A concrete integer assignment with nonzero determinant.
    pub witness: Assignment<Rat>,
    pub evidence: SpecializationEvidence,
}

impl GenericityCertificate {
    /// Names of the conditions, canonically rendered.
    pub fn condition_names(&self) -> Vec<String> {
        self.conditions.iter().map(|c| c.to_string()).collect()
    }

    /// Check an assignment against the conditions; vanishing conditions are
    /// returned by name. Parameters the assignment does not fix are taken
    /// symbolic and never vanish.
    pub fn violated_conditions(&self, asn: &Assignment<Rat>) -> Result<Vec<String>> {
        let mut violated = Vec::new();
        for cond in &self.conditions {
            let mut value = cond.clone();
            for p in cond.support() {
                if let Some(v) = asn.get(p) {
                    value = value.substitute(p, v);
                }
            }
            if value.is_zero() {
                violated.push(cond.to_string());
            }
        }
        Ok(violated)
    }

    pub fn witness_pairs(&self) -> Vec<(String, Rat)> {
        self.ring
            .params()
            .filter_map(|p| {
                self.witness
                    .get(p)
                    .map(|v| (self.ring.name(p).to_string(), v.clone()))
            })
            .collect()
    }
}

/// Certify surjectivity by an exact determinant over the parameter ring,
/// cross-checked by seeded prime-field specializations.
pub fn certify_surjective(
    dq: &DerivMatrix,
    opts: CertifyOptions,
) -> std::result::Result<GenericityCertificate, CertifyError> {
    let mat = dq.matrix();
    if !mat.is_square() {
        return Err(CertifyError::NotSquare {
            rows: mat.rows(),
            cols: mat.cols(),
        });
    }
    let ring = dq.ring().clone();
    let n = mat.rows();

    let (sign, factors) = block_det(mat);
    if sign == 0 {
        return Err(CertifyError::ZeroDeterminant {
            diagnostics: zero_det_diagnostics(dq),
        });
    }

    // expand within budget
    let mut determinant = Some(ParamPoly::<Rat>::one(ring.clone()));
    for f in &factors {
        determinant = match determinant {
            None => None,
            Some(acc) => {
                let next = &acc * f;
                match opts.expansion_budget {
                    Some(b) if next.num_terms() > b => None,
                    _ => Some(next),
                }
            }
        };
    }
    if sign < 0 {
        determinant = determinant.map(|p| -&p);
    }

    // sufficient nonvanishing conditions from the factors
    let mut conditions: Vec<ParamPoly<Rat>> = Vec::new();
    for f in &factors {
        for cond in sufficient_factors(f) {
            if cond.num_terms() > 0 && !conditions.contains(&cond) {
                conditions.push(cond);
            }
        }
    }
    conditions.sort_by_key(|c| c.to_string());

    // witness: distinct small integers, randomized retries if ever needed
    let witness = find_witness(&ring, &factors, opts.seed)
        .ok_or_else(|| CertifyError::Other("no witness assignment found".into()))?;

    // seeded prime-field cross-checks; the field images of the matrix,
    // the factors and the expanded determinant are built once
    let mat_fp = mat.map(|e| e.to_fp::<SPECIALIZATION_PRIME>());
    let factors_fp: Vec<_> = factors
        .iter()
        .map(|f| f.to_fp::<SPECIALIZATION_PRIME>())
        .collect();
    let det_fp = determinant
        .as_ref()
        .map(|d| d.to_fp::<SPECIALIZATION_PRIME>());
    let mut full_rank_rounds = 0usize;
    let mut determinant_agreements = 0usize;
    for round in 0..opts.specialization_rounds {
        let asn: Assignment<Fp62> =
            random_assignment::<SPECIALIZATION_PRIME>(ring.clone(), opts.seed ^ (round as u64));
        let spec = mat_fp.map(|e| e.evaluate(&asn).expect("total assignment"));
        let out = ff_rank_det(&spec);
        if out.rank == n {
            full_rank_rounds += 1;
        }
        let spec_det = out.det.expect("square");
        // the symbolic determinant must specialize to the field determinant
        let mut sym_det = Fp62::from_i64(i64::from(sign));
        for f in &factors_fp {
            sym_det = sym_det * f.evaluate(&asn).expect("total assignment");
        }
        if sym_det == spec_det {
            determinant_agreements += 1;
        } else {
            return Err(CertifyError::SpecializationMismatch {
                round,
                detail: format!("factored {sym_det} vs eliminated {spec_det}"),
            });
        }
        if let Some(det) = &det_fp {
            let v = det.evaluate(&asn).expect("total assignment");
            if v != spec_det {
                return Err(CertifyError::SpecializationMismatch {
                    round,
                    detail: format!("expanded {v} vs eliminated {spec_det}"),
                });
            }
        }
    }

    Ok(GenericityCertificate {
        d: dq.d,
        size: n,
        ring,
        determinant,
        det_sign: sign,
        det_factors: factors,
        conditions,
        witness,
        evidence: SpecializationEvidence {
            prime: SPECIALIZATION_PRIME,
            seed: opts.seed,
            rounds: opts.specialization_rounds,
            full_rank_rounds,
            determinant_agreements,
        },
    })
}

fn zero_det_diagnostics(dq: &DerivMatrix) -> String {
    let mat = dq.matrix();
    for (r, sym) in dq.rows().iter().enumerate() {
        if (0..mat.cols()).all(|c| mat.at(r, c).is_zero()) {
            return format!("row {sym} is zero");
        }
    }
    for (c, sym) in dq.cols().iter().enumerate() {
        if (0..mat.rows()).all(|r| mat.at(r, c).is_zero()) {
            return format!("column {sym} is zero");
        }
    }
    "matrix is structurally or numerically singular".into()
}

/// Split a factor into sufficient nonvanishing conditions: strip exact
/// linear divisors (single parameters and pairwise differences), then keep
/// any non-constant cofactor verbatim.
pub fn sufficient_factors(f: &ParamPoly<Rat>) -> Vec<ParamPoly<Rat>> {
    let ring = f.ring().clone();
    let mut out = Vec::new();
    let (_, mut rest) = f.make_monic();
    let mut candidates: Vec<ParamPoly<Rat>> = Vec::new();
    let support = rest.support();
    for &p in &support {
        candidates.push(ParamPoly::param(ring.clone(), p));
    }
    for (a_idx, &p) in support.iter().enumerate() {
        for &q in &support[a_idx + 1..] {
            candidates.push(&ParamPoly::param(ring.clone(), p) - &ParamPoly::param(ring.clone(), q));
        }
    }
    for cand in candidates {
        loop {
            if rest.total_degree() == 0 {
                break;
            }
            match rest.exact_div(&cand) {
                Ok(q) => {
                    if !out.contains(&cand) {
                        out.push(cand.clone());
                    }
                    rest = q;
                }
                Err(_) => break,
            }
        }
    }
    if rest.total_degree() > 0 {
        let (_, monic) = rest.make_monic();
        out.push(monic);
    }
    out
}

fn find_witness(
    ring: &Arc<ParamRing>,
    factors: &[ParamPoly<Rat>],
    seed: u64,
) -> Option<Assignment<Rat>> {
    let nonzero_at = |asn: &Assignment<Rat>| -> bool {
        factors
            .iter()
            .all(|f| !f.evaluate(asn).map(|v| v.is_zero()).unwrap_or(true))
    };
    let canonical = Assignment::from_fn(ring.clone(), |k| Rat::from_i64(k as i64 + 1));
    if nonzero_at(&canonical) {
        return Some(canonical);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..256 {
        let asn = Assignment::from_fn(ring.clone(), |_| Rat::from_i64(rng.gen_range(1..=1 << 20)));
        if nonzero_at(&asn) {
            return Some(asn);
        }
    }
    None
}

/// Rank bookkeeping for the cone extension to ambient dimension
/// `n' >= d^2`: the pulled-back vertical tangent bundle gains `n' - d^2`
/// line-bundle summands of twist one, and the quotients the derivative
/// must span have the same dimension on both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeExtension {
    pub d: u32,
    pub n: u32,
    pub n_prime: u32,
    pub extra_summands: u32,
    pub rank_base: u32,
    pub rank_extended: u32,
    pub twist_block_base: u32,
    pub twist_block_extended: u32,
    pub quotient_dim_base: u32,
    pub quotient_dim_extended: u32,
    pub quotient_dims_match: bool,
    pub spanning_transfers: bool,
}

pub fn extend_to_n(d: u32, n_prime: u32) -> Result<ConeExtension> {
    if d < 3 {
        return Err(Error::DegreeTooSmall(d));
    }
    let n = d * d;
    if n_prime < n {
        return Err(Error::Precondition(format!(
            "n' = {n_prime} is below d^2 = {n}; no twisting family exists there"
        )));
    }
    let extra = n_prime - n;
    let rank_base = d * d - d - 1;
    let rank_extended = rank_base + extra;
    let twist_block_base = n + 1 - d * d; // = 1
    let twist_block_extended = n_prime + 1 - d * d;
    let quotient_dim_base = rank_base - twist_block_base;
    let quotient_dim_extended = rank_extended - twist_block_extended;
    let quotient_dims_match = quotient_dim_base == quotient_dim_extended;
    Ok(ConeExtension {
        d,
        n,
        n_prime,
        extra_summands: extra,
        rank_base,
        rank_extended,
        twist_block_base,
        twist_block_extended,
        quotient_dim_base,
        quotient_dim_extended,
        quotient_dims_match,
        spanning_transfers: quotient_dims_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::bareiss_dense;
    use crate::normal_bundle::{build_dg, check_dg_surjective};

    fn pipeline(d: u32) -> (FamilyData, DGMap, DGInverse, MsBasis, Step2, Step3, DerivMatrix) {
        let family = FamilyData::new(d).unwrap();
        let dg = build_dg(&family, &family.ctx_d.clone()).unwrap();
        let (_, inv) = check_dg_surjective(&dg).unwrap();
        let (ms, s2, s3, dq) = derivative_pipeline(&family, &dg, &inv).unwrap();
        (family, dg, inv, ms, s2, s3, dq)
    }

    fn poly_c1a(ring: &Arc<ParamRing>) -> ParamPoly<Rat> {
        ParamPoly::param(ring.clone(), ring.c_1a())
    }

    #[test]
    fn basis_for_d3() {
        let family = FamilyData::new(3).unwrap();
        let ms = ms_basis(&family).unwrap();
        assert_eq!(
            ms.symbols(),
            &[
                NilSymbol::w(2, 1),
                NilSymbol::w(2, 2),
                NilSymbol::v(2),
                NilSymbol::v(3)
            ]
        );
    }

    #[test]
    fn basis_sizes_over_a_range() {
        for d in 3..=10u32 {
            let family = FamilyData::new(d).unwrap();
            let ms = ms_basis(&family).unwrap();
            assert_eq!(ms.len() as u32, d * d - d - 2, "d={d}");
        }
    }

    #[test]
    fn pipeline_identity_rowwise() {
        // the constant map applied to minus the step-3 preimage returns the
        // step-2 coefficient, for every basis symbol
        for d in [3u32, 4] {
            let (_f, dg, _inv, ms, s2, s3, _dq) = pipeline(d);
            let dg0 = dg.constant_map().reduce_in(ms.context()).unwrap();
            for (sym, sec) in &s3.rows {
                let image = dg0.apply(&sec.negate()).unwrap();
                let bis = dg.section_to_bisection(&image).unwrap();
                let bis = bis.reduce_in(ms.context()).unwrap();
                assert_eq!(&bis, &s2.rows[sym], "d={d} row {sym}");
            }
        }
    }

    #[test]
    fn matrix_is_square_of_expected_size() {
        for d in [3u32, 4, 5] {
            let (.., dq) = pipeline(d);
            assert_eq!(dq.size() as u32, d * d - d - 2, "d={d}");
            assert_eq!(dq.rows().len(), dq.cols().len());
        }
    }

    #[test]
    fn d3_matrix_matches_the_frozen_oracle() {
        // Rows and entries frozen from the independent symbolic oracle.
        let (family, _dg, _inv, _ms, _s2, _s3, dq) = pipeline(3);
        let ring = &family.ring;
        let c = |name: &str| ParamPoly::<Rat>::param(ring.clone(), ring.param(name).unwrap());
        let z = ParamPoly::<Rat>::zero(ring.clone());
        let two = ParamPoly::<Rat>::int(ring.clone(), 2);
        // row w_(2,1): -C_1a * g0 only
        assert_eq!(dq.entry(NilSymbol::w(2, 1), ModSymbol::G0), &-&c("C_1a"));
        assert_eq!(dq.entry(NilSymbol::w(2, 1), ModSymbol::G1), &z);
        assert_eq!(dq.entry(NilSymbol::w(2, 1), ModSymbol::F(0, 2)), &z);
        assert_eq!(dq.entry(NilSymbol::w(2, 1), ModSymbol::F(1, 2)), &z);
        // row w_(2,2): (-C_2, -C_1a, C_1b, 0) on (g0, g1, f_(0,2), f_(1,2))
        assert_eq!(dq.entry(NilSymbol::w(2, 2), ModSymbol::G0), &-&c("C_2"));
        assert_eq!(dq.entry(NilSymbol::w(2, 2), ModSymbol::G1), &-&c("C_1a"));
        assert_eq!(dq.entry(NilSymbol::w(2, 2), ModSymbol::F(0, 2)), &c("C_1b"));
        assert_eq!(dq.entry(NilSymbol::w(2, 2), ModSymbol::F(1, 2)), &z);
        // row v^2: 2*(0, C_zb, 0, -C_za)
        assert_eq!(dq.entry(NilSymbol::v(2), ModSymbol::G0), &z);
        assert_eq!(dq.entry(NilSymbol::v(2), ModSymbol::G1), &(&two * &c("C_zb")));
        assert_eq!(
            dq.entry(NilSymbol::v(2), ModSymbol::F(1, 2)),
            &-&(&two * &c("C_za"))
        );
        // row v^3: 2*(-C_zb, C_za, 0, 0)
        assert_eq!(dq.entry(NilSymbol::v(3), ModSymbol::G0), &-&(&two * &c("C_zb")));
        assert_eq!(dq.entry(NilSymbol::v(3), ModSymbol::G1), &(&two * &c("C_za")));
    }

    #[test]
    fn triangular_row_content() {
        // rows w_(i,j) with i <= d-2 are supported on the single column f_(i,j)
        for d in [4u32, 5] {
            let (family, _dg, _inv, ms, _s2, _s3, dq) = pipeline(d);
            for &sym in ms.symbols() {
                if let NilSymbol::W { i, j } = sym {
                    if u32::from(i) <= d - 2 {
                        let support = dq.row_support(sym);
                        assert_eq!(support.len(), 1, "d={d} row {sym}");
                        assert_eq!(support[0].0, ModSymbol::F(i, j));
                    }
                }
            }
            let _ = family;
        }
    }

    #[test]
    fn d3_determinant_is_the_frozen_value() {
        let (family, .., dq) = pipeline(3);
        let ring = &family.ring;
        let out = ff_rank_det(dq.matrix());
        assert_eq!(out.rank, 4);
        let det = out.det.unwrap();
        // +- 4 * C_1a * C_1b * C_za^2
        let expect = &(&(&ParamPoly::int(ring.clone(), 4) * &poly_c1a(ring))
            * &ParamPoly::param(ring.clone(), ring.c_1b()))
            * &ParamPoly::param(ring.clone(), ring.c_za()).pow(2);
        assert!(det == expect || det == -&expect, "det = {det}");
        // dense elimination agrees
        let dense = bareiss_dense(dq.matrix()).det.unwrap();
        assert_eq!(dense, det);
    }

    #[test]
    fn certificate_for_small_degrees() {
        for d in [3u32, 4, 5] {
            let (.., dq) = pipeline(d);
            let cert = certify_surjective(&dq, CertifyOptions::default()).unwrap();
            assert!(cert.determinant.is_some(), "d={d}");
            assert!(!cert.determinant.as_ref().unwrap().is_zero());
            assert_eq!(cert.evidence.rounds, cert.evidence.determinant_agreements);
            assert_eq!(cert.evidence.rounds, cert.evidence.full_rank_rounds);
            // witness evaluates every factor away from zero
            let violated = cert.violated_conditions(&cert.witness).unwrap();
            assert!(violated.is_empty(), "d={d}: {violated:?}");
        }
    }

    #[test]
    fn d3_conditions_and_witness() {
        let (family, .., dq) = pipeline(3);
        let cert = certify_surjective(&dq, CertifyOptions::default()).unwrap();
        let names = cert.condition_names();
        assert_eq!(names, vec!["C_1a", "C_1b", "C_za"]);
        // all-ones witness works at d = 3
        let ring = &family.ring;
        let ones = Assignment::from_fn(ring.clone(), |_| Rat::one());
        assert!(cert.violated_conditions(&ones).unwrap().is_empty());
        let det_at_ones = cert.determinant.as_ref().unwrap().evaluate(&ones).unwrap();
        assert!(!det_at_ones.is_zero());
    }

    #[test]
    fn tampered_matrix_is_refused_and_the_condition_is_named() {
        let (.., dq) = pipeline(3);
        let cert = certify_surjective(&dq, CertifyOptions::default()).unwrap();
        assert!(cert.condition_names().contains(&"C_1a".to_string()));
        // zeroing C_1a kills the first row; certification must refuse
        let tampered = dq.substituted("C_1a", &Rat::zero()).unwrap();
        match certify_surjective(&tampered, CertifyOptions::default()) {
            Err(CertifyError::ZeroDeterminant { diagnostics }) => {
                assert!(diagnostics.contains("w_(2,1)"), "{diagnostics}");
            }
            other => panic!("expected refusal, got {:?}", other.is_ok()),
        }
        // and an assignment with C_1a = 0 violates exactly that condition
        let mut asn = Assignment::empty(cert.ring.clone());
        asn.set_by_name("C_1a", Rat::zero()).unwrap();
        let violated = cert.violated_conditions(&asn).unwrap();
        assert_eq!(violated, vec!["C_1a".to_string()]);
    }

    #[test]
    fn specializations_avoiding_the_conditions_are_invertible() {
        use rand::{Rng, SeedableRng};
        for d in [3u32, 4] {
            let (.., dq) = pipeline(d);
            let cert = certify_surjective(&dq, CertifyOptions::default()).unwrap();
            let ring = dq.ring().clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(u64::from(d));
            let mut accepted = 0;
            while accepted < 5 {
                let asn = Assignment::from_fn(ring.clone(), |_| {
                    Rat::from_i64(rng.gen_range(-6..=6))
                });
                if !cert.violated_conditions(&asn).unwrap().is_empty() {
                    continue;
                }
                accepted += 1;
                let spec = dq.matrix().map(|e| e.evaluate(&asn).unwrap());
                let out = ff_rank_det(&spec);
                assert_eq!(out.rank, dq.size(), "d={d}");
                assert!(!out.det.unwrap().is_zero());
            }
        }
    }

    #[test]
    fn cone_extension_bookkeeping() {
        // identity extension
        let e = extend_to_n(3, 9).unwrap();
        assert_eq!(e.extra_summands, 0);
        assert!(e.quotient_dims_match && e.spanning_transfers);
        // three extra summands at n' = 12
        let e = extend_to_n(3, 12).unwrap();
        assert_eq!(e.extra_summands, 3);
        assert_eq!(e.rank_extended, e.rank_base + 3);
        assert_eq!(e.quotient_dim_base, 4);
        assert_eq!(e.quotient_dim_extended, 4);
        assert!(e.spanning_transfers);
        // below the threshold is rejected
        assert!(extend_to_n(3, 8).is_err());
    }
}
