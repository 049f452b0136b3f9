//! The normal-bundle map of the thickened family: its rows, the
//! constant/nilpotent split, surjectivity of the constant part as a signed
//! permutation on twisted global sections, the inverse of that permutation,
//! and a kernel basis with its canonical nilpotent corrections.

use crate::artin::ArtinElement;
use crate::bigraded::BiSection;
use crate::context::QuotientContext;
use crate::error::{Error, Result};
use crate::family::FamilyData;
use crate::linalg::{bareiss_dense, Mat};
use crate::modules::{ModSymbol, ModuleMap, Section, TwistedFreeModule};
use crate::nil::NilSymbol;
use crate::params::ParamRing;
use crate::scalar::{Rat, Scalar};
use crate::splitting::{splitting_from_h0, SplittingType};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Basis `(e0, e1, b_(i,j), c)` with twists `(2, 2, 1, 1)`.
pub fn tev_module(family: &FamilyData) -> Arc<TwistedFreeModule> {
    let mut symbols = vec![(ModSymbol::E0, 2), (ModSymbol::E1, 2)];
    for &(i, j) in family.index.full() {
        symbols.push((ModSymbol::B(i, j), 1));
    }
    symbols.push((ModSymbol::C, 1));
    TwistedFreeModule::new(symbols)
}

/// Target basis `T0^j T1^(d-1-j)` with twist `d`.
pub fn slots_module(d: u32) -> Arc<TwistedFreeModule> {
    TwistedFreeModule::new((0..d as u8).map(|j| (ModSymbol::Slot(j), d as i32)).collect())
}

/// Kernel basis `(f_(i,j) for i <= d-2, g0, g1, h)` with twists `(0,0,0,1)`.
pub fn kernel_module(family: &FamilyData) -> Arc<TwistedFreeModule> {
    let d = family.d as u8;
    let mut symbols = Vec::new();
    for &(i, j) in family.index.full() {
        if i <= d - 2 {
            symbols.push((ModSymbol::F(i, j), 0));
        }
    }
    symbols.push((ModSymbol::G0, 0));
    symbols.push((ModSymbol::G1, 0));
    symbols.push((ModSymbol::H, 1));
    TwistedFreeModule::new(symbols)
}

/// The assembled map with both its row and its column views.
pub struct DGMap {
    pub d: u32,
    ring: Arc<ParamRing>,
    ctx: Arc<QuotientContext>,
    source: Arc<TwistedFreeModule>,
    target: Arc<TwistedFreeModule>,
    /// Full rows, bidegree `(d - twist, d-1)`, Artin coefficients.
    rows: BTreeMap<ModSymbol, BiSection<Rat>>,
    /// Pulled-back coordinate derivative rows (used by the table checks).
    a_rows: Vec<BiSection<Rat>>,
}

impl DGMap {
    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn context(&self) -> &Arc<QuotientContext> {
        &self.ctx
    }

    pub fn source(&self) -> &Arc<TwistedFreeModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TwistedFreeModule> {
        &self.target
    }

    pub fn row(&self, sym: ModSymbol) -> &BiSection<Rat> {
        &self.rows[&sym]
    }

    /// The pulled-back derivative row of coordinate `l` (full, uncorrected).
    pub fn a_row(&self, l: usize) -> &BiSection<Rat> {
        &self.a_rows[l]
    }

    pub fn row_constant(&self, sym: ModSymbol) -> BiSection<Rat> {
        self.rows[&sym].constant_part()
    }

    pub fn row_nilpotent(&self, sym: ModSymbol) -> BiSection<Rat> {
        self.rows[&sym].nilpotent_part()
    }

    /// The nilpotent part of the `c` row, the only nilpotent row the
    /// derivative pipeline consumes.
    pub fn c_row_nilpotent(&self) -> BiSection<Rat> {
        self.row_nilpotent(ModSymbol::C)
    }

    /// Column view: image of a source symbol as a target section.
    fn column(&self, sym: ModSymbol, constant_only: bool) -> Section<Rat> {
        let t = self.source.twist(sym).unwrap();
        let row = if constant_only {
            self.rows[&sym].constant_part()
        } else {
            self.rows[&sym].clone()
        };
        let mut col = Section::zero(self.target.clone(), -t);
        for (j, slice) in row.t_slices().into_iter().enumerate() {
            col.set_coeff(ModSymbol::Slot(j as u8), slice)
                .expect("slice degree");
        }
        col
    }

    /// The full map as a module map (for compositions).
    pub fn as_map(&self) -> ModuleMap<Rat> {
        let mut map = ModuleMap::zero(
            self.source.clone(),
            self.target.clone(),
            self.ring.clone(),
            self.ctx.clone(),
        );
        for &(sym, _) in self.source.symbols() {
            map.set_column(sym, self.column(sym, false)).unwrap();
        }
        map
    }

    /// The constant part as a module map.
    pub fn constant_map(&self) -> ModuleMap<Rat> {
        let mut map = ModuleMap::zero(
            self.source.clone(),
            self.target.clone(),
            self.ring.clone(),
            self.ctx.clone(),
        );
        for &(sym, _) in self.source.symbols() {
            map.set_column(sym, self.column(sym, true)).unwrap();
        }
        map
    }

    /// Apply the full map to a source section and flatten to a bisection.
    pub fn apply_to_bisection(&self, sec: &Section<Rat>) -> Result<BiSection<Rat>> {
        let out = self.as_map().apply(sec)?;
        self.section_to_bisection(&out)
    }

    /// Flatten a target section into a bisection of T-degree `d-1`.
    pub fn section_to_bisection(&self, sec: &Section<Rat>) -> Result<BiSection<Rat>> {
        let d = self.d;
        let s_deg = sec.twist() + d as i32;
        if s_deg < 0 {
            return Err(Error::Precondition("section twist too negative".into()));
        }
        let slices: Vec<BiSection<Rat>> = (0..d as u8)
            .map(|j| {
                sec.coeff(ModSymbol::Slot(j))
                    .cloned()
                    .unwrap_or_else(|| {
                        BiSection::zero(self.ring.clone(), self.ctx.clone(), s_deg as u16, 0)
                    })
            })
            .collect();
        Ok(BiSection::from_t_slices(
            self.ring.clone(),
            self.ctx.clone(),
            s_deg as u16,
            (d - 1) as u16,
            &slices,
        ))
    }
}

/// Build the full map in the given context. The coordinate rows are the
/// pulled-back partial derivatives; the `e`-rows are forced by the two
/// tangent relations once each coordinate row is corrected by the Artin
/// twist of the fiber embedding (`a_l` maps to its cokernel image minus
/// `sum u^l b` and `v^l c`), and both derivations must agree.
pub fn build_dg(family: &FamilyData, ctx: &Arc<QuotientContext>) -> Result<DGMap> {
    let d = family.d;
    let ring = family.ring.clone();
    let source = tev_module(family);
    let target = slots_module(d);
    let mut rows: BTreeMap<ModSymbol, BiSection<Rat>> = BTreeMap::new();

    // b rows: partial derivatives in the Y coordinates
    for &(i, j) in family.index.full() {
        let row = family.pullback(&family.g.partial_y(i, j), ctx)?;
        let cpart = row.constant_part();
        let expect = BiSection::monomial(
            (d - 1) as u16,
            (d - 1) as u16,
            i as u16,
            j as u16,
            ArtinElement::one(ring.clone(), ctx.clone()),
        );
        if cpart != expect {
            return Err(Error::InconsistentRow {
                symbol: format!("b_({i},{j})"),
                details: "constant part is not the expected monomial".into(),
            });
        }
        rows.insert(ModSymbol::B(i, j), row);
    }

    // c row: the Z partial, purely nilpotent
    let c_row = family.pullback(&family.g.partial_z(), ctx)?;
    if !c_row.constant_part().is_zero() {
        return Err(Error::InconsistentRow {
            symbol: "c".into(),
            details: "constant part must vanish".into(),
        });
    }
    rows.insert(ModSymbol::C, c_row);

    // coordinate rows and their corrections
    let mut a_rows = Vec::with_capacity(4);
    for l in 0..4 {
        a_rows.push(family.pullback(&family.g.partial_x(l), ctx)?);
    }
    let corrected = |l: usize| -> Result<BiSection<Rat>> {
        let mut acc = a_rows[l].clone();
        for &(i, j) in family.index.full() {
            let u = ArtinElement::from_symbol(ring.clone(), ctx.clone(), NilSymbol::u(i, j, l as u8))?;
            let b_const = rows[&ModSymbol::B(i, j)].constant_part();
            acc = acc.checked_add(&b_const.scale_artin(&u))?;
        }
        // the `v^l c` correction dies against the nilpotent c row
        acc.reduce_in(ctx)
    };
    let e0 = corrected(0)?.divide_s1().map_err(|e| Error::InconsistentRow {
        symbol: "e0".into(),
        details: e.to_string(),
    })?;
    let e0_alt = -&corrected(2)?.divide_s0().map_err(|e| Error::InconsistentRow {
        symbol: "e0".into(),
        details: e.to_string(),
    })?;
    if e0 != e0_alt {
        return Err(Error::InconsistentRow {
            symbol: "e0".into(),
            details: "derivations from a0 and a2 disagree".into(),
        });
    }
    let e1 = corrected(1)?.divide_s1().map_err(|e| Error::InconsistentRow {
        symbol: "e1".into(),
        details: e.to_string(),
    })?;
    let e1_alt = -&corrected(3)?.divide_s0().map_err(|e| Error::InconsistentRow {
        symbol: "e1".into(),
        details: e.to_string(),
    })?;
    if e1 != e1_alt {
        return Err(Error::InconsistentRow {
            symbol: "e1".into(),
            details: "derivations from a1 and a3 disagree".into(),
        });
    }
    rows.insert(ModSymbol::E0, e0);
    rows.insert(ModSymbol::E1, e1);

    Ok(DGMap {
        d,
        ring,
        ctx: ctx.clone(),
        source,
        target,
        rows,
        a_rows,
    })
}

/// One entry of the signed permutation: which domain element covers a
/// target monomial, with which sign and which extra `S` factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PermEntry {
    pub sign: i8,
    pub symbol: ModSymbol,
    /// Extra `(S0, S1)` exponents making up the domain element, e.g.
    /// `S0 * e1` carries `(1, 0)`.
    pub s_extra: (u16, u16),
}

/// The verified signed-permutation structure of the constant part on
/// twisted global sections.
pub struct DGInverse {
    d: u32,
    source: Arc<TwistedFreeModule>,
    /// For each target monomial `(i, j)`, its unique preimage.
    table: BTreeMap<(u16, u16), PermEntry>,
}

#[derive(Debug)]
pub struct PermReport {
    pub d: u32,
    pub size: usize,
    pub is_signed_permutation: bool,
    /// Indices covered by the four `e`-products.
    pub e_covered: Vec<(u16, u16)>,
    pub failures: Vec<String>,
}

/// Check that the constant part, twisted down once, is a signed permutation
/// of global-section bases, and derive the inverse table from the matrix.
pub fn check_dg_surjective(dg: &DGMap) -> Result<(PermReport, DGInverse)> {
    let d = dg.d;
    // domain: b_(i,j) plus S0 e0, S1 e0, S0 e1, S1 e1
    let mut domain: Vec<(ModSymbol, (u16, u16))> = Vec::new();
    for &(sym, _) in dg.source().symbols() {
        if let ModSymbol::B(_, _) = sym {
            domain.push((sym, (0, 0)));
        }
    }
    domain.push((ModSymbol::E0, (1, 0)));
    domain.push((ModSymbol::E0, (0, 1)));
    domain.push((ModSymbol::E1, (1, 0)));
    domain.push((ModSymbol::E1, (0, 1)));
    if domain.len() != (d * d) as usize {
        return Err(Error::NotSignedPermutation(format!(
            "domain has {} elements, expected {}",
            domain.len(),
            d * d
        )));
    }

    let mut table: BTreeMap<(u16, u16), PermEntry> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut e_covered = Vec::new();
    let mut col_hits = vec![0usize; domain.len()];
    for (k, (sym, (p, q))) in domain.iter().enumerate() {
        let image = dg.row_constant(*sym).mul_s_monomial(*p, *q);
        for (key, coeff) in image.terms() {
            let c = coeff
                .constant_part()
                .as_constant()
                .ok_or_else(|| Error::NotSignedPermutation("nonconstant entry".into()))?;
            if c.is_zero() {
                continue;
            }
            let sign = if c == Rat::from_i64(1) {
                1i8
            } else if c == Rat::from_i64(-1) {
                -1
            } else {
                failures.push(format!("entry at {key:?} is {c}, not a unit"));
                continue;
            };
            if table
                .insert(
                    *key,
                    PermEntry {
                        sign,
                        symbol: *sym,
                        s_extra: (*p, *q),
                    },
                )
                .is_some()
            {
                failures.push(format!("target monomial {key:?} hit twice"));
            }
            col_hits[k] += 1;
            if matches!(sym, ModSymbol::E0 | ModSymbol::E1) {
                e_covered.push(*key);
            }
        }
    }
    for (k, hits) in col_hits.iter().enumerate() {
        if *hits != 1 {
            failures.push(format!(
                "domain element {:?} covers {hits} monomials",
                domain[k]
            ));
        }
    }
    if table.len() != (d * d) as usize {
        failures.push(format!(
            "only {} of {} target monomials covered",
            table.len(),
            d * d
        ));
    }
    // the four e-products must cover exactly the four excluded corners
    e_covered.sort_unstable();
    let corners = vec![(0u16, 0u16), (0, 1), (1, 0), (1, 1)];
    if e_covered != corners {
        failures.push(format!("e-products cover {e_covered:?}"));
    }
    let report = PermReport {
        d,
        size: (d * d) as usize,
        is_signed_permutation: failures.is_empty(),
        e_covered,
        failures,
    };
    if !report.is_signed_permutation {
        return Err(Error::NotSignedPermutation(report.failures.join("; ")));
    }
    let inverse = DGInverse {
        d,
        source: dg.source().clone(),
        table,
    };
    Ok((report, inverse))
}

impl DGInverse {
    /// Invert the constant part on a target bisection of T-degree `d-1`
    /// and S-degree at least `d-1`: excess `S`-degree is stripped greedily
    /// (`S0` first) and multiplied back onto the preimage.
    pub fn invert(&self, target: &BiSection<Rat>) -> Result<Section<Rat>> {
        let (s_deg, t_deg) = target.bidegree();
        let d = self.d as u16;
        if t_deg != d - 1 || s_deg < d - 1 {
            return Err(Error::NotInvertible(format!(
                "bidegree ({s_deg},{t_deg}) is outside the invertible range"
            )));
        }
        let excess = s_deg - (d - 1);
        // A target of S-degree (d-1) + excess is the image of a source
        // section of twist excess - 1: the coefficient of a twist-t symbol
        // then has S-degree excess + t - 1.
        let twist = i32::from(excess) - 1;
        let mut out = Section::zero(self.source.clone(), twist);
        for (key, coeff) in target.terms() {
            let (s0, t0) = *key;
            let strip_s0 = s0.min(excess);
            let strip_s1 = excess - strip_s0;
            let base = (s0 - strip_s0, t0);
            let entry = self
                .table
                .get(&base)
                .ok_or_else(|| Error::NotInvertible(format!("monomial {base:?}")))?;
            let total_s0 = strip_s0 + entry.s_extra.0;
            let total_s1 = strip_s1 + entry.s_extra.1;
            let t = self
                .source
                .twist(entry.symbol)
                .expect("symbol in source module");
            let deg = twist + t;
            debug_assert_eq!(deg as u16, total_s0 + total_s1);
            let mut c = coeff.clone();
            if entry.sign < 0 {
                c = -&c;
            }
            let mono = BiSection::monomial(deg as u16, 0, total_s0, 0, c);
            out.add_coeff(entry.symbol, mono)?;
        }
        Ok(out)
    }
}

/// A kernel basis: constant parts as in the displayed kernel, plus the
/// canonical nilpotent corrections obtained by inverting the constant part
/// on the nilpotent images.
pub struct KernelBasis {
    pub d: u32,
    iota: ModuleMap<Rat>,
    kernel: Arc<TwistedFreeModule>,
    h_m: Section<Rat>,
}

impl KernelBasis {
    pub fn iota(&self) -> &ModuleMap<Rat> {
        &self.iota
    }

    pub fn kernel_module(&self) -> &Arc<TwistedFreeModule> {
        &self.kernel
    }

    /// The canonical nilpotent correction of the distinguished generator,
    /// a section of the source twisted down once.
    pub fn h_m(&self) -> &Section<Rat> {
        &self.h_m
    }
}

pub fn kernel_basis(family: &FamilyData, dg: &DGMap, inv: &DGInverse) -> Result<KernelBasis> {
    let d = family.d as u8;
    let ring = dg.ring().clone();
    let ctx = dg.context().clone();
    let kernel = kernel_module(family);
    let tev = dg.source().clone();
    let mut iota = ModuleMap::zero(kernel.clone(), tev.clone(), ring.clone(), ctx.clone());

    let one = ArtinElement::one(ring.clone(), ctx.clone());
    let s0 = BiSection::monomial(1, 0, 1, 0, one.clone());
    let s1 = BiSection::monomial(1, 0, 0, 0, one.clone());
    let s0_sq = BiSection::monomial(2, 0, 2, 0, one.clone());
    let unit = BiSection::monomial(0, 0, 0, 0, one.clone());

    let mut columns: Vec<(ModSymbol, Section<Rat>)> = Vec::new();
    for &(sym, _) in kernel.symbols() {
        let mut col = Section::zero(tev.clone(), 0);
        match sym {
            ModSymbol::F(i, j) => {
                col.set_coeff(ModSymbol::B(i, j), s0.clone())?;
                col.set_coeff(ModSymbol::B(i + 1, j), -&s1)?;
            }
            ModSymbol::G0 => {
                col.set_coeff(ModSymbol::E0, s0_sq.clone())?;
                col.set_coeff(ModSymbol::B(2, 0), -&s1)?;
            }
            ModSymbol::G1 => {
                col.set_coeff(ModSymbol::E1, s0_sq.clone())?;
                col.set_coeff(ModSymbol::B(2, 1), s1.clone())?;
            }
            ModSymbol::H => {
                col = Section::zero(tev.clone(), -1);
                col.set_coeff(ModSymbol::C, unit.clone())?;
            }
            other => unreachable!("unexpected kernel symbol {other}"),
        }
        columns.push((sym, col));
    }

    let dg0 = dg.constant_map();
    let dg_full = dg.as_map();
    let mut h_m: Option<Section<Rat>> = None;
    for (sym, col_const) in columns {
        // the constant part must already lie in the kernel of the constant map
        let const_image = dg0.apply(&col_const)?;
        if !const_image.is_zero() {
            return Err(Error::KernelResidual(format!(
                "constant part of {sym} maps to {const_image}"
            )));
        }
        // canonical correction: invert the constant part on the nilpotent image
        let nil_image = dg_full.apply(&col_const)?;
        let nil_bis = dg.section_to_bisection(&nil_image)?;
        let correction = if nil_bis.is_zero() {
            Section::zero(tev.clone(), col_const.twist())
        } else {
            inv.invert(&-&nil_bis)?
        };
        if correction.coeff(ModSymbol::C).is_some() {
            return Err(Error::KernelResidual(format!(
                "correction of {sym} has a c-component"
            )));
        }
        let full = col_const.checked_add(&correction)?;
        // exactness over the full Artin base
        let residual = dg_full.apply(&full)?;
        if !residual.is_zero() {
            return Err(Error::KernelResidual(format!(
                "column {sym}: residual {residual}"
            )));
        }
        if sym == ModSymbol::H {
            h_m = Some(correction.clone());
        }
        iota.set_column(sym, full)?;
    }
    Ok(KernelBasis {
        d: u32::from(d),
        iota,
        kernel,
        h_m: h_m.expect("h column present"),
    })
}

/// The class of the canonical correction modulo the distinguished line:
/// coefficients on the `b` and `e` symbols in a chosen context.
pub fn h_m_class(
    kb: &KernelBasis,
    ctx: &Arc<QuotientContext>,
) -> Result<BTreeMap<ModSymbol, BiSection<Rat>>> {
    let mut out = BTreeMap::new();
    for (sym, coeff) in kb.h_m().coeffs() {
        if *sym == ModSymbol::C {
            continue;
        }
        let reduced = coeff.reduce_in(ctx)?;
        if reduced.constant_part() != BiSection::zero(
            reduced.ring().clone(),
            ctx.clone(),
            reduced.bidegree().0,
            reduced.bidegree().1,
        ) {
            return Err(Error::KernelResidual(format!(
                "h_m coefficient of {sym} has a constant part"
            )));
        }
        out.insert(*sym, reduced);
    }
    Ok(out)
}

/// Splitting type of the kernel at the closed point, recovered from exact
/// twisted-global-section dimension counts of the constant map.
pub fn kernel_splitting_type(dg: &DGMap) -> Result<SplittingType> {
    let d = dg.d;
    let rank = (d * d - d - 1) as usize;
    let mut h0 = BTreeMap::new();
    for m in -3i64..=3 {
        h0.insert(m, kernel_h0(dg, m)?);
    }
    splitting_from_h0(rank, -3, 3, &|m| h0[&m])
}

fn kernel_h0(dg: &DGMap, m: i64) -> Result<usize> {
    let d = dg.d as i64;
    // columns: (symbol, alpha) for S0^alpha S1^(m+t-alpha)
    let mut cols: Vec<(ModSymbol, i64)> = Vec::new();
    for &(sym, t) in dg.source().symbols() {
        let deg = m + i64::from(t);
        for alpha in 0..=deg {
            if deg >= 0 {
                cols.push((sym, alpha));
            }
        }
    }
    let target_s_deg = d + m;
    if target_s_deg < 0 {
        return Ok(cols.len());
    }
    let mut row_index: BTreeMap<(i64, u16), usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, Rat)> = Vec::new();
    for (cidx, (sym, alpha)) in cols.iter().enumerate() {
        let row = dg.row_constant(*sym);
        for (key, coeff) in row.terms() {
            let c = coeff
                .constant_part()
                .as_constant()
                .ok_or_else(|| Error::Precondition("nonconstant coefficient".into()))?;
            if c.is_zero() {
                continue;
            }
            let s0 = i64::from(key.0) + alpha;
            let slot = key.1;
            let n = row_index.len();
            let ridx = *row_index.entry((s0, slot)).or_insert(n);
            entries.push((ridx, cidx, c));
        }
    }
    let nrows = row_index.len();
    if nrows == 0 || cols.is_empty() {
        return Ok(cols.len());
    }
    let mut mat = Mat::from_fn(nrows, cols.len(), |_, _| Rat::zero());
    for (r, c, v) in entries {
        mat.set(r, c, v);
    }
    let rank = bareiss_dense(&mat).rank;
    Ok(cols.len() - rank)
}
