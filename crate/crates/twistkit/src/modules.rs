//! Twisted free modules on the base line and degree-tracked maps between
//! them. An entry from a source symbol of twist `t_s` into a target symbol
//! of twist `t_t` is an S-form of degree `t_t - t_s` (or zero).

use crate::bigraded::{BiSection, SForm};
use crate::context::QuotientContext;
use crate::error::{Error, Result};
use crate::params::ParamRing;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Names of module basis symbols used across the pipeline.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ModSymbol {
    /// Tangent-direction symbols of the ambient line pencil.
    A(u8),
    E0,
    E1,
    B(u8, u8),
    C,
    /// Kernel symbols.
    F(u8, u8),
    G0,
    G1,
    H,
    /// Target basis `T0^j T1^(d-1-j)`.
    Slot(u8),
}

impl fmt::Display for ModSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModSymbol::A(l) => write!(f, "a{l}"),
            ModSymbol::E0 => write!(f, "e0"),
            ModSymbol::E1 => write!(f, "e1"),
            ModSymbol::B(i, j) => write!(f, "b_({i},{j})"),
            ModSymbol::C => write!(f, "c"),
            ModSymbol::F(i, j) => write!(f, "f_({i},{j})"),
            ModSymbol::G0 => write!(f, "g0"),
            ModSymbol::G1 => write!(f, "g1"),
            ModSymbol::H => write!(f, "h"),
            ModSymbol::Slot(j) => write!(f, "t_slot({j})"),
        }
    }
}

/// An ordered list of `(symbol, twist)` pairs with unique symbols.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwistedFreeModule {
    symbols: Vec<(ModSymbol, i32)>,
    index: BTreeMap<ModSymbol, usize>,
}

impl TwistedFreeModule {
    pub fn new(symbols: Vec<(ModSymbol, i32)>) -> Arc<Self> {
        let mut index = BTreeMap::new();
        for (k, (sym, _)) in symbols.iter().enumerate() {
            let previous = index.insert(*sym, k);
            assert!(previous.is_none(), "duplicate symbol {sym}");
        }
        Arc::new(TwistedFreeModule { symbols, index })
    }

    pub fn rank(&self) -> usize {
        self.symbols.len()
    }

    pub fn degree(&self) -> i64 {
        self.symbols.iter().map(|&(_, t)| i64::from(t)).sum()
    }

    pub fn symbols(&self) -> &[(ModSymbol, i32)] {
        &self.symbols
    }

    pub fn twist(&self, sym: ModSymbol) -> Option<i32> {
        self.index.get(&sym).map(|&k| self.symbols[k].1)
    }

    pub fn position(&self, sym: ModSymbol) -> Option<usize> {
        self.index.get(&sym).copied()
    }
}

/// A section of `module ⊗ O(twist)`: for each symbol of twist `t`, an
/// S-form of degree `twist + t`.
#[derive(Clone, Debug)]
pub struct Section<S: Scalar> {
    module: Arc<TwistedFreeModule>,
    twist: i32,
    coeffs: BTreeMap<ModSymbol, SForm<S>>,
}

impl<S: Scalar> Section<S> {
    pub fn zero(module: Arc<TwistedFreeModule>, twist: i32) -> Self {
        Section {
            module,
            twist,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn module(&self) -> &Arc<TwistedFreeModule> {
        &self.module
    }

    pub fn twist(&self) -> i32 {
        self.twist
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    pub fn coeff(&self, sym: ModSymbol) -> Option<&SForm<S>> {
        self.coeffs.get(&sym)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&ModSymbol, &SForm<S>)> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero())
    }

    pub fn set_coeff(&mut self, sym: ModSymbol, form: SForm<S>) -> Result<()> {
        let t = self
            .module
            .twist(sym)
            .ok_or_else(|| Error::ModuleMismatch(format!("no symbol {sym}")))?;
        let want = self.twist + t;
        if want < 0 || form.bidegree() != (want as u16, 0) {
            if form.is_zero() {
                return Ok(());
            }
            return Err(Error::ModuleMismatch(format!(
                "coefficient of {sym} must be an S-form of degree {want}, got degree {}",
                form.bidegree().0
            )));
        }
        if form.is_zero() {
            self.coeffs.remove(&sym);
        } else {
            self.coeffs.insert(sym, form);
        }
        Ok(())
    }

    pub fn add_coeff(&mut self, sym: ModSymbol, form: SForm<S>) -> Result<()> {
        if form.is_zero() {
            return Ok(());
        }
        let merged = match self.coeffs.get(&sym) {
            Some(old) => old.checked_add(&form)?,
            None => form,
        };
        self.set_coeff(sym, merged)
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.module, &rhs.module) || self.twist != rhs.twist {
            return Err(Error::ModuleMismatch("section add".into()));
        }
        let mut out = self.clone();
        for (sym, c) in rhs.coeffs() {
            out.add_coeff(*sym, c.clone())?;
        }
        Ok(out)
    }

    pub fn negate(&self) -> Self {
        let mut out = Section::zero(self.module.clone(), self.twist);
        for (sym, c) in self.coeffs() {
            out.coeffs.insert(*sym, -c);
        }
        out
    }

    pub fn reduce_in(&self, ctx: &Arc<QuotientContext>) -> Result<Self> {
        let mut out = Section::zero(self.module.clone(), self.twist);
        for (sym, c) in self.coeffs() {
            out.set_coeff(*sym, c.reduce_in(ctx)?)?;
        }
        Ok(out)
    }
}

impl<S: Scalar> PartialEq for Section<S> {
    fn eq(&self, other: &Self) -> bool {
        self.twist == other.twist
            && self.module.symbols() == other.module.symbols()
            && self.coeffs().collect::<BTreeMap<_, _>>()
                == other.coeffs().collect::<BTreeMap<_, _>>()
    }
}

impl<S: Scalar> fmt::Display for Section<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (sym, c) in self.coeffs() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = c.to_string();
            if cs == "1" {
                write!(f, "{sym}")?;
            } else if cs.contains(" + ") || cs.contains(" - ") {
                write!(f, "({cs})*{sym}")?;
            } else {
                write!(f, "{cs}*{sym}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A map of twisted free modules, stored column-wise by source symbol.
#[derive(Clone, Debug)]
pub struct ModuleMap<S: Scalar> {
    source: Arc<TwistedFreeModule>,
    target: Arc<TwistedFreeModule>,
    ring: Arc<ParamRing>,
    ctx: Arc<QuotientContext>,
    /// `columns[k]` is the image of source symbol `k` as a target section.
    columns: Vec<Section<S>>,
}

impl<S: Scalar> ModuleMap<S> {
    pub fn zero(
        source: Arc<TwistedFreeModule>,
        target: Arc<TwistedFreeModule>,
        ring: Arc<ParamRing>,
        ctx: Arc<QuotientContext>,
    ) -> Self {
        let columns = source
            .symbols()
            .iter()
            .map(|&(_, t)| Section::zero(target.clone(), -t))
            .collect();
        ModuleMap {
            source,
            target,
            ring,
            ctx,
            columns,
        }
    }

    pub fn identity(
        module: Arc<TwistedFreeModule>,
        ring: Arc<ParamRing>,
        ctx: Arc<QuotientContext>,
    ) -> Self {
        let mut map = Self::zero(module.clone(), module.clone(), ring.clone(), ctx.clone());
        for &(sym, _) in module.symbols() {
            let one = BiSection::monomial(
                0,
                0,
                0,
                0,
                crate::artin::ArtinElement::one(ring.clone(), ctx.clone()),
            );
            map.set_entry(sym, sym, one).unwrap();
        }
        map
    }

    pub fn source(&self) -> &Arc<TwistedFreeModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TwistedFreeModule> {
        &self.target
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn context(&self) -> &Arc<QuotientContext> {
        &self.ctx
    }

    /// Image of a source symbol. The section twist equals the symbol twist,
    /// so entries into target symbol `η` are forms of degree
    /// `twist(η) - twist(source symbol)`.
    pub fn column(&self, sym: ModSymbol) -> Result<&Section<S>> {
        let k = self
            .source
            .position(sym)
            .ok_or_else(|| Error::ModuleMismatch(format!("no source symbol {sym}")))?;
        Ok(&self.columns[k])
    }

    pub fn set_column(&mut self, sym: ModSymbol, section: Section<S>) -> Result<()> {
        let k = self
            .source
            .position(sym)
            .ok_or_else(|| Error::ModuleMismatch(format!("no source symbol {sym}")))?;
        let twist = -self.source.symbols()[k].1;
        if section.twist() != twist || !Arc::ptr_eq(section.module(), &self.target) {
            return Err(Error::ModuleMismatch(format!(
                "column for {sym} must be a target section of twist {twist}"
            )));
        }
        self.columns[k] = section;
        Ok(())
    }

    pub fn set_entry(&mut self, target: ModSymbol, source: ModSymbol, form: SForm<S>) -> Result<()> {
        let k = self
            .source
            .position(source)
            .ok_or_else(|| Error::ModuleMismatch(format!("no source symbol {source}")))?;
        self.columns[k].set_coeff(target, form)
    }

    pub fn entry(&self, target: ModSymbol, source: ModSymbol) -> Option<&SForm<S>> {
        let k = self.source.position(source)?;
        self.columns[k].coeff(target)
    }

    /// Every entry is S-homogeneous of degree target twist minus source
    /// twist; this holds by construction, and the audit re-checks it.
    pub fn audit_degrees(&self) -> Result<()> {
        for (k, &(sym, t)) in self.source.symbols().iter().enumerate() {
            let col = &self.columns[k];
            if col.twist() != -t {
                return Err(Error::ModuleMismatch(format!(
                    "column {sym} has twist {} instead of {}",
                    col.twist(),
                    -t
                )));
            }
            for (tsym, form) in col.coeffs() {
                let tt = self.target.twist(*tsym).unwrap();
                let want = tt - t;
                if want < 0 || form.bidegree() != (want as u16, 0) {
                    return Err(Error::ModuleMismatch(format!(
                        "entry ({tsym}, {sym}) has S-degree {} instead of {want}",
                        form.bidegree().0
                    )));
                }
            }
        }
        Ok(())
    }

    /// Apply to a section of `source ⊗ O(m)`.
    pub fn apply(&self, sec: &Section<S>) -> Result<Section<S>> {
        if !Arc::ptr_eq(sec.module(), &self.source) {
            return Err(Error::ModuleMismatch("apply: wrong source module".into()));
        }
        let mut out = Section::zero(self.target.clone(), sec.twist());
        for (sym, c) in sec.coeffs() {
            let col = self.column(*sym)?;
            for (tsym, e) in col.coeffs() {
                out.add_coeff(*tsym, e * c)?;
            }
        }
        Ok(out)
    }

    /// Composition `self ∘ rhs`.
    pub fn compose(&self, rhs: &ModuleMap<S>) -> Result<ModuleMap<S>> {
        if !Arc::ptr_eq(&self.source, &rhs.target) {
            return Err(Error::ModuleMismatch(
                "compose: inner modules do not match".into(),
            ));
        }
        let mut out = ModuleMap::zero(
            rhs.source.clone(),
            self.target.clone(),
            self.ring.clone(),
            self.ctx.clone(),
        );
        for &(sym, _) in rhs.source.symbols() {
            let col = rhs.column(sym)?;
            out.set_column(sym, self.apply(col)?)?;
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_zero())
    }

    pub fn reduce_in(&self, ctx: &Arc<QuotientContext>) -> Result<Self> {
        let mut out = ModuleMap::zero(
            self.source.clone(),
            self.target.clone(),
            self.ring.clone(),
            ctx.clone(),
        );
        for &(sym, _) in self.source.symbols() {
            out.set_column(sym, self.column(sym)?.reduce_in(ctx)?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artin::ArtinElement;
    use crate::scalar::Rat;

    fn setup() -> (Arc<ParamRing>, Arc<QuotientContext>) {
        (
            ParamRing::for_degree(3).unwrap(),
            QuotientContext::d_prime(3).unwrap(),
        )
    }

    fn s_form(
        ring: &Arc<ParamRing>,
        ctx: &Arc<QuotientContext>,
        degree: u16,
        s0: u16,
        c: i64,
    ) -> SForm<Rat> {
        BiSection::monomial(
            degree,
            0,
            s0,
            0,
            ArtinElement::from_scalar(ring.clone(), ctx.clone(), Rat::from_i64(c)),
        )
    }

    #[test]
    fn compose_with_identity() {
        let (ring, ctx) = setup();
        let m1 = TwistedFreeModule::new(vec![(ModSymbol::G0, 0), (ModSymbol::G1, 0)]);
        let m2 = TwistedFreeModule::new(vec![(ModSymbol::E0, 2)]);
        let mut f = ModuleMap::zero(m1.clone(), m2.clone(), ring.clone(), ctx.clone());
        f.set_entry(ModSymbol::E0, ModSymbol::G0, s_form(&ring, &ctx, 2, 1, 3))
            .unwrap();
        let id = ModuleMap::identity(m1.clone(), ring.clone(), ctx.clone());
        let c = f.compose(&id).unwrap();
        assert_eq!(
            c.entry(ModSymbol::E0, ModSymbol::G0),
            f.entry(ModSymbol::E0, ModSymbol::G0)
        );
        f.audit_degrees().unwrap();
    }

    #[test]
    fn zero_compose_is_zero() {
        let (ring, ctx) = setup();
        let m1 = TwistedFreeModule::new(vec![(ModSymbol::G0, 0)]);
        let m2 = TwistedFreeModule::new(vec![(ModSymbol::E0, 2)]);
        let m3 = TwistedFreeModule::new(vec![(ModSymbol::C, 1)]);
        let mut g = ModuleMap::<Rat>::zero(m1.clone(), m2.clone(), ring.clone(), ctx.clone());
        g.set_entry(ModSymbol::E0, ModSymbol::G0, s_form(&ring, &ctx, 2, 0, 1))
            .unwrap();
        let zero = ModuleMap::<Rat>::zero(m2, m3, ring, ctx);
        assert!(zero.compose(&g).unwrap().is_zero());
    }

    #[test]
    fn degree_audit_rejects_bad_entry() {
        let (ring, ctx) = setup();
        let m1 = TwistedFreeModule::new(vec![(ModSymbol::G0, 0)]);
        let m2 = TwistedFreeModule::new(vec![(ModSymbol::E0, 2)]);
        let mut f = ModuleMap::zero(m1, m2, ring.clone(), ctx.clone());
        // degree-1 form where degree 2 is required
        let bad = s_form(&ring, &ctx, 1, 0, 1);
        assert!(f.set_entry(ModSymbol::E0, ModSymbol::G0, bad).is_err());
    }
}
