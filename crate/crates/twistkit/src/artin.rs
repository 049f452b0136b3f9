//! Elements of the Artin base ring, split as constant part plus nilpotent
//! part. The maximal ideal squares to zero, so the product of two nilpotent
//! parts never contributes.

use crate::context::QuotientContext;
use crate::error::{Error, Result};
use crate::nil::NilSymbol;
use crate::params::ParamRing;
use crate::poly::ParamPoly;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct ArtinElement<S: Scalar> {
    ring: Arc<ParamRing>,
    ctx: Arc<QuotientContext>,
    constant: ParamPoly<S>,
    nilpotent: BTreeMap<NilSymbol, ParamPoly<S>>,
}

impl<S: Scalar> ArtinElement<S> {
    pub fn zero(ring: Arc<ParamRing>, ctx: Arc<QuotientContext>) -> Self {
        let constant = ParamPoly::zero(ring.clone());
        ArtinElement {
            ring,
            ctx,
            constant,
            nilpotent: BTreeMap::new(),
        }
    }

    pub fn from_constant(ctx: Arc<QuotientContext>, c: ParamPoly<S>) -> Self {
        ArtinElement {
            ring: c.ring().clone(),
            ctx,
            constant: c,
            nilpotent: BTreeMap::new(),
        }
    }

    pub fn from_scalar(ring: Arc<ParamRing>, ctx: Arc<QuotientContext>, s: S) -> Self {
        Self::from_constant(ctx, ParamPoly::constant(ring, s))
    }

    pub fn one(ring: Arc<ParamRing>, ctx: Arc<QuotientContext>) -> Self {
        Self::from_scalar(ring, ctx, S::one())
    }

    /// A bare nilpotent symbol. The symbol must be a full symbol of the
    /// ambient degree or a reduced symbol of the context.
    pub fn from_symbol(
        ring: Arc<ParamRing>,
        ctx: Arc<QuotientContext>,
        sym: NilSymbol,
    ) -> Result<Self> {
        if !sym.is_full() && !ctx.is_reduced_symbol(&sym) {
            return Err(Error::SymbolOutOfContext(
                sym.to_string(),
                ctx.label().to_string(),
            ));
        }
        let mut e = Self::zero(ring.clone(), ctx);
        e.nilpotent.insert(sym, ParamPoly::one(ring));
        Ok(e)
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn context(&self) -> &Arc<QuotientContext> {
        &self.ctx
    }

    pub fn constant_part(&self) -> &ParamPoly<S> {
        &self.constant
    }

    pub fn nilpotent_terms(&self) -> impl Iterator<Item = (&NilSymbol, &ParamPoly<S>)> {
        self.nilpotent.iter()
    }

    pub fn nilpotent_coeff(&self, sym: &NilSymbol) -> Option<&ParamPoly<S>> {
        self.nilpotent.get(sym)
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.nilpotent.is_empty()
    }

    pub fn is_nilpotent(&self) -> bool {
        self.constant.is_zero()
    }

    pub fn constant_only(&self) -> Self {
        Self::from_constant(self.ctx.clone(), self.constant.clone())
    }

    pub fn nilpotent_only(&self) -> Self {
        let mut e = Self::zero(self.ring.clone(), self.ctx.clone());
        e.nilpotent = self.nilpotent.clone();
        e
    }

    fn insert_nil(&mut self, sym: NilSymbol, p: ParamPoly<S>) {
        if p.is_zero() {
            return;
        }
        match self.nilpotent.entry(sym) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &p;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.compatible(rhs)?;
        let mut out = self.clone();
        out.constant = &out.constant + &rhs.constant;
        for (sym, p) in &rhs.nilpotent {
            out.insert_nil(*sym, p.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(&-rhs)
    }

    /// Product in the square-zero extension: the nilpotent-times-nilpotent
    /// contribution is identically zero.
    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        self.compatible(rhs)?;
        let mut out = Self::zero(self.ring.clone(), self.ctx.clone());
        out.constant = &self.constant * &rhs.constant;
        for (sym, p) in &self.nilpotent {
            out.insert_nil(*sym, p * &rhs.constant);
        }
        for (sym, p) in &rhs.nilpotent {
            out.insert_nil(*sym, p * &self.constant);
        }
        Ok(out)
    }

    pub fn scale_poly(&self, c: &ParamPoly<S>) -> Self {
        let mut out = Self::zero(self.ring.clone(), self.ctx.clone());
        out.constant = &self.constant * c;
        for (sym, p) in &self.nilpotent {
            out.insert_nil(*sym, p * c);
        }
        out
    }

    fn compatible(&self, rhs: &Self) -> Result<()> {
        if !ParamRing::same_ring(&self.ring, &rhs.ring) {
            return Err(Error::RingMismatch);
        }
        if !QuotientContext::same_context(&self.ctx, &rhs.ctx) {
            return Err(Error::ContextMismatch(
                self.ctx.label().to_string(),
                rhs.ctx.label().to_string(),
            ));
        }
        Ok(())
    }

    /// Express the element in another context by applying its substitution
    /// table; total on full symbols and idempotent on reduced ones.
    pub fn reduce_in(&self, ctx: &Arc<QuotientContext>) -> Result<Self> {
        if ctx.degree() != self.ctx.degree() {
            return Err(Error::ContextMismatch(
                self.ctx.label().to_string(),
                ctx.label().to_string(),
            ));
        }
        let mut out = Self::zero(self.ring.clone(), ctx.clone());
        out.constant = self.constant.clone();
        for (sym, p) in &self.nilpotent {
            match ctx.image(sym) {
                None => {
                    if !sym.is_full() && !ctx.is_reduced_symbol(sym) {
                        return Err(Error::SymbolOutOfContext(
                            sym.to_string(),
                            ctx.label().to_string(),
                        ));
                    }
                    out.insert_nil(*sym, p.clone());
                }
                Some(image) => {
                    for (s2, c2) in image {
                        out.insert_nil(*s2, p.scale(&S::from_rat(c2)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&ParamPoly<S>) -> ParamPoly<T>) -> ArtinElement<T> {
        let mut out = ArtinElement::zero(self.ring.clone(), self.ctx.clone());
        out.constant = f(&self.constant);
        for (sym, p) in &self.nilpotent {
            let q = f(p);
            if !q.is_zero() {
                out.nilpotent.insert(*sym, q);
            }
        }
        out
    }
}

impl<S: Scalar> PartialEq for ArtinElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.constant == other.constant && self.nilpotent == other.nilpotent
    }
}
impl<S: Scalar> Eq for ArtinElement<S> {}

impl<S: Scalar> Add for &ArtinElement<S> {
    type Output = ArtinElement<S>;
    fn add(self, rhs: Self) -> ArtinElement<S> {
        self.checked_add(rhs).expect("artin add: incompatible operands")
    }
}

impl<S: Scalar> Sub for &ArtinElement<S> {
    type Output = ArtinElement<S>;
    fn sub(self, rhs: Self) -> ArtinElement<S> {
        self.checked_sub(rhs).expect("artin sub: incompatible operands")
    }
}

impl<S: Scalar> Mul for &ArtinElement<S> {
    type Output = ArtinElement<S>;
    fn mul(self, rhs: Self) -> ArtinElement<S> {
        self.checked_mul(rhs).expect("artin mul: incompatible operands")
    }
}

impl<S: Scalar> Neg for &ArtinElement<S> {
    type Output = ArtinElement<S>;
    fn neg(self) -> ArtinElement<S> {
        let mut out = ArtinElement::zero(self.ring.clone(), self.ctx.clone());
        out.constant = -&self.constant;
        for (sym, p) in &self.nilpotent {
            out.nilpotent.insert(*sym, -p);
        }
        out
    }
}

impl<S: Scalar> fmt::Display for ArtinElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        if !self.constant.is_zero() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (sym, p) in &self.nilpotent {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if p.as_constant().map(|c| c.is_one()).unwrap_or(false) {
                write!(f, "{sym}")?;
            } else {
                write!(f, "({p})*{sym}")?;
            }
        }
        Ok(())
    }
}
