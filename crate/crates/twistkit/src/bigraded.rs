//! Bihomogeneous forms on the product of two projective lines, with Artin
//! coefficients. A section of bidegree `(a, b)` stores, for each monomial
//! `S0^p S1^(a-p) T0^q T1^(b-q)`, its coefficient keyed by `(p, q)`; the
//! complementary exponents are implied, so homogeneity holds by
//! construction.

use crate::artin::ArtinElement;
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
pub struct BiSection<S: Scalar> {
    s_degree: u16,
    t_degree: u16,
    ring: Arc<ParamRing>,
    ctx: Arc<QuotientContext>,
    terms: BTreeMap<(u16, u16), ArtinElement<S>>,
}

/// A form in `S0, S1` only: a bisection of T-degree zero.
pub type SForm<S> = BiSection<S>;

impl<S: Scalar> BiSection<S> {
    pub fn zero(
        ring: Arc<ParamRing>,
        ctx: Arc<QuotientContext>,
        s_degree: u16,
        t_degree: u16,
    ) -> Self {
        BiSection {
            s_degree,
            t_degree,
            ring,
            ctx,
            terms: BTreeMap::new(),
        }
    }

    /// A single monomial `S0^s0 S1^(a-s0) T0^t0 T1^(b-t0)` with coefficient.
    pub fn monomial(
        s_degree: u16,
        t_degree: u16,
        s0: u16,
        t0: u16,
        coeff: ArtinElement<S>,
    ) -> Self {
        assert!(s0 <= s_degree && t0 <= t_degree, "exponent out of range");
        let mut out = BiSection::zero(
            coeff.ring().clone(),
            coeff.context().clone(),
            s_degree,
            t_degree,
        );
        out.insert((s0, t0), coeff);
        out
    }

    pub fn bidegree(&self) -> (u16, u16) {
        (self.s_degree, self.t_degree)
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn context(&self) -> &Arc<QuotientContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u16, u16), &ArtinElement<S>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s0: u16, t0: u16) -> Option<&ArtinElement<S>> {
        self.terms.get(&(s0, t0))
    }

    fn insert(&mut self, key: (u16, u16), coeff: ArtinElement<S>) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &coeff;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        if self.bidegree() != rhs.bidegree() {
            return Err(Error::BidegreeMismatch(
                self.s_degree,
                self.t_degree,
                rhs.s_degree,
                rhs.t_degree,
            ));
        }
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(*k, c.clone());
        }
        Ok(out)
    }

    pub fn scale_artin(&self, c: &ArtinElement<S>) -> Self {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert(*k, v * c);
        }
        out
    }

    pub fn scale_poly(&self, c: &ParamPoly<S>) -> Self {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert(*k, v.scale_poly(c));
        }
        out
    }

    /// Multiply by the monomial `S0^p S1^q`, raising the S-degree by `p+q`.
    pub fn mul_s_monomial(&self, p: u16, q: u16) -> Self {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree + p + q,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert((k.0 + p, k.1), v.clone());
        }
        out
    }

    pub fn constant_part(&self) -> Self {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert(*k, v.constant_only());
        }
        out
    }

    pub fn nilpotent_part(&self) -> Self {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert(*k, v.nilpotent_only());
        }
        out
    }

    /// True when no coefficient carries a nilpotent symbol.
    pub fn has_constant_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.nilpotent_terms().count() == 0)
    }

    pub fn reduce_in(&self, ctx: &Arc<QuotientContext>) -> Result<Self> {
        let mut out = BiSection::zero(
            self.ring.clone(),
            ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert(*k, v.reduce_in(ctx)?);
        }
        Ok(out)
    }

    /// Split off, per nilpotent symbol, the constant-coefficient section
    /// multiplying it.
    pub fn nil_components(&self) -> BTreeMap<NilSymbol, BiSection<S>> {
        let mut out: BTreeMap<NilSymbol, BiSection<S>> = BTreeMap::new();
        for (k, v) in &self.terms {
            for (sym, poly) in v.nilpotent_terms() {
                let entry = out.entry(*sym).or_insert_with(|| {
                    BiSection::zero(
                        self.ring.clone(),
                        self.ctx.clone(),
                        self.s_degree,
                        self.t_degree,
                    )
                });
                entry.insert(
                    *k,
                    ArtinElement::from_constant(self.ctx.clone(), poly.clone()),
                );
            }
        }
        out
    }

    fn divide(&self, which: Division) -> Result<Self> {
        let (ds, dt) = match which {
            Division::S0 | Division::S1 => (1u16, 0u16),
            Division::T1 => (0, 1),
        };
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree - ds,
            self.t_degree - dt,
        );
        for (k, v) in &self.terms {
            let ok = match which {
                Division::S0 => k.0 >= 1,
                Division::S1 => self.s_degree - k.0 >= 1,
                Division::T1 => self.t_degree - k.1 >= 1,
            };
            if !ok {
                return Err(Error::NotDivisible(
                    self.monomial_name(*k),
                    which.name().into(),
                ));
            }
            let key = match which {
                Division::S0 => (k.0 - 1, k.1),
                Division::S1 | Division::T1 => *k,
            };
            out.insert(key, v.clone());
        }
        Ok(out)
    }

    pub fn divide_s0(&self) -> Result<Self> {
        self.divide(Division::S0)
    }

    pub fn divide_s1(&self) -> Result<Self> {
        self.divide(Division::S1)
    }

    /// Exact division by `T1`, the twist down by the marked section's divisor.
    pub fn divide_t1(&self) -> Result<Self> {
        self.divide(Division::T1)
    }

    /// The coefficient form of `T0^j T1^(b-j)`, an S-form.
    pub fn t_slice(&self, j: u16) -> SForm<S> {
        let mut out = BiSection::zero(self.ring.clone(), self.ctx.clone(), self.s_degree, 0);
        for (k, v) in &self.terms {
            if k.1 == j {
                out.insert((k.0, 0), v.clone());
            }
        }
        out
    }

    /// All T-coefficients, indexed by the T0-exponent `0..=t_degree`.
    pub fn t_slices(&self) -> Vec<SForm<S>> {
        (0..=self.t_degree).map(|j| self.t_slice(j)).collect()
    }

    /// Rebuild from T-slices: `sum_j slice[j] * T0^j T1^(b-j)`.
    pub fn from_t_slices(
        ring: Arc<ParamRing>,
        ctx: Arc<QuotientContext>,
        s_degree: u16,
        t_degree: u16,
        slices: &[SForm<S>],
    ) -> Self {
        let mut out = BiSection::zero(ring, ctx, s_degree, t_degree);
        for (j, slice) in slices.iter().enumerate() {
            for (k, v) in &slice.terms {
                out.insert((k.0, j as u16), v.clone());
            }
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(
        &self,
        f: impl Fn(&ArtinElement<S>) -> ArtinElement<T>,
    ) -> BiSection<T> {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.insert(*k, f(v));
        }
        out
    }

    pub fn monomial_name(&self, key: (u16, u16)) -> String {
        let (p, q) = key;
        let mut parts = Vec::new();
        let mut push = |sym: &str, e: u16| {
            if e == 1 {
                parts.push(sym.to_string());
            } else if e > 1 {
                parts.push(format!("{sym}^{e}"));
            }
        };
        push("S0", p);
        push("S1", self.s_degree - p);
        push("T0", q);
        push("T1", self.t_degree - q);
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

#[derive(Clone, Copy)]
enum Division {
    S0,
    S1,
    T1,
}

impl Division {
    fn name(self) -> &'static str {
        match self {
            Division::S0 => "S0",
            Division::S1 => "S1",
            Division::T1 => "T1",
        }
    }
}

impl<S: Scalar> PartialEq for BiSection<S> {
    fn eq(&self, other: &Self) -> bool {
        self.bidegree() == other.bidegree() && self.terms == other.terms
    }
}
impl<S: Scalar> Eq for BiSection<S> {}

impl<S: Scalar> Add for &BiSection<S> {
    type Output = BiSection<S>;
    fn add(self, rhs: Self) -> BiSection<S> {
        self.checked_add(rhs).expect("bisection add: bidegree mismatch")
    }
}

impl<S: Scalar> Sub for &BiSection<S> {
    type Output = BiSection<S>;
    fn sub(self, rhs: Self) -> BiSection<S> {
        self.checked_add(&-rhs).expect("bisection sub: bidegree mismatch")
    }
}

impl<S: Scalar> Neg for &BiSection<S> {
    type Output = BiSection<S>;
    fn neg(self) -> BiSection<S> {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree,
            self.t_degree,
        );
        for (k, v) in &self.terms {
            out.terms.insert(*k, -v);
        }
        out
    }
}

impl<S: Scalar> Mul for &BiSection<S> {
    type Output = BiSection<S>;
    fn mul(self, rhs: Self) -> BiSection<S> {
        let mut out = BiSection::zero(
            self.ring.clone(),
            self.ctx.clone(),
            self.s_degree + rhs.s_degree,
            self.t_degree + rhs.t_degree,
        );
        for (k1, v1) in &self.terms {
            for (k2, v2) in &rhs.terms {
                out.insert((k1.0 + k2.0, k1.1 + k2.1), v1 * v2);
            }
        }
        out
    }
}

impl<S: Scalar> fmt::Display for BiSection<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let name = self.monomial_name(*k);
            let coeff = v.to_string();
            if coeff == "1" {
                write!(f, "{name}")?;
            } else if name == "1" {
                write!(f, "{coeff}")?;
            } else if coeff.contains(' ') || coeff.contains('+') {
                write!(f, "({coeff})*{name}")?;
            } else {
                write!(f, "{coeff}*{name}")?;
            }
        }
        Ok(())
    }
}

/// Coordinates of a bidegree `(a,b)` section (`b >= 1`) in the pushforward
/// of the twist down by the marked-point divisor `T1 = 0`: divide by `T1`,
/// then read off the coefficients of `T0^j T1^(b-1-j)`.
pub fn pushforward_minus_section<S: Scalar>(f: &BiSection<S>) -> Result<Vec<SForm<S>>> {
    let (_, b) = f.bidegree();
    if b < 1 {
        return Err(Error::Precondition(format!(
            "pushforward needs T-degree >= 1, got {b}"
        )));
    }
    Ok(f.divide_t1()?.t_slices())
}
