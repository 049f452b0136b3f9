//! Sparse multivariate polynomials in the generic constants.
//!
//! Monomials are exponent vectors over the ring's fixed parameter
//! enumeration, ordered lexicographically. No zero coefficient is ever
//! stored.

use crate::error::{Error, Result};
use crate::params::{Assignment, Param, ParamRing};
use crate::scalar::{Rat, Scalar};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

type Expo = Vec<u16>;

#[derive(Clone, Debug)]
pub struct ParamPoly<S: Scalar> {
    ring: Arc<ParamRing>,
    terms: BTreeMap<Expo, S>,
}

impl<S: Scalar> ParamPoly<S> {
    pub fn zero(ring: Arc<ParamRing>) -> Self {
        ParamPoly {
            ring,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: Arc<ParamRing>, c: S) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(vec![0; p.ring.len()], c);
        }
        p
    }

    pub fn one(ring: Arc<ParamRing>) -> Self {
        Self::constant(ring, S::one())
    }

    pub fn int(ring: Arc<ParamRing>, n: i64) -> Self {
        Self::constant(ring, S::from_i64(n))
    }

    pub fn param(ring: Arc<ParamRing>, p: Param) -> Self {
        Self::monomial(ring, &[(p, 1)], S::one())
    }

    /// `C_(i,j)` as a polynomial, with out-of-alphabet indices read as zero.
    pub fn c_pair_or_zero(ring: &Arc<ParamRing>, i: u8, j: u8) -> Self {
        match ring.c_pair(i, j) {
            Some(p) => Self::param(ring.clone(), p),
            None => Self::zero(ring.clone()),
        }
    }

    pub fn monomial(ring: Arc<ParamRing>, powers: &[(Param, u16)], coeff: S) -> Self {
        let mut p = Self::zero(ring);
        if coeff.is_zero() {
            return p;
        }
        let mut e = vec![0u16; p.ring.len()];
        for &(param, k) in powers {
            e[param.0] += k;
        }
        p.terms.insert(e, coeff);
        p
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant value when the polynomial has no parameter dependence.
    pub fn as_constant(&self) -> Option<S> {
        if self.terms.is_empty() {
            return Some(S::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| u32::from(x)).sum())
            .max()
            .unwrap_or(0)
    }

    /// Parameters occurring with nonzero exponent.
    pub fn support(&self) -> Vec<Param> {
        let mut seen = vec![false; self.ring.len()];
        for e in self.terms.keys() {
            for (k, &x) in e.iter().enumerate() {
                if x > 0 {
                    seen[k] = true;
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(k, _)| Param(k))
            .collect()
    }

    fn insert_term(&mut self, e: Expo, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.ring.clone());
        }
        let mut out = Self::zero(self.ring.clone());
        for (e, v) in &self.terms {
            out.insert_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, n: u16) -> Self {
        let mut acc = Self::one(self.ring.clone());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Leading term in the lexicographic order.
    pub fn leading(&self) -> Option<(&Expo, &S)> {
        self.terms.iter().next_back()
    }

    /// Exact division; errors when the division does not come out even.
    pub fn exact_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::InexactDivision);
        }
        let (lt_d, lc_d) = rhs.leading().unwrap();
        let mut quotient = Self::zero(self.ring.clone());
        let mut rem = self.clone();
        while let Some((lt_r, lc_r)) = rem.leading() {
            let mut diff = vec![0u16; lt_r.len()];
            for k in 0..lt_r.len() {
                if lt_r[k] < lt_d[k] {
                    return Err(Error::InexactDivision);
                }
                diff[k] = lt_r[k] - lt_d[k];
            }
            let c = lc_r.exact_div(lc_d).ok_or(Error::InexactDivision)?;
            let mut qt = Self::zero(self.ring.clone());
            qt.terms.insert(diff, c);
            rem = &rem - &(&qt * rhs);
            quotient = &quotient + &qt;
        }
        Ok(quotient)
    }

    /// Full evaluation; errors on the first parameter in the support that the
    /// assignment does not cover.
    pub fn evaluate(&self, asn: &Assignment<S>) -> Result<S> {
        if !ParamRing::same_ring(asn.ring(), &self.ring) {
            return Err(Error::RingMismatch);
        }
        for p in self.support() {
            asn.require(p)?;
        }
        let mut total = S::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (k, &x) in e.iter().enumerate() {
                for _ in 0..x {
                    v = v * asn.get(Param(k)).unwrap().clone();
                }
            }
            total = total + v;
        }
        Ok(total)
    }

    /// Substitute a single parameter by a scalar, keeping the rest symbolic.
    pub fn substitute(&self, p: Param, value: &S) -> Self {
        let mut out = Self::zero(self.ring.clone());
        for (e, c) in &self.terms {
            let x = e[p.0];
            let mut v = c.clone();
            for _ in 0..x {
                v = v * value.clone();
            }
            let mut e2 = e.clone();
            e2[p.0] = 0;
            out.insert_term(e2, v);
        }
        out
    }

    /// Coefficient homomorphism, e.g. rationals into the prime field.
    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ParamPoly<T> {
        let mut out = ParamPoly::zero(self.ring.clone());
        for (e, c) in &self.terms {
            out.insert_term(e.clone(), f(c));
        }
        out
    }

    /// Divide by the leading coefficient; returns `(leading, monic poly)`.
    pub fn make_monic(&self) -> (S, Self) {
        match self.leading() {
            None => (S::one(), self.clone()),
            Some((_, lc)) => {
                let lc = lc.clone();
                let mut out = Self::zero(self.ring.clone());
                for (e, c) in &self.terms {
                    out.insert_term(e.clone(), c.exact_div(&lc).expect("leading divides"));
                }
                (lc, out)
            }
        }
    }

    fn fmt_term(&self, f: &mut fmt::Formatter<'_>, e: &Expo, lead: bool, c: &S) -> fmt::Result {
        let neg = c.is_display_negative();
        let c_abs = if neg { c.clone().neg() } else { c.clone() };
        if lead {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let is_const = e.iter().all(|&x| x == 0);
        if is_const || !c_abs.is_one() {
            write!(f, "{c_abs}")?;
            if !is_const {
                write!(f, "*")?;
            }
        }
        let mut first = true;
        for (k, &x) in e.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", self.ring.name(Param(k)))?;
            if x > 1 {
                write!(f, "^{x}")?;
            }
        }
        Ok(())
    }
}

impl ParamPoly<Rat> {
    pub fn to_fp<const P: u64>(&self) -> ParamPoly<crate::scalar::Fp<P>> {
        self.map_coeffs(crate::scalar::Fp::<P>::from_rat)
    }
}

impl<S: Scalar> PartialEq for ParamPoly<S> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}
impl<S: Scalar> Eq for ParamPoly<S> {}

impl<S: Scalar> fmt::Display for ParamPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            self.fmt_term(f, e, k == 0, c)?;
        }
        Ok(())
    }
}

impl<S: Scalar> Add for &ParamPoly<S> {
    type Output = ParamPoly<S>;
    fn add(self, rhs: Self) -> ParamPoly<S> {
        debug_assert!(ParamRing::same_ring(&self.ring, &rhs.ring));
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &ParamPoly<S> {
    type Output = ParamPoly<S>;
    fn sub(self, rhs: Self) -> ParamPoly<S> {
        debug_assert!(ParamRing::same_ring(&self.ring, &rhs.ring));
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(e.clone(), c.clone().neg());
        }
        out
    }
}

impl<S: Scalar> Mul for &ParamPoly<S> {
    type Output = ParamPoly<S>;
    fn mul(self, rhs: Self) -> ParamPoly<S> {
        debug_assert!(ParamRing::same_ring(&self.ring, &rhs.ring));
        let mut out = ParamPoly::zero(self.ring.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Expo = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Neg for &ParamPoly<S> {
    type Output = ParamPoly<S>;
    fn neg(self) -> ParamPoly<S> {
        let mut out = ParamPoly::zero(self.ring.clone());
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c.clone().neg());
        }
        out
    }
}
