//! Nilpotent basis symbols of the Artin base.
//!
//! Full symbols are `u^l_(i,j)` for `(i,j)` in the index set and `v^l`,
//! `l = 0..3`. Inside a quotient context at `s = [1:0]` the reduced symbols
//! are `w_(i,j)` for `(i,j)` in the reduced index set, plus `v^2`, `v^3`.
//!
//! The fixed ordering is: `u` symbols lex by `(i,j,l)`, then `w` lex by
//! `(i,j)`, then `v` by `l`.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NilSymbol {
    U { i: u8, j: u8, l: u8 },
    W { i: u8, j: u8 },
    V { l: u8 },
}

impl NilSymbol {
    pub fn u(i: u8, j: u8, l: u8) -> Self {
        debug_assert!(l < 4);
        NilSymbol::U { i, j, l }
    }

    pub fn v(l: u8) -> Self {
        debug_assert!(l < 4);
        NilSymbol::V { l }
    }

    pub fn w(i: u8, j: u8) -> Self {
        NilSymbol::W { i, j }
    }

    pub fn is_full(&self) -> bool {
        !matches!(self, NilSymbol::W { .. })
    }
}

impl fmt::Display for NilSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NilSymbol::U { i, j, l } => write!(f, "u^{l}_({i},{j})"),
            NilSymbol::W { i, j } => write!(f, "w_({i},{j})"),
            NilSymbol::V { l } => write!(f, "v^{l}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_u_then_w_then_v() {
        let u = NilSymbol::u(3, 3, 3);
        let w = NilSymbol::w(0, 0);
        let v = NilSymbol::v(0);
        assert!(u < w && w < v);
        assert!(NilSymbol::u(0, 1, 2) < NilSymbol::u(0, 2, 0));
        assert!(NilSymbol::v(2) < NilSymbol::v(3));
    }
}
