//! The generic-constant alphabet and assignments of values to it.
//!
//! For a fixed degree `d` the constants are `C_(i,j)` with `(i,j)` in the
//! index set and `i,j <= d-2`, the column constants `C_j` for `2 <= j <= d-1`,
//! and the four special constants `C_1a`, `C_1b`, `C_za`, `C_zb`. The alphabet
//! is frozen at construction; unknown names are rejected to catch index bugs.

use crate::error::{Error, Result};
use crate::family::index_pairs;
use crate::scalar::{parse_rat, Rat, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Handle to one parameter of a [`ParamRing`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Param(pub(crate) usize);

/// The fixed parameter alphabet for one degree.
#[derive(Debug)]
pub struct ParamRing {
    d: u32,
    names: Vec<String>,
    lookup: BTreeMap<String, usize>,
    pairs: BTreeMap<(u8, u8), usize>,
    cols: BTreeMap<u8, usize>,
    c_1a: usize,
    c_1b: usize,
    c_za: usize,
    c_zb: usize,
}

impl ParamRing {
    pub fn for_degree(d: u32) -> Result<Arc<Self>> {
        if d < 3 {
            return Err(Error::DegreeTooSmall(d));
        }
        let mut names = Vec::new();
        let mut pairs = BTreeMap::new();
        let mut cols = BTreeMap::new();
        for (i, j) in index_pairs(d) {
            if u32::from(i) <= d - 2 && u32::from(j) <= d - 2 {
                pairs.insert((i, j), names.len());
                names.push(format!("C_({i},{j})"));
            }
        }
        for j in 2..d {
            cols.insert(j as u8, names.len());
            names.push(format!("C_{j}"));
        }
        let c_1a = names.len();
        names.push("C_1a".into());
        let c_1b = names.len();
        names.push("C_1b".into());
        let c_za = names.len();
        names.push("C_za".into());
        let c_zb = names.len();
        names.push("C_zb".into());

        let lookup = names
            .iter()
            .enumerate()
            .map(|(k, n)| (n.clone(), k))
            .collect();
        Ok(Arc::new(ParamRing {
            d,
            names,
            lookup,
            pairs,
            cols,
            c_1a,
            c_1b,
            c_za,
            c_zb,
        }))
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, p: Param) -> &str {
        &self.names[p.0]
    }

    pub fn param(&self, name: &str) -> Result<Param> {
        self.lookup
            .get(name)
            .map(|&k| Param(k))
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    /// `C_(i,j)` when it belongs to the alphabet; absent indices read as zero.
    pub fn c_pair(&self, i: u8, j: u8) -> Option<Param> {
        self.pairs.get(&(i, j)).map(|&k| Param(k))
    }

    /// `C_j` for `2 <= j <= d-1`.
    pub fn c_col(&self, j: u8) -> Option<Param> {
        self.cols.get(&j).map(|&k| Param(k))
    }

    pub fn c_1a(&self) -> Param {
        Param(self.c_1a)
    }
    pub fn c_1b(&self) -> Param {
        Param(self.c_1b)
    }
    pub fn c_za(&self) -> Param {
        Param(self.c_za)
    }
    pub fn c_zb(&self) -> Param {
        Param(self.c_zb)
    }

    pub fn params(&self) -> impl Iterator<Item = Param> + '_ {
        (0..self.names.len()).map(Param)
    }

    pub fn same_ring(a: &Arc<ParamRing>, b: &Arc<ParamRing>) -> bool {
        Arc::ptr_eq(a, b) || (a.d == b.d && a.names == b.names)
    }
}

impl fmt::Display for ParamRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[{}]", self.names.join(", "))
    }
}

/// A (possibly partial) assignment of scalar values to parameters.
#[derive(Clone, Debug)]
pub struct Assignment<S: Scalar> {
    ring: Arc<ParamRing>,
    values: Vec<Option<S>>,
}

impl<S: Scalar> Assignment<S> {
    pub fn empty(ring: Arc<ParamRing>) -> Self {
        let values = vec![None; ring.len()];
        Assignment { ring, values }
    }

    /// Total assignment built from a function of the parameter index.
    pub fn from_fn(ring: Arc<ParamRing>, mut f: impl FnMut(usize) -> S) -> Self {
        let values = (0..ring.len()).map(|k| Some(f(k))).collect();
        Assignment { ring, values }
    }

    pub fn ring(&self) -> &Arc<ParamRing> {
        &self.ring
    }

    pub fn set(&mut self, p: Param, v: S) {
        self.values[p.0] = Some(v);
    }

    pub fn set_by_name(&mut self, name: &str, v: S) -> Result<()> {
        let p = self.ring.param(name)?;
        self.set(p, v);
        Ok(())
    }

    pub fn get(&self, p: Param) -> Option<&S> {
        self.values[p.0].as_ref()
    }

    pub fn require(&self, p: Param) -> Result<&S> {
        self.get(p)
            .ok_or_else(|| Error::MissingParameter(self.ring.name(p).to_string()))
    }

    /// Fill every unset parameter with `f(index)`.
    pub fn fill_missing(&mut self, f: impl Fn(usize) -> S) {
        for (k, slot) in self.values.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = Some(f(k));
            }
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Assignment<T> {
        Assignment {
            ring: self.ring.clone(),
            values: self.values.iter().map(|v| v.as_ref().map(&f)).collect(),
        }
    }
}

impl Assignment<Rat> {
    /// Parse a JSON object mapping parameter names to rational strings
    /// (`"p/q"` or `"p"`), e.g. `{"C_(2,1)": "1/3", "C_1a": "-2"}`.
    pub fn from_json_str(ring: Arc<ParamRing>, text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::BadParamFile(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::BadParamFile("expected a JSON object".into()))?;
        let mut asn = Assignment::empty(ring);
        for (name, v) in obj {
            let s = v
                .as_str()
                .ok_or_else(|| Error::BadParamFile(format!("value of `{name}` is not a string")))?;
            let q = parse_rat(s).ok_or_else(|| Error::BadRational(s.to_string()))?;
            asn.set_by_name(name, q)?;
        }
        Ok(asn)
    }
}

/// Uniform random total assignment over the specialization field.
pub fn random_assignment<const P: u64>(
    ring: Arc<ParamRing>,
    seed: u64,
) -> Assignment<crate::scalar::Fp<P>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Assignment::from_fn(ring, |_| crate::scalar::Fp::<P>::new(rng.gen_range(0..P)))
}
