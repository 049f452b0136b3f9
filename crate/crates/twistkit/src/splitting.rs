//! Splitting types of bundles on the projective line and their recovery
//! from twisted global-section dimensions.

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// A multiset of twists `a_1 <= ... <= a_r`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SplittingType {
    parts: Vec<i64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct SplitStats {
    pub negativity: usize,
    pub nullity: usize,
    pub positivity: usize,
    pub globally_generated: bool,
    pub ample: bool,
}

impl SplittingType {
    pub fn new(mut parts: Vec<i64>) -> Self {
        parts.sort_unstable();
        SplittingType { parts }
    }

    pub fn empty() -> Self {
        SplittingType { parts: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[i64] {
        &self.parts
    }

    pub fn degree(&self) -> i64 {
        self.parts.iter().sum()
    }

    /// Negativity, nullity, positivity and the two positivity flags.
    pub fn stats(&self) -> SplitStats {
        let negativity = self.parts.iter().filter(|&&a| a < 0).count();
        let nullity = self.parts.iter().filter(|&&a| a == 0).count();
        let positivity = self.rank() - negativity - nullity;
        SplitStats {
            negativity,
            nullity,
            positivity,
            globally_generated: negativity == 0,
            ample: negativity + nullity == 0 && positivity > 0,
        }
    }

    /// Dimension of twisted global sections, `h0(m) = sum max(0, a_i+m+1)`.
    pub fn h0(&self, m: i64) -> usize {
        self.parts
            .iter()
            .map(|&a| (a + m + 1).max(0) as usize)
            .sum()
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        let mut it = self.parts.iter().peekable();
        while let Some(&a) = it.next() {
            let mut count = 1;
            while it.peek() == Some(&&a) {
                it.next();
                count += 1;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if count == 1 {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}^{count}")?;
            }
        }
        write!(f, "}}")
    }
}

/// Recover the unique splitting type of a rank-`rank` bundle from its
/// `h0` values over the window `[lo, hi]`, by second differences of
/// `m -> h0(m)`. Errors when the data is not realizable.
pub fn splitting_from_h0(
    rank: usize,
    lo: i64,
    hi: i64,
    h0: &dyn Fn(i64) -> usize,
) -> Result<SplittingType> {
    if hi - lo < 2 {
        return Err(Error::InconsistentH0(format!(
            "window [{lo}, {hi}] is too small"
        )));
    }
    let values: Vec<(i64, usize)> = (lo..=hi).map(|m| (m, h0(m))).collect();
    // delta(m) = h0(m) - h0(m-1) counts the summands with a >= -m; the
    // second difference at m is the multiplicity of the value -m.
    let mut parts = Vec::new();
    for k in 2..values.len() {
        let (m, v) = values[k];
        let (_, v1) = values[k - 1];
        let (_, v2) = values[k - 2];
        let d1 = v as i64 - v1 as i64;
        let d0 = v1 as i64 - v2 as i64;
        let mult = d1 - d0;
        if mult < 0 {
            return Err(Error::InconsistentH0(format!(
                "negative multiplicity at twist {m}"
            )));
        }
        for _ in 0..mult {
            parts.push(-m);
        }
    }
    let split = SplittingType::new(parts);
    if split.rank() != rank {
        return Err(Error::InconsistentH0(format!(
            "recovered rank {} != expected {rank}",
            split.rank()
        )));
    }
    for (m, v) in &values {
        if split.h0(*m) != *v {
            return Err(Error::InconsistentH0(format!(
                "h0({m}) = {v} is not reproduced by {split}"
            )));
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stats_counts_per_definition() {
        let t = SplittingType::new(vec![-1, 0, 2]);
        let s = t.stats();
        assert_eq!(
            (s.negativity, s.nullity, s.positivity),
            (1, 1, 1)
        );
        assert!(!s.globally_generated && !s.ample);
    }

    #[test]
    fn all_positive_is_ample() {
        let t = SplittingType::new(vec![1, 1, 1]);
        let s = t.stats();
        assert!(s.ample && s.globally_generated);
    }

    #[test]
    fn empty_type_is_globally_generated_not_ample() {
        let t = SplittingType::empty();
        let s = t.stats();
        assert_eq!((s.negativity, s.nullity, s.positivity), (0, 0, 0));
        assert!(s.globally_generated);
        assert!(!s.ample);
    }

    #[test]
    fn recovers_trivial_plus_one() {
        // O + O(1): h0(-2)=0, h0(-1)=1, h0(0)=3, h0(1)=5
        let t = splitting_from_h0(2, -3, 3, &|m| {
            SplittingType::new(vec![0, 1]).h0(m)
        })
        .unwrap();
        assert_eq!(t.parts(), &[0, 1]);
    }

    #[test]
    fn recovers_twice_two() {
        let t = splitting_from_h0(2, -4, 4, &|m| SplittingType::new(vec![2, 2]).h0(m)).unwrap();
        assert_eq!(t.parts(), &[2, 2]);
    }

    #[test]
    fn inconsistent_data_is_rejected() {
        let err = splitting_from_h0(2, -3, 3, &|m| if m == 0 { 17 } else { 0 });
        assert!(err.is_err());
    }

    proptest! {
        #[test]
        fn round_trip_random_types(parts in proptest::collection::vec(-5i64..=5, 0..12)) {
            let t = SplittingType::new(parts);
            let max = t.parts().iter().map(|a| a.abs()).max().unwrap_or(0);
            let (lo, hi) = (-max - 2, max + 2);
            let rec = splitting_from_h0(t.rank(), lo, hi, &|m| t.h0(m)).unwrap();
            prop_assert_eq!(rec, t);
        }

        #[test]
        fn stats_sum_to_rank(parts in proptest::collection::vec(-6i64..=6, 0..16)) {
            let t = SplittingType::new(parts);
            let s = t.stats();
            prop_assert_eq!(s.negativity + s.nullity + s.positivity, t.rank());
        }
    }
}
