//! Exact fraction-free linear algebra over any integral domain entry type.
//!
//! `bareiss_dense` is textbook one-step fraction-free elimination with full
//! pivoting. `block_det` first permutes a square matrix to block-triangular
//! form (maximum bipartite matching, then strongly connected components of
//! the pivot digraph) and eliminates per block, which keeps intermediate
//! polynomials small on the sparse near-triangular matrices this crate
//! produces. `ff_rank_det` combines the two.

use crate::poly::ParamPoly;
use crate::scalar::Scalar;
use std::fmt;

/// Matrix entries: an integral domain with exact division.
pub trait Entry: Clone + PartialEq + fmt::Debug {
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact division; `None` when the divisor is zero or does not divide.
    fn exact_div(&self, rhs: &Self) -> Option<Self>;
    fn zero_like(&self) -> Self {
        self.sub(self)
    }
    /// Size measure used to pick small pivots.
    fn complexity(&self) -> usize {
        1
    }
}

macro_rules! scalar_entry {
    ($t:ty) => {
        impl Entry for $t {
            fn is_zero(&self) -> bool {
                num_traits::Zero::is_zero(self)
            }
            fn add(&self, rhs: &Self) -> Self {
                self.clone() + rhs.clone()
            }
            fn sub(&self, rhs: &Self) -> Self {
                self.clone() - rhs.clone()
            }
            fn mul(&self, rhs: &Self) -> Self {
                self.clone() * rhs.clone()
            }
            fn neg(&self) -> Self {
                -self.clone()
            }
            fn exact_div(&self, rhs: &Self) -> Option<Self> {
                Scalar::exact_div(self, rhs)
            }
        }
    };
}

scalar_entry!(crate::scalar::Rat);
scalar_entry!(crate::scalar::Fp62);

impl<S: Scalar> Entry for ParamPoly<S> {
    fn is_zero(&self) -> bool {
        ParamPoly::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        ParamPoly::exact_div(self, rhs).ok()
    }
    fn zero_like(&self) -> Self {
        ParamPoly::zero(self.ring().clone())
    }
    fn complexity(&self) -> usize {
        self.num_terms()
    }
}

#[derive(Clone, Debug)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Entry> Mat<R> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        assert!(rows.iter().all(|r| r.len() == ncols));
        Mat {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &R {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn map<T: Entry>(&self, f: impl Fn(&R) -> T) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |r, c| f(self.at(r, c)))
    }

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<R> {
        Mat::from_fn(rows.len(), cols.len(), |r, c| {
            self.at(rows[r], cols[c]).clone()
        })
    }
}

/// Result of a fraction-free elimination.
#[derive(Clone, Debug)]
pub struct FfOutput<R> {
    pub rank: usize,
    /// Exact determinant, present for square inputs.
    pub det: Option<R>,
    /// Minors of the pivoted matrix whose joint nonvanishing certifies the
    /// rank: the successive Bareiss pivots (= leading principal minors after
    /// the pivoting permutation).
    pub pivots: Vec<R>,
}

/// One-step fraction-free Bareiss elimination with full pivoting.
pub fn bareiss_dense<R: Entry>(m: &Mat<R>) -> FfOutput<R> {
    let (nr, nc) = (m.rows(), m.cols());
    if nr == 0 || nc == 0 {
        return FfOutput {
            rank: 0,
            det: None,
            pivots: Vec::new(),
        };
    }
    let mut a = m.clone();
    let mut sign_neg = false;
    let mut pivots: Vec<R> = Vec::new();
    let mut prev: Option<R> = None;
    let steps = nr.min(nc);
    let mut rank = 0usize;
    for step in 0..steps {
        // smallest nonzero pivot by complexity, then (col, row)
        let mut best: Option<(usize, usize, usize)> = None;
        for c in step..nc {
            for r in step..nr {
                let e = a.at(r, c);
                if !e.is_zero() {
                    let key = e.complexity();
                    if best.map(|(k, bc, br)| (key, c, r) < (k, bc, br)).unwrap_or(true) {
                        best = Some((key, c, r));
                    }
                }
            }
        }
        let Some((_, pc, pr)) = best else { break };
        if pr != step {
            for c in 0..nc {
                let tmp = a.at(step, c).clone();
                a.set(step, c, a.at(pr, c).clone());
                a.set(pr, c, tmp);
            }
            sign_neg = !sign_neg;
        }
        if pc != step {
            for r in 0..nr {
                let tmp = a.at(r, step).clone();
                a.set(r, step, a.at(r, pc).clone());
                a.set(r, pc, tmp);
            }
            sign_neg = !sign_neg;
        }
        let pivot = a.at(step, step).clone();
        for r in (step + 1)..nr {
            for c in (step + 1)..nc {
                let t = a.at(r, c).mul(&pivot).sub(&a.at(r, step).mul(a.at(step, c)));
                let v = match &prev {
                    None => t,
                    Some(p) => t
                        .exact_div(p)
                        .expect("fraction-free elimination divides exactly"),
                };
                a.set(r, c, v);
            }
            a.set(r, step, pivot.zero_like());
        }
        pivots.push(pivot.clone());
        prev = Some(pivot);
        rank += 1;
    }
    let det = if nr == nc {
        Some(if rank < nr {
            m.at(0, 0).zero_like()
        } else {
            let last = pivots.last().unwrap().clone();
            if sign_neg {
                last.neg()
            } else {
                last
            }
        })
    } else {
        None
    };
    FfOutput { rank, det, pivots }
}

/// Exact determinant in factored form via block triangularization:
/// a maximum matching pairs rows with columns, strongly connected
/// components of the induced digraph are the diagonal blocks, and the
/// determinant is the signed product of the block determinants.
/// Returns `(sign, block determinants)`; an empty factor list with sign 0
/// encodes a structurally singular matrix (no perfect matching).
pub fn block_det<R: Entry>(m: &Mat<R>) -> (i8, Vec<R>) {
    assert!(m.is_square(), "block_det needs a square matrix");
    let n = m.rows();
    if n == 0 {
        return (1, Vec::new());
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|r| (0..n).filter(|&c| !m.at(r, c).is_zero()).collect())
        .collect();
    let Some(col_of_row) = perfect_matching(&adj, n) else {
        return (0, Vec::new());
    };
    // digraph on rows: r -> r' iff the row r has a nonzero in the column
    // matched to r'
    let mut row_of_col = vec![0usize; n];
    for (r, &c) in col_of_row.iter().enumerate() {
        row_of_col[c] = r;
    }
    let edges: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            adj[r]
                .iter()
                .map(|&c| row_of_col[c])
                .filter(|&r2| r2 != r)
                .collect()
        })
        .collect();
    let sccs = tarjan_sccs(&edges);
    // Deterministic source-first order on the condensation, preferring the
    // smallest row index among ready components.
    let block_rows = topo_order_blocks(sccs, &edges);
    let mut row_order = Vec::with_capacity(n);
    let mut col_order = Vec::with_capacity(n);
    for block in &block_rows {
        for &r in block {
            row_order.push(r);
            col_order.push(col_of_row[r]);
        }
    }
    let sign = permutation_sign(&row_order) * permutation_sign(&col_order);
    let mut factors = Vec::new();
    for block in &block_rows {
        let cols: Vec<usize> = block.iter().map(|&r| col_of_row[r]).collect();
        let sub = m.submatrix(block, &cols);
        let out = bareiss_dense(&sub);
        let det = out.det.expect("square block");
        if det.is_zero() {
            return (0, Vec::new());
        }
        factors.push(det);
    }
    (sign, factors)
}

/// Rank, determinant and pivot certificates by fraction-free elimination.
/// Square matrices go through the sparse block route first; everything
/// else (and singular square input) falls back to dense elimination.
pub fn ff_rank_det<R: Entry>(m: &Mat<R>) -> FfOutput<R> {
    if m.is_square() && m.rows() > 0 {
        let (sign, factors) = block_det(m);
        if sign != 0 {
            // cumulative products = leading principal minors of the
            // block-permuted matrix
            let mut pivots: Vec<R> = Vec::with_capacity(factors.len());
            let mut acc: Option<R> = None;
            for f in &factors {
                let next = match &acc {
                    None => f.clone(),
                    Some(a) => a.mul(f),
                };
                pivots.push(next.clone());
                acc = Some(next);
            }
            let mut det = acc.expect("nonempty");
            if sign < 0 {
                det = det.neg();
            }
            return FfOutput {
                rank: m.rows(),
                det: Some(det),
                pivots,
            };
        }
    }
    bareiss_dense(m)
}

fn perfect_matching(adj: &[Vec<usize>], n_cols: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut col_match: Vec<Option<usize>> = vec![None; n_cols];
    fn try_assign(
        r: usize,
        adj: &[Vec<usize>],
        visited: &mut [bool],
        col_match: &mut [Option<usize>],
    ) -> bool {
        for &c in &adj[r] {
            if visited[c] {
                continue;
            }
            visited[c] = true;
            if col_match[c].is_none()
                || try_assign(col_match[c].unwrap(), adj, visited, col_match)
            {
                col_match[c] = Some(r);
                return true;
            }
        }
        false
    }
    for r in 0..n {
        let mut visited = vec![false; n_cols];
        if !try_assign(r, adj, &mut visited, &mut col_match) {
            return None;
        }
    }
    let mut col_of_row = vec![usize::MAX; n];
    for (c, r) in col_match.iter().enumerate() {
        if let Some(r) = r {
            col_of_row[*r] = c;
        }
    }
    Some(col_of_row)
}

/// Iterative Tarjan; components are emitted sinks-first.
fn tarjan_sccs(edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        call.push((start, 0));
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let w = edges[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Incremental row-echelon span over the rationals, for membership tests.
pub struct QSpan {
    ncols: usize,
    /// Echelon rows, each normalized to a unit pivot.
    rows: Vec<(usize, Vec<crate::scalar::Rat>)>,
}

impl QSpan {
    pub fn new(ncols: usize) -> Self {
        QSpan {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [crate::scalar::Rat]) {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for c in *p..self.ncols {
                    let t = &row[c] * &f;
                    v[c] = &v[c] - &t;
                }
            }
        }
    }

    /// Add a vector; returns true when it enlarged the span.
    pub fn insert(&mut self, mut v: Vec<crate::scalar::Rat>) -> bool {
        assert_eq!(v.len(), self.ncols);
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = v[p].clone();
        for c in p..self.ncols {
            v[c] = &v[c] / &inv;
        }
        self.rows.push((p, v));
        self.rows.sort_by_key(|(p, _)| *p);
        true
    }

    pub fn contains(&self, v: &[crate::scalar::Rat]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|c| c.is_zero())
    }
}

/// Kahn's algorithm on the SCC condensation with a smallest-row-first heap.
fn topo_order_blocks(sccs: Vec<Vec<usize>>, edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n_rows = edges.len();
    let mut comp_of = vec![usize::MAX; n_rows];
    for (k, comp) in sccs.iter().enumerate() {
        for &r in comp {
            comp_of[r] = k;
        }
    }
    let nc = sccs.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nc];
    let mut indegree = vec![0usize; nc];
    for (r, outs) in edges.iter().enumerate() {
        for &r2 in outs {
            let (a, b) = (comp_of[r], comp_of[r2]);
            if a != b && !succ[a].contains(&b) {
                succ[a].push(b);
                indegree[b] += 1;
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    for k in 0..nc {
        if indegree[k] == 0 {
            heap.push(Reverse((sccs[k][0], k)));
        }
    }
    let mut out = Vec::with_capacity(nc);
    while let Some(Reverse((_, k))) = heap.pop() {
        out.push(sccs[k].clone());
        for &b in &succ[k] {
            indegree[b] -= 1;
            if indegree[b] == 0 {
                heap.push(Reverse((sccs[b][0], b)));
            }
        }
    }
    debug_assert_eq!(out.len(), nc);
    out
}

fn permutation_sign(perm: &[usize]) -> i8 {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut sign = 1i8;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            v = perm[v];
            len += 1;
        }
        if len.is_multiple_of(2) {
            sign = -sign;
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamRing;
    use crate::poly::ParamPoly;
    use crate::scalar::Rat;
    use proptest::prelude::*;

    fn rat(n: i64) -> Rat {
        crate::scalar::Scalar::from_i64(n)
    }

    #[test]
    fn identity_three() {
        let m = Mat::from_fn(3, 3, |r, c| if r == c { rat(1) } else { rat(0) });
        let out = ff_rank_det(&m);
        assert_eq!(out.rank, 3);
        assert_eq!(out.det, Some(rat(1)));
        assert_eq!(out.pivots, vec![rat(1), rat(1), rat(1)]);
    }

    #[test]
    fn diagonal_param_matrix() {
        let ring = ParamRing::for_degree(3).unwrap();
        let c1a = ParamPoly::<Rat>::param(ring.clone(), ring.c_1a());
        let czb = ParamPoly::<Rat>::param(ring.clone(), ring.c_zb());
        let zero = ParamPoly::<Rat>::zero(ring.clone());
        let m = Mat::from_rows(vec![
            vec![c1a.clone(), zero.clone()],
            vec![zero.clone(), czb.clone()],
        ]);
        let out = ff_rank_det(&m);
        assert_eq!(out.rank, 2);
        assert_eq!(out.det, Some(&c1a * &czb));
        assert_eq!(out.pivots, vec![c1a.clone(), &c1a * &czb]);
    }

    #[test]
    fn singular_matrix_detected() {
        let m = Mat::from_fn(3, 3, |r, c| rat((r + c) as i64));
        let out = ff_rank_det(&m);
        assert_eq!(out.rank, 2);
        assert_eq!(out.det, Some(rat(0)));
    }

    fn det_by_cofactor(m: &Mat<Rat>) -> Rat {
        let n = m.rows();
        if n == 0 {
            return rat(1);
        }
        if n == 1 {
            return m.at(0, 0).clone();
        }
        let mut total = rat(0);
        for c in 0..n {
            if m.at(0, c).is_zero() {
                continue;
            }
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&x| x != c).collect();
            let minor = det_by_cofactor(&m.submatrix(&rows, &cols));
            let term = m.at(0, c).clone() * minor;
            total = if c % 2 == 0 { total + term } else { total - term };
        }
        total
    }

    #[test]
    fn symbolic_rank_agrees_with_specialization_rank() {
        // Schwartz-Zippel style confidence check: the exact symbolic rank
        // must agree with the generic specialized rank over >= 20 seeds.
        use crate::params::{random_assignment, Assignment};
        use crate::scalar::{Fp62, SPECIALIZATION_PRIME};
        use rand::{Rng, SeedableRng};
        let ring = ParamRing::for_degree(4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let params: Vec<_> = ring.params().collect();
        for case in 0..6 {
            let m = Mat::from_fn(4, 4, |_, _| match rng.gen_range(0..4) {
                0 => ParamPoly::<Rat>::zero(ring.clone()),
                1 => ParamPoly::int(ring.clone(), rng.gen_range(-2..3)),
                _ => {
                    let p = params[rng.gen_range(0..params.len())];
                    ParamPoly::param(ring.clone(), p)
                }
            });
            let symbolic = ff_rank_det(&m).rank;
            let mut generic_rank = 0usize;
            for seed in 0..22u64 {
                let asn: Assignment<Fp62> =
                    random_assignment::<SPECIALIZATION_PRIME>(ring.clone(), 1000 * case + seed);
                let spec = m.map(|e| e.to_fp::<SPECIALIZATION_PRIME>().evaluate(&asn).unwrap());
                generic_rank = generic_rank.max(bareiss_dense(&spec).rank);
            }
            assert_eq!(symbolic, generic_rank, "case {case}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dense_and_block_routes_agree_with_cofactor(
            entries in proptest::collection::vec(-3i64..=3, 25),
            density in proptest::collection::vec(0u8..4, 25),
        ) {
            let m = Mat::from_fn(5, 5, |r, c| {
                let k = r * 5 + c;
                if density[k] == 0 { rat(0) } else { rat(entries[k]) }
            });
            let reference = det_by_cofactor(&m);
            let dense = bareiss_dense(&m).det.unwrap();
            prop_assert_eq!(&dense, &reference);
            let (sign, factors) = block_det(&m);
            let blocked = if sign == 0 {
                rat(0)
            } else {
                let mut p = rat(if sign < 0 { -1 } else { 1 });
                for f in factors { p = p * f; }
                p
            };
            // the block route reports zero exactly when det is zero
            prop_assert_eq!(blocked, reference);
        }

        #[test]
        fn block_and_dense_dets_agree_on_parametric_matrices(
            picks in proptest::collection::vec(0u8..6, 16),
        ) {
            let ring = ParamRing::for_degree(3).unwrap();
            let m = Mat::from_fn(4, 4, |r, c| {
                let params: Vec<_> = ring.params().collect();
                match picks[r * 4 + c] {
                    0 | 1 => ParamPoly::<Rat>::zero(ring.clone()),
                    2 => ParamPoly::one(ring.clone()),
                    k => ParamPoly::param(ring.clone(), params[(k as usize) % params.len()]),
                }
            });
            let dense = bareiss_dense(&m).det.unwrap();
            let (sign, factors) = block_det(&m);
            let blocked = if sign == 0 {
                ParamPoly::zero(ring.clone())
            } else {
                let mut p = ParamPoly::int(ring.clone(), i64::from(sign));
                for f in factors {
                    p = &p * &f;
                }
                p
            };
            prop_assert_eq!(blocked, dense);
        }

        #[test]
        fn rank_matches_over_rationals(
            entries in proptest::collection::vec(-2i64..=2, 12),
        ) {
            let m = Mat::from_fn(3, 4, |r, c| rat(entries[r * 4 + c]));
            let out = bareiss_dense(&m);
            // cross-check rank with a plain rational row reduction
            let mut rows: Vec<Vec<Rat>> = (0..3)
                .map(|r| (0..4).map(|c| m.at(r, c).clone()).collect())
                .collect();
            let mut rank = 0;
            for col in 0..4 {
                if let Some(p) = (rank..3).find(|&r| !rows[r][col].is_zero()) {
                    rows.swap(rank, p);
                    for r in 0..3 {
                        if r != rank && !rows[r][col].is_zero() {
                            let f = &rows[r][col] / &rows[rank][col];
                            for c2 in 0..4 {
                                let t = &rows[rank][c2] * &f;
                                rows[r][c2] = &rows[r][c2] - &t;
                            }
                        }
                    }
                    rank += 1;
                }
            }
            prop_assert_eq!(out.rank, rank);
        }
    }
}
