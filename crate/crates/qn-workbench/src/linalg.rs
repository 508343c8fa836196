//! Exact sparse linear algebra over the runtime-chosen field.
//!
//! Matrices are stored column-major with rows sorted inside each column.
//! `rank` runs a sparsity-guided Gaussian elimination (pick the lightest
//! column, pivot on a `±1` entry in the lightest row when one exists), which
//! keeps the very sparse matrices arising from rewriting-system slices close
//! to linear time. `kernel_basis` computes the canonical echelonized basis of
//! the right kernel via row-reduced echelon form and is meant for the smaller
//! matrices (relation spaces, resolution slices at low degree).

use crate::scalar::Scalar;
use std::collections::{BinaryHeap, HashSet};

/// A sparse vector: strictly increasing indices, nonzero coefficients.
pub type SparseVec = Vec<(u32, Scalar)>;

#[derive(Clone, Debug)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(n_rows: usize, n_cols: usize) -> SparseMatrix {
        SparseMatrix {
            n_rows,
            n_cols,
            cols: vec![Vec::new(); n_cols],
        }
    }

    /// Build from (row, col, value) triplets; duplicate positions are summed
    /// and exact zeros dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (u32, u32, Scalar)>,
    ) -> SparseMatrix {
        let mut cols: Vec<Vec<(u32, Scalar)>> = vec![Vec::new(); n_cols];
        for (r, c, v) in triplets {
            assert!((r as usize) < n_rows && (c as usize) < n_cols, "entry out of range");
            cols[c as usize].push((r, v));
        }
        for col in &mut cols {
            *col = canonical_vec(std::mem::take(col));
        }
        SparseMatrix { n_rows, n_cols, cols }
    }

    /// Grow the matrix by one column given as (row, value) entries (summed,
    /// zeros dropped). Returns the new column's index.
    pub fn push_col(&mut self, entries: Vec<(u32, Scalar)>) -> usize {
        let col = canonical_vec(entries);
        if let Some((r, _)) = col.last() {
            assert!((*r as usize) < self.n_rows, "entry out of range");
        }
        self.cols.push(col);
        self.n_cols += 1;
        self.n_cols - 1
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn col(&self, j: usize) -> &SparseVec {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut cols: Vec<SparseVec> = vec![Vec::new(); self.n_rows];
        for (j, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                cols[*r as usize].push((j as u32, v.clone()));
            }
        }
        // each new column is already sorted because j increases
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            cols,
        }
    }

    /// Matrix-vector product (for verification).
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut acc: Vec<(u32, Scalar)> = Vec::new();
        for (j, c) in v {
            for (r, a) in &self.cols[*j as usize] {
                acc.push((*r, a.mul(c)));
            }
        }
        canonical_vec(acc)
    }

    /// Exact rank by sparsity-guided elimination.
    pub fn rank(&self) -> usize {
        Eliminator::new(self).run()
    }

    /// Canonical basis of the right kernel `{v : M v = 0}`, echelonized so
    /// that each basis vector has coefficient 1 at "its" free column and the
    /// basis is uniquely determined by the matrix.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        // Row-reduce a row-major copy.
        let mut rows: Vec<SparseVec> = vec![Vec::new(); self.n_rows];
        for (j, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                rows[*r as usize].push((j as u32, v.clone()));
            }
        }
        let mut reduced: Vec<SparseVec> = Vec::new(); // rows with distinct pivot cols
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            loop {
                let Some((lead, lc)) = row.first().map(|(c, v)| (*c, v.clone())) else {
                    break;
                };
                match reduced.binary_search_by_key(&lead, |r| r[0].0) {
                    Ok(i) => {
                        // cancel the leading entry against the pivot row
                        let factor = lc.neg(); // pivot rows are monic
                        row = axpy(&row, &factor, &reduced[i]);
                    }
                    Err(i) => {
                        let inv = lc.inv();
                        let monic: SparseVec =
                            row.iter().map(|(c, v)| (*c, v.mul(&inv))).collect();
                        reduced.insert(i, monic);
                        break;
                    }
                }
            }
        }
        // back-substitute to full RREF
        for i in (0..reduced.len()).rev() {
            let mut row = std::mem::take(&mut reduced[i]);
            for k in i + 1..reduced.len() {
                let pivot_col = reduced[k][0].0;
                if let Ok(pos) = row.binary_search_by_key(&pivot_col, |(c, _)| *c) {
                    let factor = row[pos].1.neg();
                    row = axpy(&row, &factor, &reduced[k]);
                }
            }
            reduced[i] = row;
        }
        let pivot_cols: Vec<u32> = reduced.iter().map(|r| r[0].0).collect();
        let pivot_set: HashSet<u32> = pivot_cols.iter().copied().collect();
        let mut basis = Vec::new();
        for f in 0..self.n_cols as u32 {
            if pivot_set.contains(&f) {
                continue;
            }
            let mut v: SparseVec = vec![(f, one_like(self))];
            for row in &reduced {
                if let Ok(pos) = row.binary_search_by_key(&f, |(c, _)| *c) {
                    v.push((row[0].0, row[pos].1.neg()));
                }
            }
            v.sort_by_key(|(c, _)| *c);
            basis.push(v);
        }
        basis
    }
}

fn one_like(m: &SparseMatrix) -> Scalar {
    // The field is recovered from any entry; an all-zero matrix has full
    // kernel with unit vectors, where a bare rational 1 is only used to tag
    // coordinates, so defaulting to rationals is harmless there.
    m.cols
        .iter()
        .flat_map(|c| c.iter())
        .next()
        .map(|(_, v)| v.field().one())
        .unwrap_or_else(|| crate::scalar::FieldSpec::Rational.one())
}

/// `a + factor * b` on sparse vectors (sorted merge).
pub fn axpy(a: &SparseVec, factor: &Scalar, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0, b[j].1.mul(factor)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = a[i].1.add(&b[j].1.mul(factor));
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for (c, v) in &b[j..] {
        out.push((*c, v.mul(factor)));
    }
    out
}

fn canonical_vec(mut entries: Vec<(u32, Scalar)>) -> SparseVec {
    entries.sort_by_key(|(r, _)| *r);
    let mut out: Vec<(u32, Scalar)> = Vec::with_capacity(entries.len());
    for (r, v) in entries {
        if let Some(last) = out.last_mut() {
            if last.0 == r {
                last.1 = last.1.add(&v);
                continue;
            }
        }
        out.push((r, v));
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// Destructive elimination state for `rank`.
struct Eliminator {
    cols: Vec<SparseVec>,
    col_alive: Vec<bool>,
    row_alive: Vec<bool>,
    /// for each row, the live columns with a nonzero entry there
    row_cols: Vec<HashSet<u32>>,
    /// min-heap of (nnz, col); entries may be stale and are re-checked
    queue: BinaryHeap<std::cmp::Reverse<(u32, u32)>>,
}

impl Eliminator {
    fn new(m: &SparseMatrix) -> Eliminator {
        let mut row_cols = vec![HashSet::new(); m.n_rows];
        let mut queue = BinaryHeap::new();
        for (j, col) in m.cols.iter().enumerate() {
            for (r, _) in col {
                row_cols[*r as usize].insert(j as u32);
            }
            if !col.is_empty() {
                queue.push(std::cmp::Reverse((col.len() as u32, j as u32)));
            }
        }
        Eliminator {
            cols: m.cols.clone(),
            col_alive: vec![true; m.n_cols],
            row_alive: vec![true; m.n_rows],
            row_cols,
            queue,
        }
    }

    fn run(mut self) -> usize {
        let mut rank = 0;
        while let Some(std::cmp::Reverse((nnz, c))) = self.queue.pop() {
            let c = c as usize;
            if !self.col_alive[c] || self.cols[c].len() as u32 != nnz {
                continue; // stale entry
            }
            if self.cols[c].is_empty() {
                continue;
            }
            rank += 1;
            self.pivot_step(c);
        }
        rank
    }

    /// Use column `c` as pivot: choose its best row, cancel that row from all
    /// other columns, then retire both the column and the row.
    fn pivot_step(&mut self, c: usize) {
        let pivot_row = self.cols[c]
            .iter()
            .map(|(r, v)| (*r, v))
            .min_by_key(|(r, v)| (!v.is_pm_one(), self.row_cols[*r as usize].len(), *r))
            .map(|(r, _)| r)
            .expect("pivot column is nonempty");
        let pivot_val = self.cols[c]
            .iter()
            .find(|(r, _)| *r == pivot_row)
            .map(|(_, v)| v.clone())
            .unwrap();
        let pivot_col = std::mem::take(&mut self.cols[c]);
        self.col_alive[c] = false;
        for (r, _) in &pivot_col {
            self.row_cols[*r as usize].remove(&(c as u32));
        }

        let victims: Vec<u32> = self.row_cols[pivot_row as usize].iter().copied().collect();
        for c2 in victims {
            let c2 = c2 as usize;
            debug_assert!(self.col_alive[c2]);
            let b = self.cols[c2]
                .binary_search_by_key(&pivot_row, |(r, _)| *r)
                .map(|pos| self.cols[c2][pos].1.clone())
                .expect("row index is exact");
            let factor = b.div(&pivot_val).neg();
            let old = std::mem::take(&mut self.cols[c2]);
            let new = axpy(&old, &factor, &pivot_col);
            // reconcile row membership for rows whose entry appeared/vanished
            let mut i = 0;
            let mut j = 0;
            while i < old.len() || j < new.len() {
                let ro = old.get(i).map(|(r, _)| *r);
                let rn = new.get(j).map(|(r, _)| *r);
                match (ro, rn) {
                    (Some(a), Some(b)) if a == b => {
                        i += 1;
                        j += 1;
                    }
                    (Some(a), None) => {
                        self.row_cols[a as usize].remove(&(c2 as u32));
                        i += 1;
                    }
                    (None, Some(b)) => {
                        self.row_cols[b as usize].insert(c2 as u32);
                        j += 1;
                    }
                    (Some(a), Some(b)) if a < b => {
                        self.row_cols[a as usize].remove(&(c2 as u32));
                        i += 1;
                    }
                    (Some(_), Some(b)) => {
                        self.row_cols[b as usize].insert(c2 as u32);
                        j += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            self.cols[c2] = new;
            debug_assert!(self.cols[c2]
                .binary_search_by_key(&pivot_row, |(r, _)| *r)
                .is_err());
            if !self.cols[c2].is_empty() {
                self.queue
                    .push(std::cmp::Reverse((self.cols[c2].len() as u32, c2 as u32)));
            }
        }
        self.row_alive[pivot_row as usize] = false;
        self.row_cols[pivot_row as usize].clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldSpec;
    use proptest::prelude::*;

    fn mat(n_rows: usize, n_cols: usize, entries: &[(u32, u32, i64)], f: FieldSpec) -> SparseMatrix {
        SparseMatrix::from_triplets(
            n_rows,
            n_cols,
            entries.iter().map(|(r, c, v)| (*r, *c, f.integer(*v))),
        )
    }

    #[test]
    fn rank_of_small_fixtures() {
        let f = FieldSpec::Rational;
        // identity 3x3
        let m = mat(3, 3, &[(0, 0, 1), (1, 1, 1), (2, 2, 1)], f);
        assert_eq!(m.rank(), 3);
        // rank-1 outer product
        let m = mat(2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4)], f);
        assert_eq!(m.rank(), 1);
        // zero matrix
        assert_eq!(SparseMatrix::new(4, 5).rank(), 0);
        // needs fraction arithmetic: [[2,1],[3,2]] has det 1
        let m = mat(2, 2, &[(0, 0, 2), (0, 1, 1), (1, 0, 3), (1, 1, 2)], f);
        assert_eq!(m.rank(), 2);
        // cancellation drops rank: [[1,2],[2,4]] plus an independent row
        let m = mat(3, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4), (2, 1, 7)], f);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn kernel_of_small_fixtures() {
        let f = FieldSpec::Rational;
        // x + y + z = 0 has a 2-dimensional kernel
        let m = mat(1, 3, &[(0, 0, 1), (0, 1, 1), (0, 2, 1)], f);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.apply(v).is_empty());
        }
        // echelonized: each vector is 1 at its own free column
        assert_eq!(k[0][1], (1, f.one()));
        assert_eq!(k[1][1], (2, f.one()));
        // full-rank square matrix has trivial kernel
        let m = mat(2, 2, &[(0, 0, 1), (1, 1, 3)], f);
        assert!(m.kernel_basis().is_empty());
        // zero matrix: kernel is everything
        let m = SparseMatrix::new(2, 3);
        assert_eq!(m.kernel_basis().len(), 3);
    }

    #[test]
    fn rank_over_prime_field() {
        let f = FieldSpec::Fp(5);
        // [[1,2],[3,6]] is singular over any field; [[1,2],[3,1]] has det -5 = 0 mod 5
        let m = mat(2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 6)], f);
        assert_eq!(m.rank(), 1);
        let m = mat(2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 1)], f);
        assert_eq!(m.rank(), 1); // det = 1 - 6 = -5
        let m = mat(2, 2, &[(0, 0, 1), (0, 1, 2), (1, 0, 3), (1, 1, 1)], FieldSpec::Rational);
        assert_eq!(m.rank(), 2); // but nonsingular over the rationals
    }

    fn arb_matrix() -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
        // entries in -2..=2 on a grid of at most 5x5 keeps all minors below
        // any practical prime, so ranks agree across fields
        prop::collection::vec((0u32..5, 0u32..5, -2i64..=2), 0..18)
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(entries in arb_matrix()) {
            let m = mat(5, 5, &entries, FieldSpec::Rational);
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn rank_plus_nullity_is_cols(entries in arb_matrix()) {
            let m = mat(5, 5, &entries, FieldSpec::Rational);
            let k = m.kernel_basis();
            prop_assert_eq!(m.rank() + k.len(), m.n_cols());
            for v in &k {
                prop_assert!(m.apply(v).is_empty());
            }
        }

        #[test]
        fn rank_agrees_across_fields(entries in arb_matrix()) {
            // minors of a 5x5 matrix with entries in -2..=2 are bounded by
            // 5! * 2^5 = 3840 < 32003, so no nonzero minor vanishes mod p
            let mq = mat(5, 5, &entries, FieldSpec::Rational);
            let mp = mat(5, 5, &entries, FieldSpec::Fp(32003));
            prop_assert_eq!(mq.rank(), mp.rank());
        }

        #[test]
        fn kernel_basis_is_deterministic(entries in arb_matrix()) {
            let m = mat(5, 5, &entries, FieldSpec::Rational);
            let k1 = m.kernel_basis();
            let k2 = m.kernel_basis();
            prop_assert_eq!(&k1, &k2);
            // every vector contains a unit coordinate (its free column)
            for v in &k1 {
                prop_assert!(v.iter().any(|(_, c)| c.is_one()));
            }
        }
    }
}
