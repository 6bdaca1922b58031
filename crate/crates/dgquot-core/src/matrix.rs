//! Sparse exact matrices and elimination.
//!
//! Matrices are stored as canonically sorted triplet lists and compiled to
//! row-major form on demand for elimination; the Hom spaces downstream grow
//! multiplicatively in the window length, so nothing here is dense.  Over the
//! rationals, elimination is fraction-free: rows are lifted to primitive
//! integer vectors and combined Bareiss-style with exact content removal,
//! which keeps coefficient growth under control.  Over a prime field the
//! engine is ordinary Gauss-Jordan.
//!
//! Reduced row echelon form is unique, so every canonical form derived here
//! (kernels, column-reduced spans, particular solutions) is independent of
//! pivot strategy and deterministic across runs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::scalar::Field;

/// A sparse matrix over an exact field.
///
/// Entries are sorted by `(row, col)`, contain no zeros, and have no
/// duplicate positions, so `==` is semantic equality.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMat<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    entries: Vec<(u32, u32, F::Elem)>,
}

/// Reduced row echelon form: the nonzero rows, each scaled to a unit pivot
/// and fully reduced, ordered by pivot column.
#[derive(Clone, Debug)]
pub struct Rref<F: Field> {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub rows: Vec<Vec<(u32, F::Elem)>>,
}

impl<F: Field> SparseMat<F> {
    pub fn zero(field: F, rows: usize, cols: usize) -> Self {
        SparseMat {
            field,
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let one = field.one();
        let entries = (0..n as u32).map(|i| (i, i, one.clone())).collect();
        SparseMat {
            field,
            rows: n,
            cols: n,
            entries,
        }
    }

    /// Builds from triplets, merging duplicates and dropping zeros.
    pub fn from_triplets(
        field: F,
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, F::Elem)>,
    ) -> Result<Self, Error> {
        let mut ents: Vec<(u32, u32, F::Elem)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows {
                return Err(Error::DimensionMismatch {
                    context: "triplet row",
                    expected: rows,
                    found: r,
                });
            }
            if c >= cols {
                return Err(Error::DimensionMismatch {
                    context: "triplet col",
                    expected: cols,
                    found: c,
                });
            }
            ents.push((r as u32, c as u32, v));
        }
        ents.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(u32, u32, F::Elem)> = Vec::with_capacity(ents.len());
        for (r, c, v) in ents {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => {
                    *lv = field.add(lv, &v);
                }
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|(_, _, v)| !field.is_zero(v));
        Ok(SparseMat {
            field,
            rows,
            cols,
            entries: merged,
        })
    }

    pub fn from_dense(field: F, data: &[Vec<F::Elem>]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (r, row) in data.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (c, v) in row.iter().enumerate() {
                if !field.is_zero(v) {
                    entries.push((r as u32, c as u32, v.clone()));
                }
            }
        }
        SparseMat {
            field,
            rows,
            cols,
            entries,
        }
    }

    /// Builds from dense columns.
    pub fn from_cols(field: F, rows: usize, cols_data: &[Vec<F::Elem>]) -> Self {
        let cols = cols_data.len();
        let mut entries = Vec::new();
        for (c, col) in cols_data.iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged column data");
            for (r, v) in col.iter().enumerate() {
                if !field.is_zero(v) {
                    entries.push((r as u32, c as u32, v.clone()));
                }
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseMat {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &F::Elem)> {
        self.entries
            .iter()
            .map(|(r, c, v)| (*r as usize, *c as usize, v))
    }

    pub fn get(&self, r: usize, c: usize) -> F::Elem {
        let key = (r as u32, c as u32);
        match self
            .entries
            .binary_search_by_key(&key, |&(er, ec, _)| (er, ec))
        {
            Ok(i) => self.entries[i].2.clone(),
            Err(_) => self.field.zero(),
        }
    }

    pub fn col(&self, c: usize) -> Vec<F::Elem> {
        let mut out = vec![self.field.zero(); self.rows];
        for (r, ec, v) in self.entries() {
            if ec == c {
                out[r] = v.clone();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<(u32, u32, F::Elem)> = self
            .entries
            .iter()
            .map(|(r, c, v)| (*c, *r, v.clone()))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        SparseMat {
            field: self.field.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix add",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let all = self
            .entries()
            .map(|(r, c, v)| (r, c, v.clone()))
            .chain(other.entries().map(|(r, c, v)| (r, c, v.clone())));
        SparseMat::from_triplets(self.field.clone(), self.rows, self.cols, all)
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        let f = &self.field;
        let entries = self
            .entries
            .iter()
            .map(|(r, c, v)| (*r as usize, *c as usize, f.mul(v, s)))
            .collect::<Vec<_>>();
        SparseMat::from_triplets(f.clone(), self.rows, self.cols, entries).unwrap()
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.field.neg(&self.field.one()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix mul",
                expected: self.cols,
                found: other.rows,
            });
        }
        let rhs_rows = other.to_row_major();
        let mut triplets = Vec::new();
        for (r, ents) in self.to_row_major().into_iter().enumerate() {
            for (k, v) in ents {
                for (c, w) in &rhs_rows[k as usize] {
                    triplets.push((r, *c as usize, self.field.mul(&v, w)));
                }
            }
        }
        SparseMat::from_triplets(self.field.clone(), self.rows, other.cols, triplets)
    }

    pub fn mul_dense_vec(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>, Error> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.rows];
        for (r, c, e) in self.entries() {
            if !f.is_zero(&v[c]) {
                out[r] = f.axpy(&out[r], e, &v[c]);
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self, Error> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "hstack rows",
                expected: self.rows,
                found: other.rows,
            });
        }
        let shift = self.cols;
        let all = self
            .entries()
            .map(|(r, c, v)| (r, c, v.clone()))
            .chain(other.entries().map(|(r, c, v)| (r, c + shift, v.clone())));
        SparseMat::from_triplets(self.field.clone(), self.rows, self.cols + other.cols, all)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Self) -> Result<Self, Error> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "vstack cols",
                expected: self.cols,
                found: other.cols,
            });
        }
        let shift = self.rows;
        let all = self
            .entries()
            .map(|(r, c, v)| (r, c, v.clone()))
            .chain(other.entries().map(|(r, c, v)| (r + shift, c, v.clone())));
        SparseMat::from_triplets(self.field.clone(), self.rows + other.rows, self.cols, all)
    }

    /// Compiles to row-major form: one sorted `(col, value)` list per row.
    pub fn to_row_major(&self) -> Vec<Vec<(u32, F::Elem)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (r, c, v) in &self.entries {
            rows[*r as usize].push((*c, v.clone()));
        }
        rows
    }

    /// Reduced row echelon form over the field.
    pub fn rref(&self) -> Rref<F> {
        match self.field.as_big_ratio(&self.field.one()) {
            Some(_) => fraction_free_rref(self),
            None => generic_eliminate(self, true),
        }
    }

    /// Rank via forward elimination only.
    pub fn rank(&self) -> usize {
        match self.field.as_big_ratio(&self.field.one()) {
            Some(_) => int_eliminate(self, false).0.len(),
            None => generic_eliminate(self, false).rank,
        }
    }

    /// Rank together with a canonical kernel basis (columns).
    ///
    /// Kernel columns are indexed by the free columns of the reduced echelon
    /// form in ascending order, with a unit in the free position.
    pub fn rank_kernel(&self) -> (usize, SparseMat<F>) {
        let rref = self.rref();
        let f = &self.field;
        let mut is_pivot = vec![false; self.cols];
        for &c in &rref.pivot_cols {
            is_pivot[c] = true;
        }
        let free_cols: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let col_of_free: BTreeMap<usize, usize> = free_cols
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        let mut triplets = Vec::new();
        for (i, &fc) in free_cols.iter().enumerate() {
            triplets.push((fc, i, f.one()));
        }
        for (pi, &pc) in rref.pivot_cols.iter().enumerate() {
            for (c, v) in &rref.rows[pi] {
                if let Some(&i) = col_of_free.get(&(*c as usize)) {
                    triplets.push((pc, i, f.neg(v)));
                }
            }
        }
        let kernel =
            SparseMat::from_triplets(f.clone(), self.cols, free_cols.len(), triplets).unwrap();
        (rref.rank, kernel)
    }

    /// Solves `self * x = b`; `Ok(None)` reports an inconsistent system.
    /// The particular solution sets all free variables to zero.
    pub fn solve(&self, b: &[F::Elem]) -> Result<Option<Vec<F::Elem>>, Error> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "solve rhs",
                expected: self.rows,
                found: b.len(),
            });
        }
        let f = &self.field;
        let bmat = SparseMat::from_cols(f.clone(), self.rows, &[b.to_vec()]);
        let aug = self.hstack(&bmat)?;
        let rref = aug.rref();
        let mut x = vec![f.zero(); self.cols];
        for (pi, &pc) in rref.pivot_cols.iter().enumerate() {
            if pc == self.cols {
                return Ok(None);
            }
            for (c, v) in &rref.rows[pi] {
                if *c as usize == self.cols {
                    x[pc] = v.clone();
                }
            }
        }
        Ok(Some(x))
    }

    /// Canonical basis of the column space: reduced column echelon form.
    /// Two matrices have equal column span iff their canonical bases agree.
    pub fn column_reduced(&self) -> SparseMat<F> {
        let rref = self.transpose().rref();
        let f = &self.field;
        let mut triplets = Vec::new();
        for (i, row) in rref.rows.iter().enumerate() {
            for (c, v) in row {
                triplets.push((*c as usize, i, v.clone()));
            }
        }
        SparseMat::from_triplets(f.clone(), self.rows, rref.rank, triplets).unwrap()
    }

    /// Inverse of a square matrix; `None` when singular.
    pub fn inverse(&self) -> Option<SparseMat<F>> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let f = &self.field;
        let aug = self.hstack(&SparseMat::identity(f.clone(), n)).unwrap();
        let rref = aug.rref();
        if rref.rank < n || rref.pivot_cols.iter().take(n).copied().ne(0..n) {
            return None;
        }
        let mut triplets = Vec::new();
        for (pi, row) in rref.rows.iter().take(n).enumerate() {
            for (c, v) in row {
                let c = *c as usize;
                if c >= n {
                    triplets.push((pi, c - n, v.clone()));
                }
            }
        }
        Some(SparseMat::from_triplets(f.clone(), n, n, triplets).unwrap())
    }
}

// --- generic field engine (prime fields) ---

/// `dst + c * src` on sorted sparse rows.
fn axpy_row<F: Field>(
    f: &F,
    dst: &[(u32, F::Elem)],
    c: &F::Elem,
    src: &[(u32, F::Elem)],
) -> Vec<(u32, F::Elem)> {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        if j >= src.len() || (i < dst.len() && dst[i].0 < src[j].0) {
            out.push(dst[i].clone());
            i += 1;
        } else if i >= dst.len() || src[j].0 < dst[i].0 {
            let v = f.mul(c, &src[j].1);
            if !f.is_zero(&v) {
                out.push((src[j].0, v));
            }
            j += 1;
        } else {
            let v = f.axpy(&dst[i].1, c, &src[j].1);
            if !f.is_zero(&v) {
                out.push((dst[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn entry_at<F: Field>(row: &[(u32, F::Elem)], col: u32) -> Option<F::Elem> {
    row.binary_search_by_key(&col, |&(c, _)| c)
        .ok()
        .map(|i| row[i].1.clone())
}

fn generic_eliminate<F: Field>(m: &SparseMat<F>, full: bool) -> Rref<F> {
    let f = m.field().clone();
    let mut rows = m.to_row_major();
    let nrows = rows.len();
    let mut used = vec![false; nrows];
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();
    for col in 0..m.cols() as u32 {
        // Deterministic pivot: the sparsest eligible row, ties by index.
        // Unused rows are zero in all processed columns, so eligibility is
        // "first entry sits in this column".
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in rows.iter().enumerate() {
            if used[r] {
                continue;
            }
            if row.first().map(|&(c, _)| c) == Some(col) {
                let key = (row.len(), r);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, pr)) = best else { continue };
        used[pr] = true;
        let inv = f.inv(&rows[pr][0].1).expect("nonzero pivot");
        for e in rows[pr].iter_mut() {
            e.1 = f.mul(&e.1, &inv);
        }
        for r in 0..nrows {
            if r == pr || (!full && used[r]) {
                continue;
            }
            let Some(v) = entry_at::<F>(&rows[r], col) else {
                continue;
            };
            let c = f.neg(&v);
            let src = core::mem::take(&mut rows[pr]);
            rows[r] = axpy_row(&f, &rows[r], &c, &src);
            rows[pr] = src;
        }
        pivot_rows.push(pr);
        pivot_cols.push(col as usize);
    }
    let picked = pivot_rows.iter().map(|&r| rows[r].clone()).collect();
    Rref {
        rank: pivot_cols.len(),
        pivot_cols,
        rows: picked,
    }
}

// --- fraction-free engine (characteristic zero) ---

/// A row of big integers, kept primitive (content 1) so entries stay small.
type IntRow = Vec<(u32, BigInt)>;

fn lift_rows<F: Field>(m: &SparseMat<F>) -> Vec<IntRow> {
    let f = m.field();
    let mut dens: Vec<BigInt> = vec![BigInt::one(); m.rows()];
    for (r, _, v) in m.entries() {
        let (_, d) = f.as_big_ratio(v).expect("characteristic zero");
        dens[r] = dens[r].lcm(&d);
    }
    let mut out: Vec<IntRow> = vec![Vec::new(); m.rows()];
    for (r, c, v) in m.entries() {
        let (n, d) = f.as_big_ratio(v).expect("characteristic zero");
        out[r].push((c as u32, n * (&dens[r] / d)));
    }
    for row in &mut out {
        strip_content(row);
    }
    out
}

fn strip_content(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for (_, v) in row.iter_mut() {
        *v = &*v / &g;
    }
}

/// `(p * dst - c * src) / content`: the one-step fraction-free update.
fn combine_int_rows(p: &BigInt, dst: &IntRow, c: &BigInt, src: &IntRow) -> IntRow {
    let mut out: IntRow = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        if j >= src.len() || (i < dst.len() && dst[i].0 < src[j].0) {
            out.push((dst[i].0, p * &dst[i].1));
            i += 1;
        } else if i >= dst.len() || src[j].0 < dst[i].0 {
            out.push((src[j].0, -(c * &src[j].1)));
            j += 1;
        } else {
            let v = p * &dst[i].1 - c * &src[j].1;
            if !v.is_zero() {
                out.push((dst[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    strip_content(&mut out);
    out
}

fn int_eliminate<F: Field>(m: &SparseMat<F>, full: bool) -> (Vec<usize>, Vec<IntRow>) {
    let mut rows = lift_rows(m);
    let nrows = rows.len();
    let mut used = vec![false; nrows];
    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();
    for col in 0..m.cols() as u32 {
        // Prefer unit pivots, then sparse rows; deterministic tie-break.
        let mut best: Option<(bool, usize, usize)> = None;
        for (r, row) in rows.iter().enumerate() {
            if used[r] {
                continue;
            }
            if let Some(&(c0, ref v)) = row.first() {
                if c0 == col {
                    let key = (!v.magnitude().is_one(), row.len(), r);
                    if best.map_or(true, |b| key < b) {
                        best = Some(key);
                    }
                }
            }
        }
        let Some((_, _, pr)) = best else { continue };
        used[pr] = true;
        let p = rows[pr][0].1.clone();
        for r in 0..nrows {
            if r == pr || (!full && used[r]) {
                continue;
            }
            let c = match rows[r].binary_search_by_key(&col, |&(c, _)| c) {
                Ok(i) => rows[r][i].1.clone(),
                Err(_) => continue,
            };
            let src = core::mem::take(&mut rows[pr]);
            rows[r] = combine_int_rows(&p, &rows[r], &c, &src);
            rows[pr] = src;
        }
        pivot_rows.push(pr);
        pivot_cols.push(col as usize);
    }
    let picked = pivot_rows.iter().map(|&r| rows[r].clone()).collect();
    (pivot_cols, picked)
}

fn fraction_free_rref<F: Field>(m: &SparseMat<F>) -> Rref<F> {
    let f = m.field().clone();
    let (pivot_cols, int_rows) = int_eliminate(m, true);
    let rows = int_rows
        .into_iter()
        .map(|row| {
            let p = row[0].1.clone();
            row.into_iter()
                .map(|(c, v)| (c, f.from_big_ratio(v, p.clone())))
                .collect()
        })
        .collect();
    Rref {
        rank: pivot_cols.len(),
        pivot_cols,
        rows,
    }
}
