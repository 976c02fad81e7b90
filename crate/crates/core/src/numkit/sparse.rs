//! Compressed sparse row storage for complex matrices.
//!
//! Finite element operators in this crate are complex symmetric (`A = Aᵀ`,
//! not Hermitian). Real operators such as the Maxwell system are stored with a
//! zero imaginary part.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numkit::LinearOperator;

/// CSR matrix with sorted, duplicate-free column indices in each row.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<C64>,
}

/// Accumulates `(row, col, value)` entries before compression.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(self) -> Result<ComplexSparseMatrix> {
        csr_from_triplets(self.nrows, self.ncols, &self.entries)
    }
}

/// Compresses a triplet list. Duplicates are summed, explicit zeros are kept.
pub fn csr_from_triplets(
    nrows: usize,
    ncols: usize,
    triplets: &[(usize, usize, C64)],
) -> Result<ComplexSparseMatrix> {
    for &(r, c, _) in triplets {
        if r >= nrows || c >= ncols {
            return Err(Error::Structural(format!(
                "triplet ({r}, {c}) outside {nrows}x{ncols}"
            )));
        }
    }
    // bucket by row, then sort each row by column
    let mut counts = vec![0usize; nrows + 1];
    for &(r, _, _) in triplets {
        counts[r + 1] += 1;
    }
    for i in 0..nrows {
        counts[i + 1] += counts[i];
    }
    let mut next = counts.clone();
    let mut bucket: Vec<(usize, C64)> = vec![(0, C64::new(0.0, 0.0)); triplets.len()];
    for &(r, c, v) in triplets {
        bucket[next[r]] = (c, v);
        next[r] += 1;
    }
    let mut row_offsets = Vec::with_capacity(nrows + 1);
    let mut col_indices = Vec::with_capacity(triplets.len());
    let mut values = Vec::with_capacity(triplets.len());
    row_offsets.push(0);
    for r in 0..nrows {
        let row = &mut bucket[counts[r]..counts[r + 1]];
        row.sort_by_key(|&(c, _)| c);
        let mut last: Option<usize> = None;
        for &(c, v) in row.iter() {
            if last == Some(c) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                last = Some(c);
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(ComplexSparseMatrix { nrows, ncols, row_offsets, col_indices, values })
}

impl ComplexSparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating every invariant.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 || row_offsets[0] != 0 {
            return Err(Error::Structural("row_offsets must have length nrows+1 and start at 0".into()));
        }
        if *row_offsets.last().unwrap() != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::Structural("row_offsets/col_indices/values length mismatch".into()));
        }
        for r in 0..nrows {
            let (a, b) = (row_offsets[r], row_offsets[r + 1]);
            if a > b {
                return Err(Error::Structural(format!("row_offsets decreasing at row {r}")));
            }
            for k in a..b {
                if col_indices[k] >= ncols {
                    return Err(Error::Structural(format!("column {} out of range", col_indices[k])));
                }
                if k > a && col_indices[k] <= col_indices[k - 1] {
                    return Err(Error::Structural(format!("row {r} columns not strictly increasing")));
                }
            }
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_offsets: vec![0; nrows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Column indices and values of one row.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let (a, b) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[a..b], &self.values[a..b])
    }

    /// Stored value at `(r, c)`, zero when not in the pattern.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "matvec: x length");
        assert_eq!(y.len(), self.nrows, "matvec: y length");
        for (r, out) in y.iter_mut().enumerate() {
            let (a, b) = (self.row_offsets[r], self.row_offsets[r + 1]);
            let mut acc = C64::new(0.0, 0.0);
            for k in a..b {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = selfᵀ * x` without forming the transpose.
    pub fn mul_vec_transpose(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![C64::new(0.0, 0.0); self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == C64::new(0.0, 0.0) {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xr;
            }
        }
        y
    }

    /// `y = selfᴴ * x`.
    pub fn mul_vec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![C64::new(0.0, 0.0); self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == C64::new(0.0, 0.0) {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v.conj() * xr;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                col_indices[next[c]] = r;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_offsets: counts, col_indices, values }
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        t.values.iter_mut().for_each(|v| *v = v.conj());
        t
    }

    pub fn conj(&self) -> Self {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v = v.conj());
        t
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v *= alpha);
        t
    }

    /// `alpha * self + beta * other` on the union of both patterns.
    pub fn linear_combination(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Structural("linear_combination: shape mismatch".into()));
        }
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        row_offsets.push(0);
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let take_a = j >= cb.len() || (i < ca.len() && ca[i] < cb[j]);
                let take_b = i >= ca.len() || (j < cb.len() && cb[j] < ca[i]);
                if take_a {
                    col_indices.push(ca[i]);
                    values.push(alpha * va[i]);
                    i += 1;
                } else if take_b {
                    col_indices.push(cb[j]);
                    values.push(beta * vb[j]);
                    j += 1;
                } else {
                    col_indices.push(ca[i]);
                    values.push(alpha * va[i] + beta * vb[j]);
                    i += 1;
                    j += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { nrows: self.nrows, ncols: self.ncols, row_offsets, col_indices, values })
    }

    /// Submatrix `self[rows, cols]`; both index lists map local position to global index.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut local_col = vec![usize::MAX; self.ncols];
        for (l, &g) in cols.iter().enumerate() {
            local_col[g] = l;
        }
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut scratch: Vec<(usize, C64)> = Vec::new();
        for &g in rows {
            scratch.clear();
            let (cs, vs) = self.row(g);
            for (&c, &v) in cs.iter().zip(vs) {
                let l = local_col[c];
                if l != usize::MAX {
                    scratch.push((l, v));
                }
            }
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Self { nrows: rows.len(), ncols: cols.len(), row_offsets, col_indices, values }
    }

    /// `R_j A R_jᵀ` for the index set `dofs`.
    pub fn principal_submatrix(&self, dofs: &[usize]) -> Self {
        self.submatrix(dofs, dofs)
    }

    /// Sparse product `self * other` (row-wise Gustavson).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Structural("matmul: inner dimension mismatch".into()));
        }
        let mut marker = vec![usize::MAX; other.ncols];
        let mut acc = vec![C64::new(0.0, 0.0); other.ncols];
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut touched = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            let (ca, va) = self.row(r);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&c, &b) in cb.iter().zip(vb) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_indices.push(c);
                values.push(acc[c]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self { nrows: self.nrows, ncols: other.ncols, row_offsets, col_indices, values })
    }

    /// Dense product `self * dense`.
    pub fn mul_dense(&self, dense: &Mat<C64>) -> Mat<C64> {
        assert_eq!(self.ncols, dense.nrows());
        let mut out = Mat::<C64>::zeros(self.nrows, dense.ncols());
        for j in 0..dense.ncols() {
            let x = dense.col(j).try_as_col_major().unwrap().as_slice();
            let y = out.col_mut(j).try_as_col_major_mut().unwrap().as_slice_mut();
            self.mul_vec_into(x, y);
        }
        out
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Drops entries with `|v| <= threshold`.
    pub fn from_dense(m: &Mat<C64>, threshold: f64) -> Self {
        let mut b = TripletBuilder::new(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v.norm() > threshold {
                    b.push(i, j, v);
                }
            }
        }
        b.build().expect("indices in range")
    }

    /// `max |A - Aᵀ| <= rel_tol * max |A|` (plain transpose, no conjugation).
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let scale = self.max_abs();
        let t = self.transpose();
        let diff = self
            .linear_combination(C64::new(1.0, 0.0), &t, C64::new(-1.0, 0.0))
            .expect("same shape");
        diff.max_abs() <= rel_tol * scale
    }

    /// `max |A - Aᴴ|`.
    pub fn hermitian_defect(&self) -> f64 {
        let t = self.adjoint();
        self.linear_combination(C64::new(1.0, 0.0), &t, C64::new(-1.0, 0.0))
            .expect("same shape")
            .max_abs()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Replaces rows and columns of `dofs` with identity rows (symmetric elimination).
    pub fn with_identity_rows(&self, dofs: &[usize]) -> Self {
        let mut mask = vec![false; self.nrows];
        for &d in dofs {
            mask[d] = true;
        }
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for r in 0..self.nrows {
            if mask[r] {
                continue;
            }
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                if !mask[c] {
                    b.push(r, c, v);
                }
            }
        }
        for (d, &m) in mask.iter().enumerate() {
            if m {
                b.push(d, d, C64::new(1.0, 0.0));
            }
        }
        b.build().expect("indices in range")
    }

    /// Zeroes rows and columns of `dofs`.
    pub fn with_zero_rows(&self, dofs: &[usize]) -> Self {
        let mut mask = vec![false; self.nrows];
        for &d in dofs {
            mask[d] = true;
        }
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for r in 0..self.nrows {
            if mask[r] {
                continue;
            }
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                if !mask[c] {
                    b.push(r, c, v);
                }
            }
        }
        b.build().expect("indices in range")
    }

    pub(crate) fn to_faer_csc(&self) -> faer::sparse::SparseColMat<usize, C64> {
        let triplets: Vec<faer::sparse::Triplet<usize, usize, C64>> = (0..self.nrows)
            .flat_map(|r| {
                let (cs, vs) = self.row(r);
                cs.iter().zip(vs).map(move |(&c, &v)| faer::sparse::Triplet::new(r, c, v))
            })
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .expect("valid CSR converts to CSC")
    }
}

impl LinearOperator for ComplexSparseMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.mul_vec_into(x, y);
    }
}
