//! Compressed-row sparse matrices and a coordinate accumulator for assembly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Compressed-row matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator. Duplicates are summed on conversion.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::new(),
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::with_capacity(capacity),
            cols: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.nrows && col < self.ncols,
            "triplet ({row}, {col}) outside {}x{}",
            self.nrows,
            self.ncols
        );
        self.rows.push(row);
        self.cols.push(col);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Converts to compressed rows. Entries are summed in insertion order,
    /// so the result is bit-reproducible for a fixed push sequence.
    pub fn build(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.rows {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        // stable bucket sort by row
        let mut next = counts.clone();
        let mut order = vec![0usize; self.values.len()];
        for (k, &r) in self.rows.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        let mut col_indices = Vec::with_capacity(self.values.len());
        let mut values = Vec::with_capacity(self.values.len());
        row_offsets.push(0);
        let mut scratch: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            scratch.clear();
            scratch.extend_from_slice(&order[counts[r]..counts[r + 1]]);
            // stable: equal columns keep insertion order
            scratch.sort_by_key(|&k| self.cols[k]);
            let mut last_col = usize::MAX;
            for &k in &scratch {
                let c = self.cols[k];
                if c == last_col {
                    *values.last_mut().unwrap() += self.values[k];
                } else {
                    col_indices.push(c);
                    values.push(self.values[k]);
                    last_col = c;
                }
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

impl SparseMatrix {
    /// Builds a matrix from raw compressed-row arrays, validating the layout.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 || row_offsets[0] != 0 {
            return Err(Error::InvalidArgument("malformed row offsets".into()));
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::InvalidArgument("offsets and values disagree".into()));
        }
        for r in 0..nrows {
            if row_offsets[r + 1] < row_offsets[r] {
                return Err(Error::InvalidArgument("row offsets not monotone".into()));
            }
            let cols = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "row {r}: column indices not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::InvalidArgument(format!(
                    "row {r}: column out of range"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Keeps entries with `|a_ij| > 0`; used mostly by tests.
    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut builder = TripletBuilder::new(dense.nrows(), dense.ncols());
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                let v = dense[(i, j)];
                if v != 0.0 {
                    builder.push(i, j, v);
                }
            }
        }
        builder.build()
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        y
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x has wrong length");
        assert_eq!(y.len(), self.nrows, "spmv: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
    }

    /// `y += alpha * A x`.
    pub fn spmv_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x has wrong length");
        assert_eq!(y.len(), self.nrows, "spmv: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi += alpha * acc;
        }
    }

    /// `y += alpha * Aᵀ x`.
    pub fn spmv_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows, "spmv_transpose: x has wrong length");
        assert_eq!(y.len(), self.ncols, "spmv_transpose: y has wrong length");
        for i in 0..self.nrows {
            let xi = alpha * x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let c = self.col_indices[k];
                col_indices[next[c]] = i;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    pub fn scaled(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha A + beta B` for matrices of equal shape.
    pub fn add(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<SparseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "add: {}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut builder =
            TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (m, s) in [(self, alpha), (other, beta)] {
            for i in 0..m.nrows {
                let (cols, vals) = m.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    builder.push(i, c, s * v);
                }
            }
        }
        Ok(builder.build())
    }

    /// `A · diag(weights) · Aᵀ`, the sparse Gram product used for Schur surrogates.
    pub fn weighted_gram(&self, weights: &[f64]) -> Result<SparseMatrix> {
        if weights.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "weighted_gram: {} weights for {} columns",
                weights.len(),
                self.ncols
            )));
        }
        let at = self.transpose();
        let mut builder = TripletBuilder::new(self.nrows, self.nrows);
        let mut acc = vec![0.0; self.nrows];
        let mut marked = vec![false; self.nrows];
        let mut pattern = Vec::new();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&k, &a_ik) in cols.iter().zip(vals) {
                let w = a_ik * weights[k];
                let (rows_k, vals_k) = at.row(k);
                for (&j, &a_jk) in rows_k.iter().zip(vals_k) {
                    if !marked[j] {
                        marked[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += w * a_jk;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                builder.push(i, j, acc[j]);
                acc[j] = 0.0;
                marked[j] = false;
            }
            pattern.clear();
        }
        Ok(builder.build())
    }

    /// Principal submatrix on `indices`, densified.
    pub fn principal_dense(&self, indices: &[usize]) -> DMatrix<f64> {
        let mut local = vec![usize::MAX; self.ncols];
        for (l, &g) in indices.iter().enumerate() {
            local[g] = l;
        }
        let m = indices.len();
        let mut out = DMatrix::zeros(m, m);
        for (li, &gi) in indices.iter().enumerate() {
            let (cols, vals) = self.row(gi);
            for (&c, &v) in cols.iter().zip(vals) {
                let lj = local[c];
                if lj != usize::MAX {
                    out[(li, lj)] = v;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(i, c)] = v;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        match self.add(1.0, &t, -1.0) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
