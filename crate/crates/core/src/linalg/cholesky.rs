//! Sparse Cholesky factorizations: exact (fill-reducing ordering, up-looking)
//! and incomplete with zero fill.

use log::warn;

use super::sparse::{SparseMatrix, TripletBuilder};
use crate::error::{Error, Result};

pub(super) const NONE: usize = usize::MAX;

/// Lower-triangular factor `L` of `P A Pᵀ = L Lᵀ`, stored by columns with the
/// diagonal first in each column.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Fill-reducing ordering applied before the exact factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    #[default]
    ApproximateMinimumDegree,
}

fn check_square(a: &SparseMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Cholesky needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn amd_order(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let control = amd::Control::default();
    match amd::order(n, a.row_offsets(), a.col_indices(), &control) {
        Ok((p, _, _)) => p,
        Err(status) => {
            warn!("AMD ordering failed ({status:?}); using natural order");
            (0..n).collect()
        }
    }
}

/// Ordering, permuted upper triangle, elimination tree and column pointers
/// of the factor.
pub(super) struct Symbolic {
    pub n: usize,
    pub perm: Vec<usize>,
    /// Column `k` holds `C[i, k]`, `i <= k`, of `C = P A Pᵀ`.
    pub upper: Vec<Vec<(usize, f64)>>,
    pub parent: Vec<usize>,
    pub col_ptr: Vec<usize>,
}

impl Symbolic {
    pub fn analyze(a: &SparseMatrix, ordering: Ordering) -> Result<Self> {
        check_square(a)?;
        let n = a.nrows();
        let perm = match ordering {
            Ordering::Natural => (0..n).collect(),
            Ordering::ApproximateMinimumDegree => amd_order(a),
        };
        let mut inv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }

        let mut upper: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for k in 0..n {
            let (cols, vals) = a.row(perm[k]);
            let mut col: Vec<(usize, f64)> = cols
                .iter()
                .zip(vals)
                .map(|(&c, &v)| (inv[c], v))
                .filter(|&(i, _)| i <= k)
                .collect();
            col.sort_unstable_by_key(|e| e.0);
            upper.push(col);
        }

        // elimination tree
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &(i0, _) in &upper[k] {
                let mut i = i0;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        // column counts from row patterns
        let mut flag = vec![NONE; n];
        let mut stack = vec![0usize; n];
        let mut path = vec![0usize; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &upper[k], &parent, &mut flag, &mut stack, &mut path);
            for &i in &stack[top..n] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        Ok(Self {
            n,
            perm,
            upper,
            parent,
            col_ptr,
        })
    }
}

impl CholeskyFactor {
    /// Exact factorization with the default (AMD) ordering.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        Self::factor_with(a, Ordering::default())
    }

    pub fn factor_with(a: &SparseMatrix, ordering: Ordering) -> Result<Self> {
        let sym = Symbolic::analyze(a, ordering)?;
        let n = sym.n;
        let Symbolic {
            perm,
            upper,
            parent,
            col_ptr,
            ..
        } = sym;
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut next = col_ptr[..n].to_vec();
        let mut flag = vec![NONE; n];
        let mut stack = vec![0usize; n];
        let mut path = vec![0usize; n];

        let mut x = vec![0.0; n];
        for k in 0..n {
            let top = ereach(k, &upper[k], &parent, &mut flag, &mut stack, &mut path);
            for &(i, v) in &upper[k] {
                x[i] += v;
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..n] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = 0.0;
                for p in col_ptr[i] + 1..next[i] {
                    x[row_idx[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    row: perm[k],
                    pivot: d,
                });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
        }

        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// IC(0): the factor keeps exactly the lower-triangular pattern of `a`.
    ///
    /// A failed pivot triggers a diagonal shift of `1e-8 · max|diag|`, growing
    /// tenfold per retry, for at most eight retries.
    pub fn incomplete_zero_fill(a: &SparseMatrix) -> Result<Self> {
        check_square(a)?;
        let n = a.nrows();
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::NotPositiveDefinite { row: i, pivot: 0.0 });
        }
        let max_diag = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let mut shift = 0.0;
        let mut last_err = None;
        for attempt in 0..=8 {
            match ic0_rows(a, shift) {
                Ok(lower) => {
                    if attempt > 0 {
                        warn!("IC(0) needed a diagonal shift of {shift:e}");
                    }
                    // column storage of L is the row storage of Lᵀ
                    let lt = lower.transpose();
                    return Ok(Self {
                        n,
                        perm: (0..n).collect(),
                        col_ptr: lt.row_offsets().to_vec(),
                        row_idx: lt.col_indices().to_vec(),
                        values: lt.values().to_vec(),
                    });
                }
                Err(e) => {
                    last_err = Some(e);
                    shift = if shift == 0.0 {
                        1e-8 * max_diag
                    } else {
                        shift * 10.0
                    };
                }
            }
        }
        Err(last_err.unwrap())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// `L` in the permuted numbering.
    pub fn lower(&self) -> SparseMatrix {
        let mut b = TripletBuilder::with_capacity(self.n, self.n, self.nnz());
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                b.push(self.row_idx[p], j, self.values[p]);
            }
        }
        b.build()
    }

    /// `Pᵀ L Lᵀ P` in the original numbering.
    pub fn reconstruct(&self) -> SparseMatrix {
        let l = self.lower();
        let lt = l.transpose();
        let mut b = TripletBuilder::new(self.n, self.n);
        // (L Lᵀ)[i, j] = sum_k L[i, k] L[j, k]
        for i in 0..self.n {
            let (ci, vi) = l.row(i);
            for &k in ci {
                let (rows_k, vals_k) = lt.row(k);
                let lik = vi[ci.binary_search(&k).unwrap()];
                for (&j, &ljk) in rows_k.iter().zip(vals_k) {
                    b.push(self.perm[i], self.perm[j], lik * ljk);
                }
            }
        }
        b.build()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.n, "Cholesky solve: rhs has wrong length");
        assert_eq!(x.len(), self.n, "Cholesky solve: output has wrong length");
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..self.n {
            let start = self.col_ptr[j];
            y[j] /= self.values[start];
            let yj = y[j];
            for p in start + 1..self.col_ptr[j + 1] {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        for j in (0..self.n).rev() {
            let start = self.col_ptr[j];
            let mut acc = y[j];
            for p in start + 1..self.col_ptr[j + 1] {
                acc -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = acc / self.values[start];
        }
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
    }
}

/// Nonzero pattern of row `k` of `L`, returned in `stack[top..n]` in
/// topological order.
pub(super) fn ereach(
    k: usize,
    upper_col: &[(usize, f64)],
    parent: &[usize],
    flag: &mut [usize],
    stack: &mut [usize],
    path: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    flag[k] = k;
    for &(i0, _) in upper_col {
        let mut i = i0;
        if i >= k {
            continue;
        }
        let mut len = 0;
        while flag[i] != k {
            path[len] = i;
            len += 1;
            flag[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = path[len];
        }
    }
    top
}

fn ic0_rows(a: &SparseMatrix, shift: f64) -> Result<SparseMatrix> {
    let n = a.nrows();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for i in 0..n {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            if j < i {
                cols.push(j);
                vals.push(x);
            }
        }
        cols.push(i);
        vals.push(a.get(i, i) + shift);
        offsets.push(cols.len());
    }

    let mut work = vec![0.0; n];
    for i in 0..n {
        let (start, end) = (offsets[i], offsets[i + 1]);
        for p in start..end - 1 {
            let j = cols[p];
            let mut s = vals[p];
            for q in offsets[j]..offsets[j + 1] - 1 {
                s -= vals[q] * work[cols[q]];
            }
            let l = s / vals[offsets[j + 1] - 1];
            vals[p] = l;
            work[j] = l;
        }
        let mut d = vals[end - 1];
        for p in start..end - 1 {
            d -= vals[p] * vals[p];
            work[cols[p]] = 0.0;
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { row: i, pivot: d });
        }
        vals[end - 1] = d.sqrt();
    }
    SparseMatrix::from_csr(n, n, offsets, cols, vals)
}
