//! Sparse `L D Lᵀ` for symmetric quasi-definite matrices
//! `[[A, Bᵀ], [B, −C]]` with `A`, `C` SPD, which factor stably under any
//! symmetric permutation.

use super::cholesky::{ereach, Ordering, Symbolic, NONE};
use super::operator::LinearOperator;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// `P K Pᵀ = L D Lᵀ` with unit lower `L`; `D` sits in the diagonal slot of
/// each column.
#[derive(Debug, Clone)]
pub struct LdltFactor {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl LdltFactor {
    pub fn factor(k: &SparseMatrix) -> Result<Self> {
        let Symbolic {
            n,
            perm,
            upper,
            parent,
            col_ptr,
        } = Symbolic::analyze(k, Ordering::ApproximateMinimumDegree)?;
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut next = col_ptr[..n].to_vec();
        let mut flag = vec![NONE; n];
        let mut stack = vec![0usize; n];
        let mut path = vec![0usize; n];
        let scale = k.max_abs();

        let mut y = vec![0.0; n];
        for row in 0..n {
            let top = ereach(row, &upper[row], &parent, &mut flag, &mut stack, &mut path);
            for &(i, v) in &upper[row] {
                y[i] += v;
            }
            let mut d = y[row];
            y[row] = 0.0;
            for &i in &stack[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                for p in col_ptr[i] + 1..next[i] {
                    y[row_idx[p]] -= values[p] * yi;
                }
                let l = yi / values[col_ptr[i]];
                d -= l * yi;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = row;
                values[p] = l;
            }
            if !d.is_finite() || d.abs() <= 1e-14 * scale {
                return Err(Error::NotPositiveDefinite {
                    row: perm[row],
                    pivot: d,
                });
            }
            let p = next[row];
            next[row] += 1;
            row_idx[p] = row;
            values[p] = d;
        }
        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Number of negative pivots, the inertia's negative count.
    pub fn negative_pivots(&self) -> usize {
        (0..self.n)
            .filter(|&j| self.values[self.col_ptr[j]] < 0.0)
            .count()
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.n, "LDLᵀ solve: rhs has wrong length");
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..self.n {
            let yj = y[j];
            for p in self.col_ptr[j] + 1..self.col_ptr[j + 1] {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        for j in 0..self.n {
            y[j] /= self.values[self.col_ptr[j]];
        }
        for j in (0..self.n).rev() {
            let mut acc = y[j];
            for p in self.col_ptr[j] + 1..self.col_ptr[j + 1] {
                acc -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = acc;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
    }
}

impl LinearOperator for LdltFactor {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.solve_into(x, y);
    }
}
