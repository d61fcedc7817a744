//! Dense kernels for subdomain-sized problems.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Column-major dense matrix.
pub type DenseMatrix = DMatrix<f64>;

/// Relative cut below which an inverted-pencil eigenvalue is treated as zero,
/// i.e. the corresponding pencil eigenvalue as infinite.
pub const PENCIL_CUTOFF: f64 = 1e-12;

/// One finite eigenpair of a symmetric-definite pencil.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<f64>,
}

/// Dense Cholesky with an error instead of `None` on failure.
pub fn dense_cholesky(a: &DenseMatrix) -> Result<Cholesky<f64, Dyn>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "dense Cholesky of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    Cholesky::new(a.clone()).ok_or_else(|| {
        let row = (0..a.nrows()).find(|&i| a[(i, i)] <= 0.0).unwrap_or(0);
        Error::NotPositiveDefinite {
            row,
            pivot: a.get((row, row)).copied().unwrap_or(f64::NAN),
        }
    })
}

/// Finite eigenpairs of `A v = λ B v`, `A` SPD and `B` symmetric PSD.
///
/// With `A = L Lᵀ` the pencil is inverted to `C w = μ w`, `C = L⁻¹ B L⁻ᵀ`.
/// Pairs with `μ ≤ 1e-12 · max μ` belong to the null space of `B` and are
/// dropped. The rest are returned as `λ = 1/μ`, ascending, with
/// `v = L⁻ᵀ w` so that `vᵀ A v = 1`.
pub fn generalized_symmetric_eig(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<EigenPair>> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "pencil blocks {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let chol = dense_cholesky(a)?;
    let l = chol.l();
    // C = L⁻¹ B L⁻ᵀ
    let y = l
        .solve_lower_triangular(b)
        .ok_or_else(|| Error::InvalidArgument("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::InvalidArgument("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;

    let eig = SymmetricEigen::new(c);
    let mu_max = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v));
    if mu_max <= 0.0 {
        return Ok(Vec::new());
    }
    let cut = PENCIL_CUTOFF * mu_max;
    let mut order: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > cut).collect();
    // largest μ first means smallest λ first
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let lt = l.transpose();
    order
        .into_iter()
        .map(|k| {
            let w = eig.eigenvectors.column(k).into_owned();
            let v = lt
                .solve_upper_triangular(&w)
                .ok_or_else(|| Error::InvalidArgument("singular Cholesky factor".into()))?;
            Ok(EigenPair {
                value: 1.0 / eig.eigenvalues[k],
                vector: v,
            })
        })
        .collect()
}

/// All eigenpairs of `A v = λ B v` with `A` symmetric PSD and `B` SPD,
/// ascending, normalized to `vᵀ B v = 1`.
pub fn definite_symmetric_eig(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<EigenPair>> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "pencil blocks {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let chol = dense_cholesky(b)?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::InvalidArgument("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::InvalidArgument("singular Cholesky factor".into()))?;
    let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    order
        .into_iter()
        .map(|k| {
            let v = lt
                .solve_upper_triangular(&eig.eigenvectors.column(k).into_owned())
                .ok_or_else(|| Error::InvalidArgument("singular Cholesky factor".into()))?;
            Ok(EigenPair {
                value: eig.eigenvalues[k],
                vector: v,
            })
        })
        .collect()
}
