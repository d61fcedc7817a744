//! Sparse and dense linear-algebra kernels.

pub mod cholesky;
pub mod dense;
pub mod ldlt;
pub mod operator;
pub mod sparse;

pub use cholesky::{CholeskyFactor, Ordering};
pub use dense::{
    definite_symmetric_eig, dense_cholesky, generalized_symmetric_eig, DenseMatrix, EigenPair,
};
pub use ldlt::LdltFactor;
pub use operator::{axpy, dot, norm2, Identity, LinearOperator};
pub use sparse::{SparseMatrix, TripletBuilder};
