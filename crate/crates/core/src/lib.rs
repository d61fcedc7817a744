//! Three-field Biot poroelasticity on the unit square.
//!
//! Displacement and Darcy flux are continuous P1, pressure is P0 with an
//! interior-edge jump stabilization. Each backward-Euler step produces a
//! symmetric twofold saddle-point system which is solved by right
//! preconditioned GMRES with a block lower-triangular preconditioner. The
//! displacement block of that preconditioner is approximated by an
//! overlapping Schwarz method, optionally with a GenEO spectral coarse space.

pub mod block_precond;
pub mod decomposition;
pub mod error;
pub mod fem;
pub mod geneo;
pub mod harness;
pub mod krylov;
pub mod linalg;
pub mod mesh;

pub use error::{Error, Result};
