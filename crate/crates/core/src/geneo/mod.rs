//! GenEO coarse spaces and overlapping Schwarz preconditioners.

mod coarse;
mod schwarz;

pub use coarse::{local_geneo_eigenpairs, CoarseSpace, GeneoPencil, Selection};
pub use schwarz::{SchwarzConfig, SchwarzPreconditioner, SchwarzVariant};
