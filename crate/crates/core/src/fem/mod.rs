//! P1-P1-P0 discretization of the three-field Biot model.

pub mod assembly;
pub mod dofmap;
pub mod exact;
pub mod norms;
pub mod params;
pub mod system;

pub use assembly::{
    assemble_darcy_mass, assemble_div_couplings, assemble_elasticity, assemble_pressure_block,
    elasticity_element, p1_gradients,
};
pub use dofmap::DofMap;
pub use exact::{source_terms, ExactSolution};
pub use norms::{error_norms, ErrorNorms};
pub use params::{lame_from_poisson, Material, MaterialField, ModelParams};
pub use system::{BlockSystem, Discretization, ProblemData, State};
