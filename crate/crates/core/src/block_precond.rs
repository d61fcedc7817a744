//! Block lower-triangular preconditioner for the twofold saddle-point system.
//!
//! ```text
//! T = [ Ã_u   0    0 ]
//!     [ 0    A_z   0 ]
//!     [ B1   B2    Ŝ ]      Ŝ = −(B1 diag(A_u)⁻¹ B1ᵀ + B2 diag(A_z)⁻¹ B2ᵀ + A_p)
//! ```
//!
//! `Ã_u⁻¹` is one application of the chosen displacement solver, `A_z` and
//! `−Ŝ` are factorized exactly.

use std::fmt;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::fem::BlockSystem;
use crate::geneo::{SchwarzConfig, SchwarzPreconditioner, SchwarzVariant, Selection};
use crate::linalg::{CholeskyFactor, LinearOperator, SparseMatrix};

/// Preconditioner variants exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondVariant {
    /// `L D Lᵀ` of the whole system instead of the block preconditioner.
    Direct,
    Exact,
    Ic0,
    OneLevel,
    GeneoAdditive,
    GeneoHybrid,
}

impl PrecondVariant {
    pub const ALL: [PrecondVariant; 6] = [
        PrecondVariant::Direct,
        PrecondVariant::Exact,
        PrecondVariant::Ic0,
        PrecondVariant::OneLevel,
        PrecondVariant::GeneoAdditive,
        PrecondVariant::GeneoHybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecondVariant::Direct => "direct",
            PrecondVariant::Exact => "exact",
            PrecondVariant::Ic0 => "ic0",
            PrecondVariant::OneLevel => "oas1",
            PrecondVariant::GeneoAdditive => "geneo-additive",
            PrecondVariant::GeneoHybrid => "geneo-hybrid",
        }
    }

    pub fn needs_decomposition(self) -> bool {
        matches!(
            self,
            PrecondVariant::OneLevel | PrecondVariant::GeneoAdditive | PrecondVariant::GeneoHybrid
        )
    }

    pub fn schwarz_variant(self) -> Option<SchwarzVariant> {
        match self {
            PrecondVariant::OneLevel => Some(SchwarzVariant::OneLevel),
            PrecondVariant::GeneoAdditive => Some(SchwarzVariant::Additive),
            PrecondVariant::GeneoHybrid => Some(SchwarzVariant::Hybrid),
            _ => None,
        }
    }
}

impl fmt::Display for PrecondVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PrecondVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrecondVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preconditioner '{s}'")))
    }
}

/// How the displacement block is approximated.
pub enum DisplacementSolver {
    ExactCholesky,
    IncompleteCholesky,
    Schwarz {
        decomposition: Decomposition,
        config: SchwarzConfig,
    },
}

impl DisplacementSolver {
    /// Solver for a command-line variant; Schwarz variants need a decomposition.
    pub fn for_variant(
        variant: PrecondVariant,
        decomposition: Option<Decomposition>,
        selection: Selection,
        symmetric: bool,
    ) -> Result<Self> {
        match variant.schwarz_variant() {
            None if variant == PrecondVariant::Exact => Ok(Self::ExactCholesky),
            None if variant == PrecondVariant::Ic0 => Ok(Self::IncompleteCholesky),
            None => Err(Error::InvalidArgument(format!(
                "{variant} is not a displacement solver"
            ))),
            Some(schwarz) => {
                let decomposition = decomposition.ok_or_else(|| {
                    Error::InvalidArgument(format!("{variant} needs a decomposition"))
                })?;
                Ok(Self::Schwarz {
                    decomposition,
                    config: SchwarzConfig {
                        variant: schwarz,
                        selection,
                        symmetric,
                    },
                })
            }
        }
    }
}

/// `−Ŝ = B1 diag(A_u)⁻¹ B1ᵀ + B2 diag(A_z)⁻¹ B2ᵀ + A_p`.
pub fn negative_schur_surrogate(system: &BlockSystem) -> Result<SparseMatrix> {
    let inv = |d: Vec<f64>| -> Result<Vec<f64>> {
        d.into_iter()
            .enumerate()
            .map(|(i, v)| {
                if v > 0.0 {
                    Ok(1.0 / v)
                } else {
                    Err(Error::NotPositiveDefinite { row: i, pivot: v })
                }
            })
            .collect()
    };
    let su = system.b1.weighted_gram(&inv(system.a_u.diagonal())?)?;
    let sz = system.b2.weighted_gram(&inv(system.a_z.diagonal())?)?;
    su.add(1.0, &sz, 1.0)?.add(1.0, &system.a_p, 1.0)
}

pub struct BlockTriangularPreconditioner {
    displacement: Box<dyn LinearOperator + Send>,
    flux: CholeskyFactor,
    neg_schur: SparseMatrix,
    schur_factor: CholeskyFactor,
    b1: SparseMatrix,
    b2: SparseMatrix,
}

impl BlockTriangularPreconditioner {
    pub fn build(system: &BlockSystem, solver: DisplacementSolver) -> Result<Self> {
        let displacement: Box<dyn LinearOperator + Send> = match solver {
            DisplacementSolver::ExactCholesky => Box::new(CholeskyFactor::factor(&system.a_u)?),
            DisplacementSolver::IncompleteCholesky => {
                Box::new(CholeskyFactor::incomplete_zero_fill(&system.a_u)?)
            }
            DisplacementSolver::Schwarz {
                decomposition,
                config,
            } => Box::new(SchwarzPreconditioner::new(
                &system.a_u,
                decomposition,
                config,
            )?),
        };
        let flux = CholeskyFactor::factor(&system.a_z)?;
        let neg_schur = negative_schur_surrogate(system)?;
        let schur_factor = CholeskyFactor::factor(&neg_schur)?;
        Ok(Self {
            displacement,
            flux,
            neg_schur,
            schur_factor,
            b1: system.b1.clone(),
            b2: system.b2.clone(),
        })
    }

    /// The assembled `−Ŝ`.
    pub fn negative_schur(&self) -> &SparseMatrix {
        &self.neg_schur
    }

    pub fn n_u(&self) -> usize {
        self.b1.ncols()
    }

    pub fn n_z(&self) -> usize {
        self.b2.ncols()
    }

    pub fn n_p(&self) -> usize {
        self.b1.nrows()
    }
}

impl LinearOperator for BlockTriangularPreconditioner {
    fn dim(&self) -> usize {
        self.n_u() + self.n_z() + self.n_p()
    }

    fn apply(&self, r: &[f64], x: &mut [f64]) {
        let (nu, nz) = (self.n_u(), self.n_z());
        let (ru, rest) = r.split_at(nu);
        let (rz, rp) = rest.split_at(nz);
        let (xu, rest) = x.split_at_mut(nu);
        let (xz, xp) = rest.split_at_mut(nz);
        self.displacement.apply(ru, xu);
        self.flux.solve_into(rz, xz);
        let mut t = rp.to_vec();
        self.b1.spmv_add(-1.0, xu, &mut t);
        self.b2.spmv_add(-1.0, xz, &mut t);
        self.schur_factor.solve_into(&t, xp);
        xp.iter_mut().for_each(|v| *v = -*v);
    }
}
