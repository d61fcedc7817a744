use nalgebra::{Cholesky, DVector, Dyn};
use rayon::prelude::*;

use super::coarse::{CoarseSpace, Selection};
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::{dense_cholesky, LinearOperator, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchwarzVariant {
    /// `M⁻¹ = ∑ R̃_iᵀ (A_i′)⁻¹ R_i`
    OneLevel,
    /// `Q + M⁻¹`
    Additive,
    /// `Q + M⁻¹ (I − A Q)`
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzConfig {
    pub variant: SchwarzVariant,
    pub selection: Selection,
    /// Prolongate with `R_iᵀ` instead of the restricted `R̃_iᵀ`.
    pub symmetric: bool,
}

impl Default for SchwarzConfig {
    fn default() -> Self {
        Self {
            variant: SchwarzVariant::Hybrid,
            selection: Selection::Fixed(15),
            symmetric: false,
        }
    }
}

/// One- or two-level overlapping Schwarz approximation of `A⁻¹`.
///
/// DOFs outside every subdomain (the eliminated Dirichlet rows) are handled
/// by diagonal scaling.
pub struct SchwarzPreconditioner {
    a: SparseMatrix,
    decomposition: Decomposition,
    local: Vec<Cholesky<f64, Dyn>>,
    coarse: Option<CoarseSpace>,
    uncovered: Vec<(usize, f64)>,
    variant: SchwarzVariant,
    symmetric: bool,
}

impl SchwarzPreconditioner {
    pub fn new(
        a: &SparseMatrix,
        decomposition: Decomposition,
        config: SchwarzConfig,
    ) -> Result<Self> {
        if a.nrows() != decomposition.dim() || a.ncols() != decomposition.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator {}x{} vs decomposition of {} DOFs",
                a.nrows(),
                a.ncols(),
                decomposition.dim()
            )));
        }
        let local = (0..decomposition.num_subdomains())
            .into_par_iter()
            .map(|i| dense_cholesky(&decomposition.local_operator(i, a)?))
            .collect::<Result<Vec<_>>>()?;
        let covered = decomposition.covered();
        let uncovered = (0..a.nrows())
            .filter(|&g| !covered[g])
            .map(|g| {
                let d = a.get(g, g);
                if d == 0.0 {
                    Err(Error::NotPositiveDefinite { row: g, pivot: d })
                } else {
                    Ok((g, 1.0 / d))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let coarse = match config.variant {
            SchwarzVariant::OneLevel => None,
            _ => Some(CoarseSpace::build(&decomposition, a, config.selection)?),
        };
        Ok(Self {
            a: a.clone(),
            decomposition,
            local,
            coarse,
            uncovered,
            variant: config.variant,
            symmetric: config.symmetric,
        })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn coarse_space(&self) -> Option<&CoarseSpace> {
        self.coarse.as_ref()
    }

    pub fn variant(&self) -> SchwarzVariant {
        self.variant
    }

    /// `y = M⁻¹ r`. Local solves run in parallel; their contributions are
    /// summed in subdomain order so the result does not depend on the
    /// thread count.
    pub fn apply_one_level(&self, r: &[f64], y: &mut [f64]) {
        let locals: Vec<DVector<f64>> = self
            .decomposition
            .subdomains()
            .par_iter()
            .zip(self.local.par_iter())
            .map(|(sub, chol)| chol.solve(&DVector::from_vec(sub.restrict(r))))
            .collect();
        y.fill(0.0);
        for (sub, x) in self.decomposition.subdomains().iter().zip(&locals) {
            for (l, &g) in sub.dofs.iter().enumerate() {
                if self.symmetric || sub.owned[l] {
                    y[g] += x[l];
                }
            }
        }
        for &(g, inv) in &self.uncovered {
            y[g] = inv * r[g];
        }
    }
}

impl LinearOperator for SchwarzPreconditioner {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, r: &[f64], y: &mut [f64]) {
        let coarse = match &self.coarse {
            Some(c) if !c.is_empty() => c,
            _ => return self.apply_one_level(r, y),
        };
        let q = coarse.apply_q(r);
        match self.variant {
            SchwarzVariant::OneLevel => self.apply_one_level(r, y),
            SchwarzVariant::Additive => {
                self.apply_one_level(r, y);
                y.iter_mut().zip(&q).for_each(|(yi, qi)| *yi += qi);
            }
            SchwarzVariant::Hybrid => {
                let mut deflated = r.to_vec();
                self.a.spmv_add(-1.0, &q, &mut deflated);
                self.apply_one_level(&deflated, y);
                y.iter_mut().zip(&q).for_each(|(yi, qi)| *yi += qi);
            }
        }
    }
}
