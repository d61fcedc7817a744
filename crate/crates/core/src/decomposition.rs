//! Overlapping subdomains for the displacement unknowns.
//!
//! Subdomain `i` is described by its overlapped DOF list (the rows of `R_i`)
//! and an ownership mask on that list (the 0/1 diagonal of `D_i`, which is
//! also what distinguishes `R̃_i` from `R_i`).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{elasticity_element, p1_gradients, DofMap, MaterialField};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::mesh::{Mesh, Partition};

#[derive(Debug, Clone)]
pub struct Subdomain {
    /// Global indices of the overlapped DOFs, ascending.
    pub dofs: Vec<usize>,
    /// `owned[l]` is the diagonal of `D_i` at local index `l`.
    pub owned: Vec<bool>,
    /// Elements of the extended subdomain (empty for algebraic decompositions).
    pub elements: Vec<usize>,
    /// Stiffness assembled over `elements` only, with natural conditions on
    /// the artificial boundary.
    pub neumann: Option<NeumannMatrix>,
}

#[derive(Debug, Clone)]
pub struct NeumannMatrix {
    /// Free DOFs of every vertex of the extended subdomain, ascending; a
    /// superset of the overlapped DOFs.
    pub dofs: Vec<usize>,
    pub matrix: DenseMatrix,
}

impl Subdomain {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn num_owned(&self) -> usize {
        self.owned.iter().filter(|&&o| o).count()
    }

    /// `R_i x`.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&g| x[g]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    dim: usize,
    subdomains: Vec<Subdomain>,
    /// Overlap width in element layers (0 for algebraic decompositions).
    pub overlap: usize,
}

impl Decomposition {
    /// Grows each owned block by `overlap` layers of vertex-adjacent elements.
    ///
    /// Only vertices whose incident elements all lie in the extended block
    /// contribute DOFs, which imposes a homogeneous Dirichlet condition on
    /// the artificial boundary. A vertex is owned by the lowest-indexed
    /// subdomain among its incident elements.
    pub fn build(
        mesh: &Mesh,
        partition: &Partition,
        dofmap: &DofMap,
        overlap: usize,
    ) -> Result<Self> {
        if overlap == 0 {
            return Err(Error::InvalidArgument(
                "overlap must be at least one element layer".into(),
            ));
        }
        if partition.owner.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch(
                "partition does not match mesh".into(),
            ));
        }
        let vertex_tris = mesh.vertex_triangles();
        let vertex_owner: Vec<usize> = vertex_tris
            .iter()
            .map(|ts| ts.iter().map(|&t| partition.owner[t]).min().unwrap_or(0))
            .collect();

        let nt = mesh.num_triangles();
        let nv = mesh.num_vertices();
        let mut subdomains = Vec::with_capacity(partition.num_subdomains());
        for s in 0..partition.num_subdomains() {
            let mut in_set: Vec<bool> = partition.owner.iter().map(|&o| o == s).collect();
            for _ in 0..overlap {
                let mut touched = vec![false; nv];
                for t in (0..nt).filter(|&t| in_set[t]) {
                    for &v in &mesh.triangles[t] {
                        touched[v] = true;
                    }
                }
                for v in (0..nv).filter(|&v| touched[v]) {
                    for &t in &vertex_tris[v] {
                        in_set[t] = true;
                    }
                }
            }
            let mut dofs = Vec::new();
            let mut owned = Vec::new();
            for v in 0..nv {
                let interior =
                    !vertex_tris[v].is_empty() && vertex_tris[v].iter().all(|&t| in_set[t]);
                if !interior {
                    continue;
                }
                for c in 0..2 {
                    let g = DofMap::vector_dof(v, c);
                    if !dofmap.u_constrained[g] {
                        dofs.push(g);
                        owned.push(vertex_owner[v] == s);
                    }
                }
            }
            if dofs.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "subdomain {s} has no free DOFs"
                )));
            }
            subdomains.push(Subdomain {
                dofs,
                owned,
                elements: (0..nt).filter(|&t| in_set[t]).collect(),
                neumann: None,
            });
        }
        let decomposition = Self {
            dim: dofmap.n_u(),
            subdomains,
            overlap,
        };
        decomposition.check_ownership()?;
        Ok(decomposition)
    }

    /// Decomposition from explicit index sets; `owned[i]` must be a subset
    /// of `overlapped[i]`.
    pub fn from_index_sets(
        dim: usize,
        overlapped: Vec<Vec<usize>>,
        owned: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if overlapped.len() != owned.len() {
            return Err(Error::DimensionMismatch(
                "one owned set per subdomain".into(),
            ));
        }
        let mut subdomains = Vec::with_capacity(overlapped.len());
        for (i, (mut dofs, own)) in overlapped.into_iter().zip(owned).enumerate() {
            dofs.sort_unstable();
            dofs.dedup();
            if dofs.is_empty() || dofs.last().is_some_and(|&g| g >= dim) {
                return Err(Error::InvalidArgument(format!(
                    "subdomain {i}: empty or out of range"
                )));
            }
            let mut mask = vec![false; dofs.len()];
            for g in own {
                let l = dofs.binary_search(&g).map_err(|_| {
                    Error::InvalidArgument(format!("subdomain {i}: owned DOF {g} not overlapped"))
                })?;
                mask[l] = true;
            }
            subdomains.push(Subdomain {
                dofs,
                owned: mask,
                elements: Vec::new(),
                neumann: None,
            });
        }
        let decomposition = Self {
            dim,
            subdomains,
            overlap: 0,
        };
        decomposition.check_ownership()?;
        Ok(decomposition)
    }

    fn check_ownership(&self) -> Result<()> {
        let counts = self.ownership_counts();
        let covered = self.covered();
        for g in 0..self.dim {
            if covered[g] && counts[g] != 1 {
                return Err(Error::InvalidArgument(format!(
                    "DOF {g} owned by {} subdomains",
                    counts[g]
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn subdomain(&self, i: usize) -> &Subdomain {
        &self.subdomains[i]
    }

    /// DOFs that belong to at least one subdomain.
    pub fn covered(&self) -> Vec<bool> {
        let mut mask = vec![false; self.dim];
        for s in &self.subdomains {
            for &g in &s.dofs {
                mask[g] = true;
            }
        }
        mask
    }

    /// Diagonal of `∑ R_iᵀ D_i R_i` as integers.
    pub fn ownership_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.dim];
        for s in &self.subdomains {
            for (&g, &o) in s.dofs.iter().zip(&s.owned) {
                counts[g] += o as u32;
            }
        }
        counts
    }

    /// Assemble the local elasticity matrix of every extended subdomain.
    pub fn attach_neumann_matrices(
        &mut self,
        mesh: &Mesh,
        material: &MaterialField,
        dofmap: &DofMap,
    ) -> Result<()> {
        let built: Vec<Result<NeumannMatrix>> = self
            .subdomains
            .par_iter()
            .map(|sub| {
                if sub.elements.is_empty() {
                    return Err(Error::InvalidArgument(
                        "Neumann matrices need a mesh decomposition".into(),
                    ));
                }
                let mut dofs: Vec<usize> = sub
                    .elements
                    .iter()
                    .flat_map(|&t| mesh.triangles[t])
                    .flat_map(|v| [DofMap::vector_dof(v, 0), DofMap::vector_dof(v, 1)])
                    .filter(|&g| !dofmap.u_constrained[g])
                    .collect();
                dofs.sort_unstable();
                dofs.dedup();
                let mut matrix = DenseMatrix::zeros(dofs.len(), dofs.len());
                for &t in &sub.elements {
                    let (grads, area) = p1_gradients(mesh, t)?;
                    let (lambda, mu) = (material.lambda[t], material.mu[t]);
                    let ke = elasticity_element(&grads, area, lambda, mu);
                    let local: Vec<Option<usize>> = mesh.triangles[t]
                        .iter()
                        .flat_map(|&v| [DofMap::vector_dof(v, 0), DofMap::vector_dof(v, 1)])
                        .map(|g| dofs.binary_search(&g).ok())
                        .collect();
                    for (a, la) in local.iter().enumerate() {
                        let Some(la) = la else { continue };
                        for (b, lb) in local.iter().enumerate() {
                            if let Some(lb) = lb {
                                matrix[(*la, *lb)] += ke[a][b];
                            }
                        }
                    }
                }
                Ok(NeumannMatrix { dofs, matrix })
            })
            .collect();
        for (sub, n) in self.subdomains.iter_mut().zip(built) {
            sub.neumann = Some(n?);
        }
        Ok(())
    }

    /// `A_i′ = R_i A R_iᵀ`, densified.
    pub fn local_operator(&self, i: usize, a: &SparseMatrix) -> Result<DenseMatrix> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, decomposition has {} DOFs",
                a.nrows(),
                a.ncols(),
                self.dim
            )));
        }
        Ok(a.principal_dense(&self.subdomains[i].dofs))
    }
}
