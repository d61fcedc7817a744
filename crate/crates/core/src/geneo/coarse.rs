use log::warn;
use nalgebra::{Cholesky, DVector, Dyn};
use rayon::prelude::*;

use crate::decomposition::{Decomposition, NeumannMatrix, Subdomain};
use crate::error::{Error, Result};
use crate::linalg::{
    definite_symmetric_eig, dense_cholesky, generalized_symmetric_eig, DenseMatrix, EigenPair,
    SparseMatrix,
};

/// How many eigenvectors each subdomain contributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// The `ν` smallest eigenpairs of every subdomain.
    Fixed(usize),
    /// All eigenpairs with `λ < τ`.
    Threshold(f64),
}

/// Left operator of the local eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneoPencil {
    /// `A_i′ = R_i A R_iᵀ`.
    Dirichlet,
    /// Stiffness of the extended subdomain with natural artificial boundary.
    Neumann,
}

impl GeneoPencil {
    pub fn name(self) -> &'static str {
        match self {
            GeneoPencil::Dirichlet => "dirichlet",
            GeneoPencil::Neumann => "neumann",
        }
    }
}

impl std::str::FromStr for GeneoPencil {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(GeneoPencil::Dirichlet),
            "neumann" => Ok(GeneoPencil::Neumann),
            _ => Err(Error::InvalidArgument(format!("unknown pencil '{s}'"))),
        }
    }
}

/// Low-energy eigenpairs of subdomain `i` in subdomain-local coordinates,
/// ascending.
///
/// Without a Neumann matrix this is the pencil `(A_i′, D_i A_i′ D_i)`. With
/// one, the left operator is the Neumann matrix on the extended subdomain,
/// condensed onto the owned DOFs (the support of `D_i`), so floating rigid
/// motions show up as zero eigenvalues.
pub fn local_geneo_eigenpairs(
    i: usize,
    decomposition: &Decomposition,
    a: &SparseMatrix,
) -> Result<Vec<EigenPair>> {
    let sub = decomposition.subdomain(i);
    match &sub.neumann {
        None => dirichlet_pencil(i, decomposition, a),
        Some(neumann) => neumann_pencil(sub, neumann, a),
    }
}

fn dirichlet_pencil(
    i: usize,
    decomposition: &Decomposition,
    a: &SparseMatrix,
) -> Result<Vec<EigenPair>> {
    let local = decomposition.local_operator(i, a)?;
    let owned = &decomposition.subdomain(i).owned;
    let mut weighted = local.clone();
    for (l, &o) in owned.iter().enumerate() {
        if !o {
            weighted.row_mut(l).fill(0.0);
            weighted.column_mut(l).fill(0.0);
        }
    }
    generalized_symmetric_eig(&local, &weighted)
}

fn neumann_pencil(
    sub: &Subdomain,
    neumann: &NeumannMatrix,
    a: &SparseMatrix,
) -> Result<Vec<EigenPair>> {
    let owned: Vec<usize> = sub
        .dofs
        .iter()
        .zip(&sub.owned)
        .filter_map(|(&g, &o)| o.then_some(g))
        .collect();
    let position = |g: usize| {
        neumann
            .dofs
            .binary_search(&g)
            .map_err(|_| Error::InvalidArgument(format!("owned DOF {g} outside the Neumann patch")))
    };
    let o_idx = owned
        .iter()
        .map(|&g| position(g))
        .collect::<Result<Vec<_>>>()?;
    let x_idx: Vec<usize> = (0..neumann.dofs.len())
        .filter(|l| !o_idx.contains(l))
        .collect();
    let n = &neumann.matrix;
    let mut schur = n.select_rows(&o_idx).select_columns(&o_idx);
    if !x_idx.is_empty() {
        let nxx = n.select_rows(&x_idx).select_columns(&x_idx);
        let nxo = n.select_rows(&x_idx).select_columns(&o_idx);
        let solved = dense_cholesky(&nxx)?.solve(&nxo);
        schur -= nxo.transpose() * solved;
    }
    let schur = (&schur + schur.transpose()) * 0.5;
    let pairs = definite_symmetric_eig(&schur, &a.principal_dense(&owned))?;
    let local_of_owned: Vec<usize> = (0..sub.len()).filter(|&l| sub.owned[l]).collect();
    Ok(pairs
        .into_iter()
        .map(|p| {
            let mut v = DVector::zeros(sub.len());
            for (k, &l) in local_of_owned.iter().enumerate() {
                v[l] = p.vector[k];
            }
            EigenPair {
                value: p.value,
                vector: v,
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
struct DeflationBlock {
    dofs: Vec<usize>,
    /// `W_i`, one column `D_i y_ik` per retained eigenvector.
    w: DenseMatrix,
}

/// Deflation matrix `P = [R_1ᵀ W_1 ⋯ R_Nᵀ W_N]` with the factorized Galerkin
/// operator `E = Pᵀ A P`.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    dim: usize,
    /// Eigenvalues behind the retained columns, per subdomain.
    pub eigenvalues: Vec<Vec<f64>>,
    blocks: Vec<DeflationBlock>,
    offsets: Vec<usize>,
    galerkin: DenseMatrix,
    factor: Option<Cholesky<f64, Dyn>>,
    /// Columns removed as linearly dependent.
    pub dropped: usize,
}

impl CoarseSpace {
    pub fn build(
        decomposition: &Decomposition,
        a: &SparseMatrix,
        selection: Selection,
    ) -> Result<Self> {
        let per_subdomain: Vec<Result<(Vec<f64>, DeflationBlock)>> = (0..decomposition
            .num_subdomains())
            .into_par_iter()
            .map(|i| {
                let sub = decomposition.subdomain(i);
                let pairs = local_geneo_eigenpairs(i, decomposition, a)?;
                let keep = match selection {
                    Selection::Fixed(nu) => nu.min(pairs.len()),
                    Selection::Threshold(tau) => pairs.iter().take_while(|p| p.value < tau).count(),
                };
                let mut w = DenseMatrix::zeros(sub.len(), keep);
                for (k, pair) in pairs.iter().take(keep).enumerate() {
                    for (l, &o) in sub.owned.iter().enumerate() {
                        if o {
                            w[(l, k)] = pair.vector[l];
                        }
                    }
                }
                let values = pairs.iter().take(keep).map(|p| p.value).collect();
                Ok((
                    values,
                    DeflationBlock {
                        dofs: sub.dofs.clone(),
                        w,
                    },
                ))
            })
            .collect();
        let mut eigenvalues = Vec::new();
        let mut blocks = Vec::new();
        for r in per_subdomain {
            let (v, b) = r?;
            eigenvalues.push(v);
            blocks.push(b);
        }
        Self::from_blocks(decomposition.dim(), a, eigenvalues, blocks)
    }

    fn from_blocks(
        dim: usize,
        a: &SparseMatrix,
        mut eigenvalues: Vec<Vec<f64>>,
        mut blocks: Vec<DeflationBlock>,
    ) -> Result<Self> {
        let galerkin = galerkin_product(dim, a, &blocks);
        let nc = galerkin.nrows();
        let mut dropped = 0;
        let (galerkin, factor) = if nc == 0 {
            (galerkin, None)
        } else {
            let keep = independent_columns(&galerkin);
            if keep.len() < nc {
                dropped = nc - keep.len();
                warn!("coarse space: dropping {dropped} linearly dependent columns of {nc}");
                let mut offset = 0;
                for (b, values) in blocks.iter_mut().zip(eigenvalues.iter_mut()) {
                    let cols: Vec<usize> = (0..b.w.ncols())
                        .filter(|c| keep.contains(&(offset + c)))
                        .collect();
                    offset += b.w.ncols();
                    b.w = b.w.select_columns(&cols);
                    *values = cols.iter().map(|&c| values[c]).collect();
                }
            }
            let reduced = galerkin.select_rows(&keep).select_columns(&keep);
            let factor = dense_cholesky(&reduced)?;
            (reduced, Some(factor))
        };
        let mut offsets = vec![0];
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.w.ncols());
        }
        Ok(Self {
            dim,
            eigenvalues,
            blocks,
            offsets,
            galerkin,
            factor,
            dropped,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coarse basis vectors `n_c`.
    pub fn num_columns(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.num_columns() == 0
    }

    pub fn galerkin_operator(&self) -> &DenseMatrix {
        &self.galerkin
    }

    /// Column `j` of `P` as a dense global vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let b = self.offsets.partition_point(|&o| o <= j) - 1;
        let block = &self.blocks[b];
        let mut v = vec![0.0; self.dim];
        for (l, &g) in block.dofs.iter().enumerate() {
            v[g] = block.w[(l, j - self.offsets[b])];
        }
        v
    }

    /// `Pᵀ r`.
    pub fn restrict(&self, r: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.num_columns());
        for (b, block) in self.blocks.iter().enumerate() {
            for k in 0..block.w.ncols() {
                let col = block.w.column(k);
                out[self.offsets[b] + k] = block
                    .dofs
                    .iter()
                    .zip(col.iter())
                    .map(|(&g, &w)| w * r[g])
                    .sum();
            }
        }
        out
    }

    /// `y += P c`.
    pub fn prolong_add(&self, c: &DVector<f64>, y: &mut [f64]) {
        for (b, block) in self.blocks.iter().enumerate() {
            for k in 0..block.w.ncols() {
                let ck = c[self.offsets[b] + k];
                if ck == 0.0 {
                    continue;
                }
                for (&g, &w) in block.dofs.iter().zip(block.w.column(k).iter()) {
                    y[g] += w * ck;
                }
            }
        }
    }

    /// `Q r = P E⁻¹ Pᵀ r`.
    pub fn apply_q(&self, r: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        if let Some(factor) = &self.factor {
            let c = factor.solve(&self.restrict(r));
            self.prolong_add(&c, &mut y);
        }
        y
    }
}

fn galerkin_product(dim: usize, a: &SparseMatrix, blocks: &[DeflationBlock]) -> DenseMatrix {
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        for k in 0..block.w.ncols() {
            columns.push((b, k));
        }
    }
    let nc = columns.len();
    let entries: Vec<Vec<f64>> = columns
        .par_iter()
        .map(|&(b, k)| {
            let mut p = vec![0.0; dim];
            for (&g, &w) in blocks[b].dofs.iter().zip(blocks[b].w.column(k).iter()) {
                p[g] = w;
            }
            let ap = a.spmv(&p);
            columns
                .iter()
                .map(|&(b2, k2)| {
                    let block = &blocks[b2];
                    block
                        .dofs
                        .iter()
                        .zip(block.w.column(k2).iter())
                        .map(|(&g, &w)| w * ap[g])
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut e = DenseMatrix::zeros(nc, nc);
    for (k, col) in entries.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            e[(j, k)] = v;
        }
    }
    // exact arithmetic gives a symmetric product
    (&e + e.transpose()) * 0.5
}

/// Greedy Cholesky that skips columns whose pivot falls below
/// `1e-10 · trace(E) / n_c`.
fn independent_columns(e: &DenseMatrix) -> Vec<usize> {
    let n = e.nrows();
    let tol = 1e-10 * e.trace() / n as f64;
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut l = Vec::with_capacity(keep.len() + 1);
        for (k, &rk) in keep.iter().enumerate() {
            let s: f64 = (0..k).map(|m| rows[k][m] * l[m]).sum();
            l.push((e[(j, rk)] - s) / rows[k][k]);
        }
        let d = e[(j, j)] - l.iter().map(|v| v * v).sum::<f64>();
        if d > tol {
            l.push(d.sqrt());
            rows.push(l);
            keep.push(j);
        }
    }
    keep
}

impl CoarseSpace {
    /// Coarse space of explicitly given columns, mainly for tests.
    pub fn from_columns(a: &SparseMatrix, columns: &[Vec<f64>]) -> Result<Self> {
        let dim = a.nrows();
        let mut blocks = Vec::with_capacity(columns.len());
        for c in columns {
            if c.len() != dim {
                return Err(Error::DimensionMismatch("coarse column length".into()));
            }
            let dofs: Vec<usize> = (0..dim).filter(|&g| c[g] != 0.0).collect();
            let w = DenseMatrix::from_iterator(dofs.len(), 1, dofs.iter().map(|&g| c[g]));
            blocks.push(DeflationBlock { dofs, w });
        }
        let eigenvalues = vec![vec![f64::NAN]; columns.len()];
        Self::from_blocks(dim, a, eigenvalues, blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    fn laplacian_1d(n: usize) -> SparseMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
                b.push(i - 1, i, -1.0);
            }
        }
        b.build()
    }

    fn chain_decomposition() -> Decomposition {
        Decomposition::from_index_sets(
            10,
            vec![(0..7).collect(), (3..10).collect()],
            vec![(0..5).collect(), (5..10).collect()],
        )
        .unwrap()
    }

    #[test]
    fn single_subdomain_pencil_is_trivial() {
        let a = laplacian_1d(6);
        let dec = Decomposition::from_index_sets(6, vec![(0..6).collect()], vec![(0..6).collect()])
            .unwrap();
        let pairs = local_geneo_eigenpairs(0, &dec, &a).unwrap();
        assert_eq!(pairs.len(), 6);
        assert!(pairs.iter().all(|p| (p.value - 1.0).abs() < 1e-10));
    }

    #[test]
    fn fixed_selection_counts() {
        let a = laplacian_1d(10);
        let dec = chain_decomposition();
        let cs = CoarseSpace::build(&dec, &a, Selection::Fixed(2)).unwrap();
        assert_eq!(cs.num_columns(), 4);
        let empty = CoarseSpace::build(&dec, &a, Selection::Fixed(0)).unwrap();
        assert!(empty.is_empty());
        assert!(empty.apply_q(&[1.0; 10]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn threshold_selection_respects_tau() {
        let a = laplacian_1d(10);
        let dec = chain_decomposition();
        let cs = CoarseSpace::build(&dec, &a, Selection::Threshold(1.5)).unwrap();
        for values in &cs.eigenvalues {
            assert!(values.iter().all(|&v| v < 1.5));
        }
    }

    #[test]
    fn neumann_pencil_sees_floating_rigid_motions() {
        use crate::fem::{assemble_elasticity, DofMap, Material, MaterialField};
        use crate::mesh::{Mesh, Partition};
        let mesh = Mesh::unit_square(12).unwrap();
        let dofmap = DofMap::new(&mesh);
        let part = Partition::structured(&mesh, 3, 3).unwrap();
        let field = MaterialField::uniform(mesh.num_triangles(), Material::new(0.3, 1.0).unwrap());
        let a = assemble_elasticity(&mesh, &field, &dofmap).unwrap();
        let mut dec = Decomposition::build(&mesh, &part, &dofmap, 2).unwrap();
        dec.attach_neumann_matrices(&mesh, &field, &dofmap).unwrap();
        let pairs = local_geneo_eigenpairs(4, &dec, &a).unwrap();
        let sub = dec.subdomain(4);
        assert_eq!(pairs.len(), sub.num_owned());
        assert!(pairs.windows(2).all(|w| w[0].value <= w[1].value));
        assert!(pairs.iter().all(|p| p.value >= -1e-10));
        assert!(pairs[..3].iter().all(|p| p.value.abs() < 1e-8));
        assert!(pairs[3].value > 1e-4);
        // eigenvectors live on the owned DOFs and are A-normalized there
        let a_loc = dec.local_operator(4, &a).unwrap();
        for p in &pairs[..5] {
            for (l, &o) in sub.owned.iter().enumerate() {
                assert!(o || p.vector[l] == 0.0);
            }
            let norm = p.vector.dot(&(&a_loc * &p.vector));
            assert!((norm - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn dependent_columns_are_dropped() {
        let a = laplacian_1d(5);
        let c1 = vec![1.0, 0.0, 0.0, 0.0, 0.0];
        let c2 = vec![0.0, 1.0, 0.0, 0.0, 0.0];
        let c3 = vec![2.0, -1.0, 0.0, 0.0, 0.0];
        let cs = CoarseSpace::from_columns(&a, &[c1, c2, c3]).unwrap();
        assert_eq!(cs.dropped, 1);
        assert_eq!(cs.num_columns(), 2);
    }
}
