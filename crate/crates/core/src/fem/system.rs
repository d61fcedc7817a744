//! The symmetric block system of one backward-Euler step.

use super::assembly::{
    assemble_darcy_mass, assemble_div_couplings, assemble_elasticity, assemble_pressure_block,
};
use super::dofmap::DofMap;
use super::exact::ExactSolution;
use super::norms::edge_midpoints;
use super::params::{MaterialField, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, SparseMatrix, TripletBuilder};
use crate::mesh::Mesh;

/// Nodal displacement and flux, elementwise pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
}

impl State {
    pub fn zeros(dofmap: &DofMap) -> Self {
        Self {
            u: vec![0.0; dofmap.n_u()],
            z: vec![0.0; dofmap.n_z()],
            p: vec![0.0; dofmap.n_p()],
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.u.len() + self.z.len() + self.p.len());
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.z);
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_vector(dofmap: &DofMap, x: &[f64]) -> Self {
        let (nu, nz) = (dofmap.n_u(), dofmap.n_z());
        Self {
            u: x[..nu].to_vec(),
            z: x[nu..nu + nz].to_vec(),
            p: x[nu + nz..].to_vec(),
        }
    }
}

/// Source of the boundary data, the mass source and the pinned pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemData {
    /// Data compatible with the analytic solution.
    Manufactured(ExactSolution),
    /// Zero sources and zero boundary values.
    Homogeneous,
}

/// `[[A_u, 0, B1ᵀ], [0, A_z, B2ᵀ], [B1, B2, −A_p]]` with its right-hand side.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub a_u: SparseMatrix,
    pub a_z: SparseMatrix,
    pub b1: SparseMatrix,
    pub b2: SparseMatrix,
    pub a_p: SparseMatrix,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    b1t: SparseMatrix,
    b2t: SparseMatrix,
}

impl BlockSystem {
    pub fn from_blocks(
        a_u: SparseMatrix,
        a_z: SparseMatrix,
        b1: SparseMatrix,
        b2: SparseMatrix,
        a_p: SparseMatrix,
        rhs: (Vec<f64>, Vec<f64>, Vec<f64>),
    ) -> Result<Self> {
        let (nu, nz, np) = (a_u.nrows(), a_z.nrows(), a_p.nrows());
        let ok = a_u.ncols() == nu
            && a_z.ncols() == nz
            && a_p.ncols() == np
            && (b1.nrows(), b1.ncols()) == (np, nu)
            && (b2.nrows(), b2.ncols()) == (np, nz)
            && (rhs.0.len(), rhs.1.len(), rhs.2.len()) == (nu, nz, np);
        if !ok {
            return Err(Error::DimensionMismatch("inconsistent block shapes".into()));
        }
        Ok(Self {
            b1t: b1.transpose(),
            b2t: b2.transpose(),
            a_u,
            a_z,
            b1,
            b2,
            a_p,
            f1: rhs.0,
            f2: rhs.1,
            f3: rhs.2,
        })
    }

    pub fn n_u(&self) -> usize {
        self.a_u.nrows()
    }

    pub fn n_z(&self) -> usize {
        self.a_z.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.a_p.nrows()
    }

    pub fn rhs(&self) -> Vec<f64> {
        [self.f1.as_slice(), &self.f2, &self.f3].concat()
    }

    pub fn set_rhs(&mut self, rhs: &[f64]) {
        let (nu, nz) = (self.n_u(), self.n_z());
        self.f1.copy_from_slice(&rhs[..nu]);
        self.f2.copy_from_slice(&rhs[nu..nu + nz]);
        self.f3.copy_from_slice(&rhs[nu + nz..]);
    }

    /// The assembled global matrix.
    pub fn to_sparse(&self) -> SparseMatrix {
        let (nu, nz, np) = (self.n_u(), self.n_z(), self.n_p());
        let n = nu + nz + np;
        let mut b = TripletBuilder::with_capacity(
            n,
            n,
            self.a_u.nnz() + self.a_z.nnz() + 2 * (self.b1.nnz() + self.b2.nnz()) + self.a_p.nnz(),
        );
        let mut put = |m: &SparseMatrix, r0: usize, c0: usize, s: f64| {
            for i in 0..m.nrows() {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    b.push(r0 + i, c0 + j, s * v);
                }
            }
        };
        put(&self.a_u, 0, 0, 1.0);
        put(&self.a_z, nu, nu, 1.0);
        put(&self.b1t, 0, nu + nz, 1.0);
        put(&self.b2t, nu, nu + nz, 1.0);
        put(&self.b1, nu + nz, 0, 1.0);
        put(&self.b2, nu + nz, nu, 1.0);
        put(&self.a_p, nu + nz, nu + nz, -1.0);
        b.build()
    }
}

impl LinearOperator for BlockSystem {
    fn dim(&self) -> usize {
        self.n_u() + self.n_z() + self.n_p()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (nu, nz) = (self.n_u(), self.n_z());
        let (xu, rest) = x.split_at(nu);
        let (xz, xp) = rest.split_at(nz);
        let (yu, rest) = y.split_at_mut(nu);
        let (yz, yp) = rest.split_at_mut(nz);
        self.a_u.spmv_into(xu, yu);
        self.b1t.spmv_add(1.0, xp, yu);
        self.a_z.spmv_into(xz, yz);
        self.b2t.spmv_add(1.0, xp, yz);
        self.b1.spmv_into(xu, yp);
        self.b2.spmv_add(1.0, xz, yp);
        self.a_p.spmv_add(-1.0, xp, yp);
    }
}

/// Drops rows and columns flagged in the masks; constrained rows of a
/// diagonal block get `diag` on the diagonal.
fn eliminate(m: &SparseMatrix, rows: &[bool], cols: &[bool], diag: Option<f64>) -> SparseMatrix {
    let mut b = TripletBuilder::with_capacity(m.nrows(), m.ncols(), m.nnz());
    for i in 0..m.nrows() {
        if rows[i] {
            if let Some(d) = diag {
                b.push(i, i, d);
            }
            continue;
        }
        let (c, v) = m.row(i);
        for (&j, &x) in c.iter().zip(v) {
            if !cols[j] {
                b.push(i, j, x);
            }
        }
    }
    b.build()
}

/// Blocks of the discrete problem before and after constraint elimination,
/// reused across time steps.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub material: MaterialField,
    pub params: ModelParams,
    pub dofmap: DofMap,
    pub data: ProblemData,
    raw: BlockSystem,
    constrained: BlockSystem,
}

impl Discretization {
    pub fn new(
        mesh: Mesh,
        material: MaterialField,
        params: ModelParams,
        data: ProblemData,
    ) -> Result<Self> {
        params.validate()?;
        if material.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch(format!(
                "{} materials for {} triangles",
                material.len(),
                mesh.num_triangles()
            )));
        }
        let dofmap = DofMap::new(&mesh);
        let a_u = assemble_elasticity(&mesh, &material, &dofmap)?;
        let a_z = assemble_darcy_mass(&mesh, &material, &dofmap, params.dt)?;
        let (b1, b2) = assemble_div_couplings(&mesh, &dofmap, params.dt)?;
        let a_p = assemble_pressure_block(&mesh, &params, &dofmap)?;

        let uc = &dofmap.u_constrained;
        let zc = &dofmap.z_constrained;
        let pc = dofmap.p_constrained();
        let zero = (
            vec![0.0; dofmap.n_u()],
            vec![0.0; dofmap.n_z()],
            vec![0.0; dofmap.n_p()],
        );
        let constrained = BlockSystem::from_blocks(
            eliminate(&a_u, uc, uc, Some(1.0)),
            eliminate(&a_z, zc, zc, Some(1.0)),
            eliminate(&b1, &pc, uc, None),
            eliminate(&b2, &pc, zc, None),
            eliminate(&a_p, &pc, &pc, Some(1.0)),
            zero.clone(),
        )?;
        let raw = BlockSystem::from_blocks(a_u, a_z, b1, b2, a_p, zero)?;
        Ok(Self {
            mesh,
            material,
            params,
            dofmap,
            data,
            raw,
            constrained,
        })
    }

    /// Blocks before constraint elimination (zero right-hand side).
    pub fn raw_blocks(&self) -> &BlockSystem {
        &self.raw
    }

    /// Blocks after constraint elimination (zero right-hand side).
    pub fn blocks(&self) -> &BlockSystem {
        &self.constrained
    }

    /// Essential values `(g_u, g_z, g_p)` at time `t`, zero off the constraints.
    pub fn boundary_values(&self, t: f64) -> State {
        let mut g = State::zeros(&self.dofmap);
        let ProblemData::Manufactured(exact) = self.data else {
            return g;
        };
        for (v, &x) in self.mesh.vertices.iter().enumerate() {
            let u = exact.displacement(x, t);
            let z = exact.flux(x, t);
            for c in 0..2 {
                let i = DofMap::vector_dof(v, c);
                if self.dofmap.u_constrained[i] {
                    g.u[i] = u[c];
                }
                if self.dofmap.z_constrained[i] {
                    g.z[i] = z[c];
                }
            }
        }
        if let Some(k) = self.dofmap.pinned_pressure {
            g.p[k] = exact.pressure(self.mesh.centroid(k), t);
        }
        g
    }

    /// `(g₁(t), q_K)` for every element.
    pub fn mass_source_load(&self, t: f64) -> Vec<f64> {
        let ProblemData::Manufactured(exact) = self.data else {
            return vec![0.0; self.dofmap.n_p()];
        };
        (0..self.mesh.num_triangles())
            .map(|k| {
                let w = self.mesh.area(k) / 3.0;
                edge_midpoints(&self.mesh, k)
                    .iter()
                    .map(|(x, _)| w * exact.mass_source(*x, t))
                    .sum()
            })
            .collect()
    }

    /// Right-hand side of the step ending at `t`, given the previous state.
    pub fn rhs(&self, prev: &State, t: f64) -> Vec<f64> {
        let raw = &self.raw;
        let (nu, nz, np) = (raw.n_u(), raw.n_z(), raw.n_p());
        let scale = self.params.dt / self.params.alpha;

        let mut f1 = vec![0.0; nu];
        let mut f2 = vec![0.0; nz];
        let mut f3: Vec<f64> = self
            .mass_source_load(t)
            .iter()
            .map(|g| -scale * g)
            .collect();
        raw.b1.spmv_add(1.0, &prev.u, &mut f3);
        raw.a_p.spmv_add(-1.0, &prev.p, &mut f3);

        // lift the essential values
        let g = self.boundary_values(t);
        raw.a_u.spmv_add(-1.0, &g.u, &mut f1);
        raw.b1.spmv_transpose_add(-1.0, &g.p, &mut f1);
        raw.a_z.spmv_add(-1.0, &g.z, &mut f2);
        raw.b2.spmv_transpose_add(-1.0, &g.p, &mut f2);
        raw.b1.spmv_add(-1.0, &g.u, &mut f3);
        raw.b2.spmv_add(-1.0, &g.z, &mut f3);
        raw.a_p.spmv_add(1.0, &g.p, &mut f3);

        for i in 0..nu {
            if self.dofmap.u_constrained[i] {
                f1[i] = g.u[i];
            }
        }
        for i in 0..nz {
            if self.dofmap.z_constrained[i] {
                f2[i] = g.z[i];
            }
        }
        if let Some(k) = self.dofmap.pinned_pressure {
            f3[k] = -g.p[k];
        }
        debug_assert_eq!(f3.len(), np);
        [f1, f2, f3].concat()
    }

    /// Full system of the step ending at `t`.
    pub fn assemble_system(&self, prev: &State, t: f64) -> BlockSystem {
        let mut system = self.constrained.clone();
        system.set_rhs(&self.rhs(prev, t));
        system
    }

    /// Interpolant of the analytic solution (nodal for P1, centroid for P0).
    pub fn interpolate_exact(&self, t: f64) -> Option<State> {
        let ProblemData::Manufactured(exact) = self.data else {
            return None;
        };
        let mut s = State::zeros(&self.dofmap);
        for (v, &x) in self.mesh.vertices.iter().enumerate() {
            let f = exact.eval(x, t);
            s.u[2 * v..2 * v + 2].copy_from_slice(&f.u);
            s.z[2 * v..2 * v + 2].copy_from_slice(&f.z);
        }
        for k in 0..self.mesh.num_triangles() {
            s.p[k] = exact.pressure(self.mesh.centroid(k), t);
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::params::Material;
    use crate::linalg::CholeskyFactor;
    use nalgebra::DVector;

    fn disc(n: usize, nu: f64, kappa: f64) -> Discretization {
        let mesh = Mesh::unit_square(n).unwrap();
        let m = Material::new(nu, kappa).unwrap();
        let field = MaterialField::uniform(mesh.num_triangles(), m);
        Discretization::new(
            mesh,
            field,
            ModelParams::default(),
            ProblemData::Manufactured(ExactSolution::new(m)),
        )
        .unwrap()
    }

    #[test]
    fn global_matrix_is_symmetric() {
        for (nu, kappa) in [(0.3, 1e-2), (0.4999, 1e-9)] {
            let d = disc(4, nu, kappa);
            for m in [d.blocks().to_sparse(), d.raw_blocks().to_sparse()] {
                assert!(m.max_asymmetry() <= 1e-12 * m.max_abs());
            }
        }
    }

    #[test]
    fn constrained_blocks_are_spd() {
        let d = disc(4, 0.4999, 1e-9);
        assert!(CholeskyFactor::factor(&d.blocks().a_u).is_ok());
        assert!(CholeskyFactor::factor(&d.blocks().a_z).is_ok());
    }

    #[test]
    fn first_step_rhs_structure() {
        let d = disc(4, 0.3, 1e-2);
        let zero = State::zeros(&d.dofmap);
        let sys = d.assemble_system(&zero, d.params.dt);
        // interior momentum and Darcy rows only see lifted boundary data
        assert!(sys.f3.iter().any(|v| v.abs() > 1e-8));
        let free_u_nonzero = (0..sys.n_u())
            .filter(|&i| !d.dofmap.u_constrained[i])
            .any(|i| sys.f1[i] != 0.0);
        assert!(free_u_nonzero, "boundary lift reaches interior rows");
        let homog = Discretization::new(
            d.mesh.clone(),
            d.material.clone(),
            d.params,
            ProblemData::Homogeneous,
        )
        .unwrap();
        assert!(homog.rhs(&zero, 0.1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn direct_step_reproduces_constraints() {
        let d = disc(3, 0.3, 1e-2);
        let zero = State::zeros(&d.dofmap);
        let t = d.params.dt;
        let sys = d.assemble_system(&zero, t);
        let k = sys.to_sparse().to_dense();
        let x = k.lu().solve(&DVector::from_vec(sys.rhs())).unwrap();
        let state = State::from_vector(&d.dofmap, x.as_slice());
        let g = d.boundary_values(t);
        for i in 0..d.dofmap.n_u() {
            if d.dofmap.u_constrained[i] {
                assert!((state.u[i] - g.u[i]).abs() < 1e-12);
            }
        }
        assert!((state.p[0] - g.p[0]).abs() < 1e-12);
    }

    #[test]
    fn block_apply_matches_assembled_matrix() {
        let d = disc(3, 0.3, 1e-2);
        let sys = d.blocks();
        let n = sys.dim();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 13) as f64 - 6.0) / 5.0).collect();
        let mut y = vec![0.0; n];
        sys.apply(&x, &mut y);
        let y2 = sys.to_sparse().spmv(&x);
        for (a, b) in y.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
