//! Element loops for the blocks of the time-discrete Biot system.
//!
//! Sign and scaling follow the symmetrized form: the flux equation is scaled
//! by Δt and the mass balance by −Δt, so that
//! `A_z = Δt (κ⁻¹ z, w)`, `B1 = −(∇·u, q)`, `B2 = −Δt (∇·z, q)` and
//! `A_p = (c₀/α) M_p + J`.

use super::dofmap::DofMap;
use super::params::{MaterialField, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::Mesh;

/// Constant gradients of the three P1 basis functions and the element area.
pub fn p1_gradients(mesh: &Mesh, t: usize) -> Result<([[f64; 2]; 3], f64)> {
    let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
    let area = mesh.signed_area(t);
    if area <= 0.0 {
        return Err(Error::DegenerateElement { element: t, area });
    }
    let s = 1.0 / (2.0 * area);
    Ok((
        [
            [(b[1] - c[1]) * s, (c[0] - b[0]) * s],
            [(c[1] - a[1]) * s, (a[0] - c[0]) * s],
            [(a[1] - b[1]) * s, (b[0] - a[0]) * s],
        ],
        area,
    ))
}

/// 6×6 stiffness of `∫ 2μ ε(u):ε(v) + λ div u div v` on one triangle, local
/// index `2a + c` for vertex `a`, component `c`.
pub fn elasticity_element(grads: &[[f64; 2]; 3], area: f64, lambda: f64, mu: f64) -> [[f64; 6]; 6] {
    let mut k = [[0.0; 6]; 6];
    for a in 0..3 {
        for c in 0..2 {
            for b in 0..3 {
                for d in 0..2 {
                    let dot = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    let delta = if c == d { dot } else { 0.0 };
                    k[2 * a + c][2 * b + d] = area
                        * (mu * (delta + grads[a][d] * grads[b][c])
                            + lambda * grads[a][c] * grads[b][d]);
                }
            }
        }
    }
    k
}

pub fn assemble_elasticity(
    mesh: &Mesh,
    material: &MaterialField,
    dofmap: &DofMap,
) -> Result<SparseMatrix> {
    let mut builder =
        TripletBuilder::with_capacity(dofmap.n_u(), dofmap.n_u(), 36 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (grads, area) = p1_gradients(mesh, t)?;
        let ke = elasticity_element(&grads, area, material.lambda[t], material.mu[t]);
        for a in 0..3 {
            for c in 0..2 {
                let row = DofMap::vector_dof(tri[a], c);
                for b in 0..3 {
                    for d in 0..2 {
                        builder.push(row, DofMap::vector_dof(tri[b], d), ke[2 * a + c][2 * b + d]);
                    }
                }
            }
        }
    }
    Ok(builder.build())
}

/// Vector P1 mass matrix weighted by `Δt/κ` per element.
pub fn assemble_darcy_mass(
    mesh: &Mesh,
    material: &MaterialField,
    dofmap: &DofMap,
    dt: f64,
) -> Result<SparseMatrix> {
    let mut builder =
        TripletBuilder::with_capacity(dofmap.n_z(), dofmap.n_z(), 18 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (_, area) = p1_gradients(mesh, t)?;
        let w = dt / material.kappa[t] * area / 12.0;
        for a in 0..3 {
            for b in 0..3 {
                let m = if a == b { 2.0 * w } else { w };
                for c in 0..2 {
                    builder.push(
                        DofMap::vector_dof(tri[a], c),
                        DofMap::vector_dof(tri[b], c),
                        m,
                    );
                }
            }
        }
    }
    Ok(builder.build())
}

/// `B1[K, j] = −∫_K div φ_j` and `B2 = Δt · B1` on the flux numbering.
pub fn assemble_div_couplings(
    mesh: &Mesh,
    dofmap: &DofMap,
    dt: f64,
) -> Result<(SparseMatrix, SparseMatrix)> {
    let mut b1 =
        TripletBuilder::with_capacity(dofmap.n_p(), dofmap.n_u(), 6 * mesh.num_triangles());
    let mut b2 =
        TripletBuilder::with_capacity(dofmap.n_p(), dofmap.n_z(), 6 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (grads, area) = p1_gradients(mesh, t)?;
        for a in 0..3 {
            for c in 0..2 {
                let div = -area * grads[a][c];
                b1.push(t, DofMap::vector_dof(tri[a], c), div);
                b2.push(t, DofMap::vector_dof(tri[a], c), dt * div);
            }
        }
    }
    Ok((b1.build(), b2.build()))
}

/// `(c₀/α) diag(|K|)` plus the jump penalty `δ |e|² [p][q]` on interior edges.
pub fn assemble_pressure_block(
    mesh: &Mesh,
    params: &ModelParams,
    dofmap: &DofMap,
) -> Result<SparseMatrix> {
    let mut builder = TripletBuilder::with_capacity(
        dofmap.n_p(),
        dofmap.n_p(),
        dofmap.n_p() + 4 * mesh.edges.len(),
    );
    let storage = params.c0 / params.alpha;
    for t in 0..mesh.num_triangles() {
        let (_, area) = p1_gradients(mesh, t)?;
        builder.push(t, t, storage * area);
    }
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.is_boundary() {
            continue;
        }
        let len = mesh.edge_length(e);
        let w = params.stab * len * len;
        let (k, l) = (edge.left, edge.right);
        builder.push(k, k, w);
        builder.push(l, l, w);
        builder.push(k, l, -w);
        builder.push(l, k, -w);
    }
    Ok(builder.build())
}
