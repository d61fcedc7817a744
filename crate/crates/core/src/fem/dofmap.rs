use crate::mesh::{DisplacementBc, FluxBc, Mesh, Side};

/// Degree-of-freedom numbering for the three fields.
///
/// Displacement and flux are interleaved per vertex (`2v + c`); pressure has
/// one unknown per triangle. Constraint masks mark the essential conditions:
/// all displacement components on Dirichlet edges, the normal flux component
/// on flux edges, and a single pinned pressure when no edge fixes the
/// pressure level.
#[derive(Debug, Clone)]
pub struct DofMap {
    num_vertices: usize,
    num_triangles: usize,
    pub u_constrained: Vec<bool>,
    pub z_constrained: Vec<bool>,
    pub pinned_pressure: Option<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.num_vertices();
        let mut u_constrained = vec![false; 2 * nv];
        let mut z_constrained = vec![false; 2 * nv];
        let mut pressure_fixed = false;
        for edge in &mesh.edges {
            let Some(tag) = edge.tag else { continue };
            if tag.displacement == DisplacementBc::Dirichlet {
                for &v in &edge.vertices {
                    u_constrained[2 * v] = true;
                    u_constrained[2 * v + 1] = true;
                }
            }
            match tag.flux {
                FluxBc::NormalFlux => {
                    let c = match tag.side {
                        Side::Left | Side::Right => 0,
                        Side::Bottom | Side::Top => 1,
                    };
                    for &v in &edge.vertices {
                        z_constrained[2 * v + c] = true;
                    }
                }
                FluxBc::Pressure => pressure_fixed = true,
            }
        }
        Self {
            num_vertices: nv,
            num_triangles: mesh.num_triangles(),
            u_constrained,
            z_constrained,
            pinned_pressure: (!pressure_fixed).then_some(0),
        }
    }

    pub fn n_u(&self) -> usize {
        2 * self.num_vertices
    }

    pub fn n_z(&self) -> usize {
        2 * self.num_vertices
    }

    pub fn n_p(&self) -> usize {
        self.num_triangles
    }

    pub fn total(&self) -> usize {
        self.n_u() + self.n_z() + self.n_p()
    }

    pub fn vector_dof(vertex: usize, component: usize) -> usize {
        2 * vertex + component
    }

    pub fn free_u_dofs(&self) -> Vec<usize> {
        (0..self.n_u())
            .filter(|&i| !self.u_constrained[i])
            .collect()
    }

    pub fn p_constrained(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_p()];
        if let Some(k) = self.pinned_pressure {
            mask[k] = true;
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_constraints() {
        let mesh = Mesh::unit_square(3).unwrap();
        let d = DofMap::new(&mesh);
        assert_eq!((d.n_u(), d.n_z(), d.n_p()), (32, 32, 18));
        // all 12 boundary vertices constrain both displacement components
        assert_eq!(d.u_constrained.iter().filter(|&&c| c).count(), 24);
        // 8 side vertices fix one flux component, 4 corners fix both
        assert_eq!(d.z_constrained.iter().filter(|&&c| c).count(), 16);
        for v in 0..mesh.num_vertices() {
            if !mesh.is_boundary_vertex(v) {
                assert!(!d.u_constrained[2 * v] && !d.z_constrained[2 * v + 1]);
            }
        }
        assert_eq!(d.pinned_pressure, Some(0));
    }
}
