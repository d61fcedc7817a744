//! Structured triangulations of the unit square and block partitions.

use crate::error::{Error, Result};

/// Marker for the missing neighbour of a boundary edge.
pub const BOUNDARY: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Displacement condition on a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplacementBc {
    Dirichlet,
    Traction,
}

/// Flux condition on a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxBc {
    NormalFlux,
    Pressure,
}

/// Per-field tag of a boundary edge. Both fields carry their own condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryTag {
    pub side: Side,
    pub displacement: DisplacementBc,
    pub flux: FluxBc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    /// Second incident triangle, or [`BOUNDARY`].
    pub right: usize,
    pub tag: Option<BoundaryTag>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right == BOUNDARY
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    n: usize,
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Edge indices of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
}

impl Mesh {
    /// `n × n` squares, each split along its lower-left to upper-right
    /// diagonal. Every boundary edge is Dirichlet for displacement and
    /// normal-flux for the Darcy field.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one cell per side".into(),
            ));
        }
        let np = n + 1;
        let h = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let vid = |i: usize, j: usize| j * np + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) =
                    (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        // Edges in first-seen order over triangles.
        let mut edges: Vec<Edge> = Vec::with_capacity(3 * n * n + 2 * n);
        let mut lookup = std::collections::HashMap::with_capacity(3 * n * n + 2 * n);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        left: t,
                        right: BOUNDARY,
                        tag: None,
                    });
                    edges.len() - 1
                });
                if edges[e].left != t {
                    edges[e].right = t;
                }
                local[k] = e;
            }
            triangle_edges.push(local);
        }

        let tol = 1e-12;
        for edge in edges.iter_mut().filter(|e| e.right == BOUNDARY) {
            let [a, b] = edge.vertices.map(|v| vertices[v]);
            let side = if a[0].abs() < tol && b[0].abs() < tol {
                Side::Left
            } else if (a[0] - 1.0).abs() < tol && (b[0] - 1.0).abs() < tol {
                Side::Right
            } else if a[1].abs() < tol && b[1].abs() < tol {
                Side::Bottom
            } else {
                Side::Top
            };
            edge.tag = Some(BoundaryTag {
                side,
                displacement: DisplacementBc::Dirichlet,
                flux: FluxBc::NormalFlux,
            });
        }

        let mesh = Self {
            n,
            vertices,
            triangles,
            edges,
            triangle_edges,
        };
        for t in 0..mesh.triangles.len() {
            let area = mesh.signed_area(t);
            if area <= 0.0 {
                return Err(Error::DegenerateElement { element: t, area });
            }
        }
        Ok(mesh)
    }

    /// Cells per side.
    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices.map(|v| self.vertices[v]);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let [x, y] = self.vertices[v];
        let tol = 1e-12;
        x.abs() < tol || y.abs() < tol || (x - 1.0).abs() < tol || (y - 1.0).abs() < tol
    }

    /// Triangles incident to each vertex, ascending.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(t);
            }
        }
        out
    }
}

/// Element ownership over a `k_x × k_y` grid of square blocks.
#[derive(Debug, Clone)]
pub struct Partition {
    pub owner: Vec<usize>,
    pub kx: usize,
    pub ky: usize,
}

impl Partition {
    /// Each triangle goes to the block containing its centroid; block
    /// `(bx, by)` has index `by · k_x + bx`.
    pub fn structured(mesh: &Mesh, kx: usize, ky: usize) -> Result<Self> {
        let n = mesh.cells_per_side();
        if kx == 0 || ky == 0 || n % kx != 0 || n % ky != 0 {
            return Err(Error::InvalidArgument(format!(
                "partition {kx}x{ky} does not divide {n} cells per side"
            )));
        }
        let owner = (0..mesh.num_triangles())
            .map(|t| {
                let [x, y] = mesh.centroid(t);
                let bx = ((x * kx as f64).floor() as usize).min(kx - 1);
                let by = ((y * ky as f64).floor() as usize).min(ky - 1);
                by * kx + bx
            })
            .collect();
        Ok(Self { owner, kx, ky })
    }

    pub fn num_subdomains(&self) -> usize {
        self.kx * self.ky
    }

    /// Grid coordinates `(column, row)` of subdomain `s`.
    pub fn block_coords(&self, s: usize) -> (usize, usize) {
        (s % self.kx, s / self.kx)
    }

    pub fn elements_of(&self, s: usize) -> Vec<usize> {
        self.owner
            .iter()
            .enumerate()
            .filter_map(|(t, &o)| (o == s).then_some(t))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh_counts() {
        let m = Mesh::unit_square(1).unwrap();
        assert_eq!(
            (m.num_vertices(), m.num_triangles(), m.edges.len()),
            (4, 2, 5)
        );
    }

    #[test]
    fn two_by_two_counts() {
        let m = Mesh::unit_square(2).unwrap();
        assert_eq!(
            (m.num_vertices(), m.num_triangles(), m.edges.len()),
            (9, 8, 16)
        );
        let boundary = m.edges.iter().filter(|e| e.is_boundary()).count();
        assert_eq!(boundary, 8);
        assert_eq!(m.edges.len() - boundary, 8);
    }

    #[test]
    fn zero_cells_is_an_error() {
        assert!(Mesh::unit_square(0).is_err());
    }

    #[test]
    fn areas_tile_the_square() {
        for n in [1, 3, 7, 16] {
            let m = Mesh::unit_square(n).unwrap();
            let total: f64 = (0..m.num_triangles()).map(|t| m.area(t)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((0..m.num_triangles()).all(|t| m.signed_area(t) > 0.0));
            assert_eq!(m.edges.len(), 3 * n * n + 2 * n);
        }
    }

    #[test]
    fn edge_incidence_is_symmetric() {
        let m = Mesh::unit_square(5).unwrap();
        for (e, edge) in m.edges.iter().enumerate() {
            assert!(m.triangle_edges[edge.left].contains(&e));
            if !edge.is_boundary() {
                assert!(m.triangle_edges[edge.right].contains(&e));
                assert_ne!(edge.left, edge.right);
            }
        }
        for (t, te) in m.triangle_edges.iter().enumerate() {
            for &e in te {
                assert!(m.edges[e].left == t || m.edges[e].right == t);
            }
        }
    }

    #[test]
    fn boundary_edges_carry_both_tags() {
        let m = Mesh::unit_square(4).unwrap();
        for edge in &m.edges {
            match edge.tag {
                Some(tag) => {
                    assert!(edge.is_boundary());
                    assert_eq!(tag.displacement, DisplacementBc::Dirichlet);
                    assert_eq!(tag.flux, FluxBc::NormalFlux);
                    assert!(edge.vertices.iter().all(|&v| m.is_boundary_vertex(v)));
                }
                None => assert!(!edge.is_boundary()),
            }
        }
    }

    #[test]
    fn partitions() {
        let m = Mesh::unit_square(8).unwrap();
        let p1 = Partition::structured(&m, 1, 1).unwrap();
        assert!(p1.owner.iter().all(|&o| o == 0));
        let p4 = Partition::structured(&m, 2, 2).unwrap();
        for s in 0..4 {
            assert_eq!(p4.elements_of(s).len(), 32);
        }
        let total: usize = (0..4).map(|s| p4.elements_of(s).len()).sum();
        assert_eq!(total, m.num_triangles());
        assert!(Partition::structured(&m, 3, 2).is_err());
    }
}
