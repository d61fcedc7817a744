use super::exact::ExactSolution;
use super::system::State;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub u: f64,
    pub z: f64,
    pub p: f64,
}

/// Edge midpoints of triangle `t` with their barycentric weights; the rule
/// is exact for quadratics and each point gets weight `|K|/3`.
pub fn edge_midpoints(mesh: &Mesh, t: usize) -> [([f64; 2], [f64; 3]); 3] {
    let [a, b, c] = mesh.triangles[t].map(|v| mesh.vertices[v]);
    let mid = |p: [f64; 2], q: [f64; 2]| [(p[0] + q[0]) * 0.5, (p[1] + q[1]) * 0.5];
    [
        (mid(a, b), [0.5, 0.5, 0.0]),
        (mid(b, c), [0.0, 0.5, 0.5]),
        (mid(c, a), [0.5, 0.0, 0.5]),
    ]
}

/// `L²(Ω)` errors of a discrete state against the analytic fields at time `t`.
pub fn error_norms(state: &State, exact: &ExactSolution, mesh: &Mesh, t: f64) -> ErrorNorms {
    let (mut eu, mut ez, mut ep) = (0.0, 0.0, 0.0);
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let w = mesh.area(k) / 3.0;
        for (x, bary) in edge_midpoints(mesh, k) {
            let v = exact.eval(x, t);
            for c in 0..2 {
                let uh: f64 = (0..3).map(|a| bary[a] * state.u[2 * tri[a] + c]).sum();
                let zh: f64 = (0..3).map(|a| bary[a] * state.z[2 * tri[a] + c]).sum();
                eu += w * (uh - v.u[c]).powi(2);
                ez += w * (zh - v.z[c]).powi(2);
            }
            ep += w * (state.p[k] - v.p).powi(2);
        }
    }
    ErrorNorms {
        u: eu.sqrt(),
        z: ez.sqrt(),
        p: ep.sqrt(),
    }
}
