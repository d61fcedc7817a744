//! Manufactured solution on the unit square and its compatible data.

use std::f64::consts::PI;

use super::params::{Material, ModelParams};

/// Analytic `(u, z, p)` for a homogeneous material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValues {
    pub u: [f64; 2],
    pub z: [f64; 2],
    pub p: f64,
}

impl ExactSolution {
    pub fn new(material: Material) -> Self {
        let (lambda, mu) = material.lame();
        Self {
            lambda,
            mu,
            kappa: material.kappa,
        }
    }

    /// `[cos 2πx sin 2πy, sin 2πx cos 2πy]`
    fn shape(x: [f64; 2]) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        [cx * sy, sx * cy]
    }

    pub fn displacement(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let scale = -(2.0 * PI * t).sin() / (4.0 * PI * (self.lambda + 2.0 * self.mu));
        Self::shape(x).map(|s| scale * s)
    }

    pub fn flux(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let scale = -2.0 * PI * self.kappa * (2.0 * PI * t).sin();
        Self::shape(x).map(|s| scale * s)
    }

    pub fn pressure(&self, x: [f64; 2], t: f64) -> f64 {
        (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() * (2.0 * PI * t).sin()
    }

    pub fn pressure_gradient(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let st = (2.0 * PI * t).sin();
        Self::shape(x).map(|s| 2.0 * PI * s * st)
    }

    pub fn eval(&self, x: [f64; 2], t: f64) -> FieldValues {
        FieldValues {
            u: self.displacement(x, t),
            z: self.flux(x, t),
            p: self.pressure(x, t),
        }
    }

    /// Mass-balance source `g₁ = div(u_t + z)`.
    pub fn mass_source(&self, x: [f64; 2], t: f64) -> f64 {
        let s = (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
        2.0 * PI / (self.lambda + 2.0 * self.mu) * s * (2.0 * PI * t).cos()
            + 8.0 * PI * PI * self.kappa * s * (2.0 * PI * t).sin()
    }

    /// Boundary flux `g₂ = z · n`.
    pub fn normal_flux(&self, x: [f64; 2], t: f64, normal: [f64; 2]) -> f64 {
        let z = self.flux(x, t);
        z[0] * normal[0] + z[1] * normal[1]
    }
}

/// `(g₁, g₂)` at a boundary point with outward normal `normal`.
pub fn source_terms(
    x: [f64; 2],
    t: f64,
    material: Material,
    normal: [f64; 2],
    _params: &ModelParams,
) -> (f64, f64) {
    let exact = ExactSolution::new(material);
    (exact.mass_source(x, t), exact.normal_flux(x, t, normal))
}
