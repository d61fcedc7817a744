use crate::error::{Error, Result};

/// Scalar model and time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Biot-Willis coefficient.
    pub alpha: f64,
    /// Constrained specific storage.
    pub c0: f64,
    /// Weight of the pressure-jump stabilization.
    pub stab: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            c0: 0.0,
            stab: 0.1,
            dt: 0.0125,
            t_end: 0.25,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} outside (0, 1]",
                self.alpha
            )));
        }
        if !(self.c0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "c0 = {} is negative",
                self.c0
            )));
        }
        if !(self.stab > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stabilization weight {} must be positive",
                self.stab
            )));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return Err(Error::InvalidArgument(
                "time step and final time must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of backward-Euler steps needed to reach `t_end`.
    pub fn num_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Lamé parameters `(λ, μ)` for Young's modulus 1 and Poisson ratio `nu`.
pub fn lame_from_poisson(nu: f64) -> Result<(f64, f64)> {
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::InvalidArgument(format!(
            "Poisson ratio {nu} outside [0, 0.5)"
        )));
    }
    let mu = 1.0 / (2.0 * (1.0 + nu));
    let lambda = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Ok((lambda, mu))
}

/// Poisson ratio and scalar permeability of one material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub nu: f64,
    pub kappa: f64,
}

impl Material {
    pub fn new(nu: f64, kappa: f64) -> Result<Self> {
        lame_from_poisson(nu)?;
        if !(kappa > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "permeability {kappa} must be positive"
            )));
        }
        Ok(Self { nu, kappa })
    }

    pub fn lame(&self) -> (f64, f64) {
        lame_from_poisson(self.nu).expect("validated on construction")
    }
}

/// Per-element material data with the derived Lamé parameters.
#[derive(Debug, Clone)]
pub struct MaterialField {
    pub nu: Vec<f64>,
    pub kappa: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl MaterialField {
    pub fn uniform(num_elements: usize, material: Material) -> Self {
        Self::from_elements(&vec![material; num_elements])
    }

    pub fn from_elements(materials: &[Material]) -> Self {
        let mut field = Self {
            nu: Vec::with_capacity(materials.len()),
            kappa: Vec::with_capacity(materials.len()),
            lambda: Vec::with_capacity(materials.len()),
            mu: Vec::with_capacity(materials.len()),
        };
        for m in materials {
            let (lambda, mu) = m.lame();
            field.nu.push(m.nu);
            field.kappa.push(m.kappa);
            field.lambda.push(lambda);
            field.mu.push(mu);
        }
        field
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn material(&self, element: usize) -> Material {
        Material {
            nu: self.nu[element],
            kappa: self.kappa[element],
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.nu.windows(2).all(|w| w[0] == w[1]) && self.kappa.windows(2).all(|w| w[0] == w[1])
    }
}
