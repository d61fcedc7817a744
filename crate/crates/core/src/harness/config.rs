//! Experiment configuration and the `key = value` file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::block_precond::PrecondVariant;
use crate::error::{Error, Result};
use crate::fem::{Material, ModelParams};
use crate::geneo::{GeneoPencil, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Table1Left,
    Table1Right,
    Table2,
    Convergence,
    Single,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Table1Left,
        Experiment::Table1Right,
        Experiment::Table2,
        Experiment::Convergence,
        Experiment::Single,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table1Left => "table1-left",
            Experiment::Table1Right => "table1-right",
            Experiment::Table2 => "table2",
            Experiment::Convergence => "convergence",
            Experiment::Single => "single",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialPattern {
    Uniform,
    Across,
    Along,
}

impl MaterialPattern {
    pub fn name(self) -> &'static str {
        match self {
            MaterialPattern::Uniform => "uniform",
            MaterialPattern::Across => "across",
            MaterialPattern::Along => "along",
        }
    }
}

impl fmt::Display for MaterialPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MaterialPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MaterialPattern::Uniform),
            "across" => Ok(MaterialPattern::Across),
            "along" => Ok(MaterialPattern::Along),
            _ => Err(Error::InvalidArgument(format!("unknown pattern '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Cells per side.
    pub n: usize,
    pub kx: usize,
    pub ky: usize,
    /// Overlap in element layers.
    pub overlap: usize,
    pub nu: f64,
    pub kappa: f64,
    pub stab: f64,
    pub dt: f64,
    pub t_end: f64,
    pub rtol: f64,
    pub max_iters: usize,
    pub restart: usize,
    /// Eigenvectors per subdomain, ignored when `tau` is set.
    pub deflation: usize,
    pub tau: Option<f64>,
    pub pencil: GeneoPencil,
    /// Prolongate local corrections with `R_iᵀ` instead of `R̃_iᵀ`.
    pub symmetric: bool,
    pub precond: PrecondVariant,
    pub pattern: MaterialPattern,
    pub threads: Option<usize>,
    pub scale_down: bool,
    pub csv: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let params = ModelParams::default();
        Self {
            experiment: Experiment::Single,
            n: 16,
            kx: 2,
            ky: 2,
            overlap: 1,
            nu: 0.3,
            kappa: 1e-2,
            stab: params.stab,
            dt: params.dt,
            t_end: params.t_end,
            rtol: 1e-8,
            max_iters: 1000,
            restart: 200,
            deflation: 15,
            tau: None,
            pencil: GeneoPencil::Neumann,
            symmetric: true,
            precond: PrecondVariant::GeneoHybrid,
            pattern: MaterialPattern::Uniform,
            threads: None,
            scale_down: false,
            csv: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value '{value}' for '{key}'")))
}

impl ExperimentConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            stab: self.stab,
            dt: self.dt,
            t_end: self.t_end,
            ..ModelParams::default()
        }
    }

    pub fn material(&self) -> Result<Material> {
        Material::new(self.nu, self.kappa)
    }

    pub fn selection(&self) -> Selection {
        match self.tau {
            Some(tau) => Selection::Threshold(tau),
            None => Selection::Fixed(self.deflation),
        }
    }

    pub fn num_subdomains(&self) -> usize {
        self.kx * self.ky
    }

    /// Cells per subdomain side, `H/h`.
    pub fn h_ratio(&self) -> f64 {
        self.n as f64 / self.kx.max(self.ky) as f64
    }

    /// Set one field by its file/CLI key (dashes and underscores both accepted).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('_', "-").as_str() {
            "experiment" => self.experiment = value.parse()?,
            "n" => self.n = parse(key, value)?,
            "kx" => self.kx = parse(key, value)?,
            "ky" => self.ky = parse(key, value)?,
            "overlap" => self.overlap = parse(key, value)?,
            "nu" => self.nu = parse(key, value)?,
            "kappa" => self.kappa = parse(key, value)?,
            "dstab" | "stab" => self.stab = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "t-end" => self.t_end = parse(key, value)?,
            "rtol" => self.rtol = parse(key, value)?,
            "max-iters" => self.max_iters = parse(key, value)?,
            "restart" => self.restart = parse(key, value)?,
            "deflation" => self.deflation = parse(key, value)?,
            "tau" => self.tau = Some(parse(key, value)?),
            "prolongation" => {
                self.symmetric = match value {
                    "symmetric" => true,
                    "restricted" => false,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown prolongation '{value}'"
                        )))
                    }
                }
            }
            "pencil" => self.pencil = value.parse()?,
            "precond" => self.precond = value.parse()?,
            "pattern" => self.pattern = value.parse()?,
            "threads" => self.threads = Some(parse(key, value)?),
            "scale-down" => self.scale_down = parse(key, value)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidArgument(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config {
                    line: i + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.kx == 0 || self.ky == 0 {
            return Err(Error::InvalidArgument(
                "n, kx and ky must be positive".into(),
            ));
        }
        if self.kx > self.n || self.ky > self.n {
            return Err(Error::InvalidArgument(format!(
                "{}x{} subdomains on a {}x{} mesh",
                self.kx, self.ky, self.n, self.n
            )));
        }
        if self.n % self.kx != 0 || self.n % self.ky != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} cells per side do not split into {}x{} equal blocks",
                self.n, self.kx, self.ky
            )));
        }
        if self.overlap == 0 {
            return Err(Error::InvalidArgument("overlap must be at least 1".into()));
        }
        if !(self.rtol > 0.0) || self.restart == 0 || self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "rtol, restart and max-iters must be positive".into(),
            ));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0) {
                return Err(Error::InvalidArgument("tau must be positive".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        self.material()?;
        self.params().validate()
    }
}
