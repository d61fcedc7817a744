//! Backward-Euler time loop with a preconditioner built once per run.

use std::time::Instant;

use log::{debug, info, warn};

use crate::block_precond::{BlockTriangularPreconditioner, DisplacementSolver, PrecondVariant};
use crate::decomposition::Decomposition;
use crate::error::Result;
use crate::fem::{
    error_norms, Discretization, ErrorNorms, ExactSolution, ModelParams, ProblemData, State,
};
use crate::geneo::GeneoPencil;
use crate::harness::config::{ExperimentConfig, MaterialPattern};
use crate::harness::pattern::{material_a, material_b, material_pattern};
use crate::krylov::{gmres, KrylovConfig};
use crate::linalg::{LdltFactor, LinearOperator};
use crate::mesh::{Mesh, Partition};

/// What drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// Manufactured solution; heterogeneous runs take it from material A.
    Manufactured,
    /// Zero sources, zero boundary data, zero initial state.
    Zero,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub steps: usize,
    /// GMRES iterations per step.
    pub iterations: Vec<usize>,
    /// Steps (1-based) whose solve did not reach the tolerance.
    pub failed_steps: Vec<usize>,
    pub final_time: f64,
    pub state: State,
    /// `None` for the zero-forcing problem.
    pub errors: Option<ErrorNorms>,
    pub num_dofs: usize,
    pub wall_seconds: f64,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.failed_steps.is_empty()
    }

    pub fn max_iterations(&self) -> usize {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        }
    }
}

pub enum SystemPreconditioner {
    Block(BlockTriangularPreconditioner),
    Direct(LdltFactor),
}

impl LinearOperator for SystemPreconditioner {
    fn dim(&self) -> usize {
        match self {
            SystemPreconditioner::Block(p) => p.dim(),
            SystemPreconditioner::Direct(f) => f.dim(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            SystemPreconditioner::Block(p) => p.apply(x, y),
            SystemPreconditioner::Direct(f) => f.apply(x, y),
        }
    }
}

/// Discretization, decomposition and preconditioner for one configuration.
pub struct Setup {
    pub discretization: Discretization,
    pub partition: Partition,
    pub preconditioner: SystemPreconditioner,
}

pub fn build_discretization(
    cfg: &ExperimentConfig,
    forcing: Forcing,
) -> Result<(Discretization, Partition)> {
    cfg.validate()?;
    let mesh = Mesh::unit_square(cfg.n)?;
    let partition = Partition::structured(&mesh, cfg.kx, cfg.ky)?;
    let (field, reference) = match cfg.pattern {
        MaterialPattern::Uniform => {
            let m = cfg.material()?;
            (
                material_pattern(MaterialPattern::Uniform, &partition, m, m),
                m,
            )
        }
        p => (
            material_pattern(p, &partition, material_a(), material_b()),
            material_a(),
        ),
    };
    let data = match forcing {
        Forcing::Manufactured => ProblemData::Manufactured(ExactSolution::new(reference)),
        Forcing::Zero => ProblemData::Homogeneous,
    };
    let params: ModelParams = cfg.params();
    Ok((Discretization::new(mesh, field, params, data)?, partition))
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, forcing: Forcing) -> Result<Self> {
        let (discretization, partition) = build_discretization(cfg, forcing)?;
        let decomposition = if cfg.precond.needs_decomposition() {
            let d = &discretization;
            let mut dec = Decomposition::build(&d.mesh, &partition, &d.dofmap, cfg.overlap)?;
            if cfg.pencil == GeneoPencil::Neumann && cfg.precond != PrecondVariant::OneLevel {
                dec.attach_neumann_matrices(&d.mesh, &d.material, &d.dofmap)?;
            }
            Some(dec)
        } else {
            None
        };
        let preconditioner = if cfg.precond == PrecondVariant::Direct {
            SystemPreconditioner::Direct(LdltFactor::factor(&discretization.blocks().to_sparse())?)
        } else {
            let solver = DisplacementSolver::for_variant(
                cfg.precond,
                decomposition,
                cfg.selection(),
                cfg.symmetric,
            )?;
            SystemPreconditioner::Block(BlockTriangularPreconditioner::build(
                discretization.blocks(),
                solver,
            )?)
        };
        Ok(Self {
            discretization,
            partition,
            preconditioner,
        })
    }
}

pub fn krylov_config(cfg: &ExperimentConfig) -> KrylovConfig {
    KrylovConfig {
        rtol: cfg.rtol,
        max_iters: cfg.max_iters,
        restart: cfg.restart,
    }
}

/// Run every step from `Δt` to `t_end`. Non-converged steps are recorded and
/// the loop continues from the returned iterate.
pub fn time_loop(cfg: &ExperimentConfig, forcing: Forcing) -> Result<RunOutcome> {
    let start = Instant::now();
    let setup = Setup::new(cfg, forcing)?;
    let d = &setup.discretization;
    let system = d.blocks();
    let kcfg = krylov_config(cfg);
    let steps = d.params.num_steps();
    info!(
        "{}: n={} N={} dofs={} steps={} precond={}",
        cfg.experiment,
        cfg.n,
        cfg.num_subdomains(),
        system.dim(),
        steps,
        cfg.precond
    );

    let mut state = d
        .interpolate_exact(0.0)
        .unwrap_or_else(|| State::zeros(&d.dofmap));
    let x0 = vec![0.0; system.dim()];
    let mut iterations = Vec::with_capacity(steps);
    let mut failed_steps = Vec::new();
    let mut t = 0.0;
    for step in 1..=steps {
        t = step as f64 * d.params.dt;
        let rhs = d.rhs(&state, t);
        let (next, report) = gmres(system, &setup.preconditioner, &rhs, &x0, &kcfg)?;
        debug!(
            "step {step} t={t:.5} iterations={} residual={:.3e}",
            report.iterations, report.final_residual
        );
        if !report.converged {
            warn!(
                "step {step} did not converge (residual {:.3e})",
                report.final_residual
            );
            failed_steps.push(step);
        }
        iterations.push(report.iterations);
        state = State::from_vector(&d.dofmap, &next);
    }
    let errors = match d.data {
        ProblemData::Manufactured(exact) => Some(error_norms(&state, &exact, &d.mesh, t)),
        ProblemData::Homogeneous => None,
    };
    Ok(RunOutcome {
        steps,
        iterations,
        failed_steps,
        final_time: t,
        state,
        errors,
        num_dofs: system.dim(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
