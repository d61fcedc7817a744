//! Drivers for the scalability, overlap, permeability and convergence studies.

use log::info;

use crate::block_precond::PrecondVariant;
use crate::error::Result;
use crate::harness::config::{Experiment, ExperimentConfig, MaterialPattern};
use crate::harness::pattern::{material_a, material_b};
use crate::harness::report::{ExperimentReport, ReportRow};
use crate::harness::timeloop::{time_loop, Forcing, RunOutcome};

/// One planned run and the count reported for it in the original study.
#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub config: ExperimentConfig,
    pub paper_iterations: Option<usize>,
}

/// The two uniform regimes: compressible/permeable and nearly
/// incompressible/tight.
pub const REGIMES: [(f64, f64); 2] = [(0.3, 1e-2), (0.4999, 1e-9)];

const TABLE1_LEFT_PAPER: [[usize; 7]; 2] = [[4, 5, 7, 7, 9, 11, 11], [6, 9, 12, 14, 17, 19, 20]];
const TABLE1_RIGHT_PAPER: [[usize; 4]; 2] = [[52, 59, 60, 78], [56, 52, 48, 50]];
pub const TABLE2_KAPPAS: [f64; 6] = [1.0, 1e-1, 1e-3, 1e-5, 1e-7, 1e-9];
const TABLE2_PAPER: [[usize; 6]; 2] = [[51, 19, 7, 14, 16, 16], [43, 17, 9, 9, 14, 47]];
const TABLE2_HETEROGENEOUS_PAPER: [usize; 2] = [175, 87];

/// `N = k²` for `k = 2..=8` with `H/h = 8` and one layer of overlap.
pub fn table1_left_plan(base: &ExperimentConfig) -> Vec<PlannedRun> {
    let mut plan = Vec::new();
    for (case, &(nu, kappa)) in REGIMES.iter().enumerate() {
        for (i, k) in (2..=8).enumerate() {
            plan.push(PlannedRun {
                config: ExperimentConfig {
                    experiment: Experiment::Table1Left,
                    n: 8 * k,
                    kx: k,
                    ky: k,
                    overlap: 1,
                    nu,
                    kappa,
                    pattern: MaterialPattern::Uniform,
                    ..base.clone()
                },
                paper_iterations: Some(TABLE1_LEFT_PAPER[case][i]),
            });
        }
    }
    plan
}

/// `N = 16` with `H/δ ∈ {8, 16, 32, 64}` at `H/h = 64`; scaled down to
/// `H/h = 32`, where `H/δ = 64` has no integer overlap and is dropped.
pub fn table1_right_plan(base: &ExperimentConfig) -> Vec<PlannedRun> {
    let h_ratio = if base.scale_down { 32 } else { 64 };
    let mut plan = Vec::new();
    for (case, &(nu, kappa)) in REGIMES.iter().enumerate() {
        for (i, h_over_delta) in [8usize, 16, 32, 64].into_iter().enumerate() {
            if h_over_delta > h_ratio {
                continue;
            }
            plan.push(PlannedRun {
                config: ExperimentConfig {
                    experiment: Experiment::Table1Right,
                    n: 4 * h_ratio,
                    kx: 4,
                    ky: 4,
                    overlap: h_ratio / h_over_delta,
                    nu,
                    kappa,
                    pattern: MaterialPattern::Uniform,
                    ..base.clone()
                },
                paper_iterations: Some(TABLE1_RIGHT_PAPER[case][i]),
            });
        }
    }
    plan
}

/// Permeability sweep for both Poisson ratios, then the two heterogeneous
/// layouts; `N = 16`, `H/h = 8`, `r_tol = 1e-10`.
pub fn table2_plan(base: &ExperimentConfig) -> Vec<PlannedRun> {
    let common = ExperimentConfig {
        experiment: Experiment::Table2,
        n: 32,
        kx: 4,
        ky: 4,
        overlap: 1,
        rtol: 1e-10,
        ..base.clone()
    };
    let mut plan = Vec::new();
    for (case, nu) in [0.3, 0.4999].into_iter().enumerate() {
        for (i, &kappa) in TABLE2_KAPPAS.iter().enumerate() {
            plan.push(PlannedRun {
                config: ExperimentConfig {
                    nu,
                    kappa,
                    pattern: MaterialPattern::Uniform,
                    ..common.clone()
                },
                paper_iterations: Some(TABLE2_PAPER[case][i]),
            });
        }
    }
    let a = material_a();
    for (pattern, paper) in [MaterialPattern::Across, MaterialPattern::Along]
        .into_iter()
        .zip(TABLE2_HETEROGENEOUS_PAPER)
    {
        plan.push(PlannedRun {
            config: ExperimentConfig {
                nu: a.nu,
                kappa: a.kappa,
                pattern,
                ..common.clone()
            },
            paper_iterations: Some(paper),
        });
    }
    debug_assert!(material_b().nu > a.nu);
    plan
}

pub const CONVERGENCE_MESHES: [usize; 4] = [8, 16, 32, 64];

/// Mesh sequence for the manufactured solution. `Δt` shrinks with `h²` from
/// the base value at `n = 8` so the first-order time error stays below the
/// second-order displacement error. The many small steps are solved with the
/// direct factorization; iteration counts are not the point here.
pub fn convergence_plan(base: &ExperimentConfig) -> Vec<PlannedRun> {
    CONVERGENCE_MESHES
        .iter()
        .map(|&n| {
            let r = 8.0 / n as f64;
            PlannedRun {
                config: ExperimentConfig {
                    experiment: Experiment::Convergence,
                    n,
                    pattern: MaterialPattern::Uniform,
                    dt: base.dt * r * r,
                    precond: PrecondVariant::Direct,
                    ..base.clone()
                },
                paper_iterations: None,
            }
        })
        .collect()
}

pub fn plan(base: &ExperimentConfig) -> Vec<PlannedRun> {
    match base.experiment {
        Experiment::Table1Left => table1_left_plan(base),
        Experiment::Table1Right => table1_right_plan(base),
        Experiment::Table2 => table2_plan(base),
        Experiment::Convergence => convergence_plan(base),
        Experiment::Single => vec![PlannedRun {
            config: base.clone(),
            paper_iterations: None,
        }],
    }
}

pub fn report_row(planned: &PlannedRun, outcome: &RunOutcome) -> ReportRow {
    let c = &planned.config;
    ReportRow {
        experiment: c.experiment.to_string(),
        num_subdomains: c.num_subdomains(),
        h_ratio: c.h_ratio(),
        overlap: c.overlap,
        nu: c.nu,
        kappa: c.kappa,
        steps: outcome.steps,
        max_iterations: outcome.max_iterations(),
        mean_iterations: outcome.mean_iterations(),
        e_u: outcome.errors.map(|e| e.u),
        e_z: outcome.errors.map(|e| e.z),
        e_p: outcome.errors.map(|e| e.p),
        wall_seconds: outcome.wall_seconds,
        n: c.n,
        pattern: c.pattern.to_string(),
        precond: c.precond.to_string(),
        converged: outcome.converged(),
        orders: None,
        paper_iterations: planned.paper_iterations,
    }
}

/// `log₂(e(h) / e(h/2))` for consecutive rows.
pub fn fill_orders(rows: &mut [ReportRow]) {
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        let order = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => {
                (a / b).log2() * (rows[i].n as f64 / rows[i - 1].n as f64).log2().recip()
            }
            _ => f64::NAN,
        };
        let o = [
            order(prev.e_u, cur.e_u),
            order(prev.e_z, cur.e_z),
            order(prev.e_p, cur.e_p),
        ];
        rows[i].orders = Some(o);
    }
}

/// Run a plan in order.
pub fn run_plan(plan: &[PlannedRun]) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::default();
    for planned in plan {
        let outcome = time_loop(&planned.config, Forcing::Manufactured)?;
        let row = report_row(planned, &outcome);
        info!(
            "{} N={} n={} overlap={} nu={} kappa={:e} pattern={}: max {} mean {:.2} iterations{}",
            row.experiment,
            row.num_subdomains,
            row.n,
            row.overlap,
            row.nu,
            row.kappa,
            row.pattern,
            row.max_iterations,
            row.mean_iterations,
            if row.converged {
                ""
            } else {
                " (NOT CONVERGED)"
            }
        );
        report.rows.push(row);
    }
    if plan.first().map(|p| p.config.experiment) == Some(Experiment::Convergence) {
        fill_orders(&mut report.rows);
    }
    Ok(report)
}

pub fn run_table1_left(base: &ExperimentConfig) -> Result<ExperimentReport> {
    run_plan(&table1_left_plan(base))
}

pub fn run_table1_right(base: &ExperimentConfig) -> Result<ExperimentReport> {
    run_plan(&table1_right_plan(base))
}

pub fn run_table2(base: &ExperimentConfig) -> Result<ExperimentReport> {
    run_plan(&table2_plan(base))
}

pub fn run_convergence(base: &ExperimentConfig) -> Result<ExperimentReport> {
    run_plan(&convergence_plan(base))
}

/// Dispatch on `base.experiment`.
pub fn run_experiment(base: &ExperimentConfig) -> Result<ExperimentReport> {
    run_plan(&plan(base))
}
