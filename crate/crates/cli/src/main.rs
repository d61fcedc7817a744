use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;

use biot_geneo::harness::{run_experiment, ExperimentConfig};

/// Overlapping Schwarz / GenEO preconditioned GMRES for the three-field Biot model.
#[derive(Parser, Debug)]
#[command(name = "biot-geneo", version)]
struct Cli {
    /// table1-left | table1-right | table2 | convergence | single
    #[arg(long)]
    experiment: Option<String>,
    /// Cells per side of the unit square.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kx: Option<usize>,
    #[arg(long)]
    ky: Option<usize>,
    /// Overlap in element layers (δ/h).
    #[arg(long)]
    overlap: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Pressure-jump stabilization parameter.
    #[arg(long)]
    dstab: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    /// GenEO eigenvectors per subdomain.
    #[arg(long)]
    deflation: Option<usize>,
    /// GenEO eigenvalue threshold; overrides --deflation.
    #[arg(long)]
    tau: Option<f64>,
    /// GenEO left operator: neumann | dirichlet
    #[arg(long)]
    pencil: Option<String>,
    /// Schwarz prolongation: symmetric (R_iᵀ) or restricted (R̃_iᵀ).
    #[arg(long)]
    prolongation: Option<String>,
    /// exact | ic0 | oas1 | geneo-additive | geneo-hybrid
    #[arg(long)]
    precond: Option<String>,
    /// uniform | across | along
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Halve H/h in table1-right.
    #[arg(long)]
    scale_down: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        put("experiment", self.experiment.clone());
        put("n", self.n.map(|v| v.to_string()));
        put("kx", self.kx.map(|v| v.to_string()));
        put("ky", self.ky.map(|v| v.to_string()));
        put("overlap", self.overlap.map(|v| v.to_string()));
        put("nu", self.nu.map(|v| v.to_string()));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("dstab", self.dstab.map(|v| v.to_string()));
        put("dt", self.dt.map(|v| v.to_string()));
        put("t-end", self.t_end.map(|v| v.to_string()));
        put("rtol", self.rtol.map(|v| v.to_string()));
        put("deflation", self.deflation.map(|v| v.to_string()));
        put("tau", self.tau.map(|v| v.to_string()));
        put("pencil", self.pencil.clone());
        put("prolongation", self.prolongation.clone());
        put("precond", self.precond.clone());
        put("pattern", self.pattern.clone());
        put("threads", self.threads.map(|v| v.to_string()));
        put("scale-down", self.scale_down.then(|| "true".to_string()));
        put("csv", self.csv.as_ref().map(|p| p.display().to_string()));
        out
    }

    fn resolve(&self) -> biot_geneo::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.overrides() {
            cfg.set(key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let cfg = match cli.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(threads) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            error!("could not configure thread pool: {e}");
        }
    }
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cfg.csv {
        Some(path) => report.save(path),
        None => report.write_csv(std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if report.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
