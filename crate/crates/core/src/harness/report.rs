//! One CSV row per run.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub const CSV_HEADER: [&str; 21] = [
    "experiment",
    "N",
    "H_over_h",
    "delta_over_h",
    "nu",
    "kappa",
    "steps",
    "max_iterations",
    "mean_iterations",
    "e_u",
    "e_z",
    "e_p",
    "wall_seconds",
    "n",
    "pattern",
    "precond",
    "converged",
    "order_u",
    "order_z",
    "order_p",
    "paper_iterations",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub num_subdomains: usize,
    pub h_ratio: f64,
    pub overlap: usize,
    pub nu: f64,
    pub kappa: f64,
    pub steps: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub e_u: Option<f64>,
    pub e_z: Option<f64>,
    pub e_p: Option<f64>,
    pub wall_seconds: f64,
    pub n: usize,
    pub pattern: String,
    pub precond: String,
    pub converged: bool,
    /// Empirical orders against the previous (coarser) row.
    pub orders: Option<[f64; 3]>,
    pub paper_iterations: Option<usize>,
}

fn float(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

impl ReportRow {
    pub fn fields(&self) -> Vec<String> {
        let order = |k: usize| opt(self.orders.map(|o| o[k]));
        vec![
            self.experiment.clone(),
            self.num_subdomains.to_string(),
            float(self.h_ratio),
            self.overlap.to_string(),
            float(self.nu),
            float(self.kappa),
            self.steps.to_string(),
            self.max_iterations.to_string(),
            float(self.mean_iterations),
            opt(self.e_u),
            opt(self.e_z),
            opt(self.e_p),
            float(self.wall_seconds),
            self.n.to_string(),
            self.pattern.clone(),
            self.precond.clone(),
            self.converged.to_string(),
            order(0),
            order(1),
            order(2),
            self.paper_iterations
                .map(|v| v.to_string())
                .unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", CSV_HEADER.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.fields().join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(file)
    }
}
