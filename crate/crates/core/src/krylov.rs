//! Right-preconditioned restarted GMRES.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    /// Relative residual tolerance `‖b − A x‖ / ‖b‖`.
    pub rtol: f64,
    pub max_iters: usize,
    /// Krylov dimension between restarts.
    pub restart: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            max_iters: 1000,
            restart: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Total Arnoldi steps.
    pub iterations: usize,
    pub converged: bool,
    /// Relative residuals: the true residual at the start of each restart
    /// cycle followed by the estimate after every Arnoldi step of that cycle.
    pub history: Vec<f64>,
    /// Index into `history` where each restart cycle begins.
    pub restarts: Vec<usize>,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate.
    pub final_residual: f64,
}

/// Loss of orthogonality that triggers a second Gram-Schmidt pass.
const REORTH_THRESHOLD: f64 = 1e-8;

/// Solves `A x = b` with right preconditioning `A M⁻¹ y = b`, `x = M⁻¹ y`.
///
/// Convergence is declared on the true residual. The preconditioned
/// residual equals the true residual for right preconditioning, so the
/// Givens estimate drives the inner loop and the true residual is
/// recomputed at every restart.
pub fn gmres<A, M>(
    a: &A,
    m: &M,
    b: &[f64],
    x0: &[f64],
    config: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    let n = a.dim();
    if b.len() != n || x0.len() != n || m.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "gmres: operator {n}, preconditioner {}, rhs {}, guess {}",
            m.dim(),
            b.len(),
            x0.len()
        )));
    }
    if !(config.rtol > 0.0) || config.restart == 0 {
        return Err(Error::InvalidArgument(
            "gmres needs rtol > 0 and restart >= 1".into(),
        ));
    }

    let mut x = x0.to_vec();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                converged: true,
                history: vec![0.0],
                restarts: Vec::new(),
                final_residual: 0.0,
            },
        ));
    }

    let mut r = vec![0.0; n];
    let residual = |x: &[f64], r: &mut [f64]| {
        a.apply(x, r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        norm2(r)
    };

    let mut rel = residual(&x, &mut r) / b_norm;
    let mut history = vec![rel];
    let mut restarts = Vec::new();
    let mut iterations = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];

    while rel > config.rtol && iterations < config.max_iters {
        let m_dim = config.restart.min(config.max_iters - iterations);
        let beta = rel * b_norm;
        if iterations > 0 {
            history.push(rel);
        }
        restarts.push(history.len() - 1);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_dim + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, rotated in place
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m_dim);
        let mut cs: Vec<(f64, f64)> = Vec::with_capacity(m_dim);
        let mut g = vec![0.0; m_dim + 1];
        g[0] = beta;
        let mut steps = 0;
        let mut breakdown = false;

        for j in 0..m_dim {
            m.apply(&basis[j], &mut z);
            a.apply(&z, &mut w);
            let w_norm = norm2(&w);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
            }
            let mut h_next = norm2(&w);
            let loss = if h_next > 0.0 {
                basis.iter().map(|v| dot(&w, v).abs()).fold(0.0, f64::max) / h_next
            } else {
                0.0
            };
            if loss > REORTH_THRESHOLD {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    col[i] += c;
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= c * vk);
                }
                h_next = norm2(&w);
            }
            col[j + 1] = h_next;

            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a0, a1) = (col[i], col[i + 1]);
                col[i] = c * a0 + s * a1;
                col[i + 1] = -s * a0 + c * a1;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push((c, s));
            g[j + 1] = -s * g[j];
            g[j] *= c;
            h.push(col);
            steps += 1;
            iterations += 1;

            let estimate = g[j + 1].abs() / b_norm;
            history.push(estimate);
            if h_next <= 1e-14 * w_norm {
                breakdown = true;
                break;
            }
            if estimate <= config.rtol {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // back substitution on the rotated triangle
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[k][i] * y[k];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (k, yk) in y.iter().enumerate() {
            update
                .iter_mut()
                .zip(&basis[k])
                .for_each(|(u, v)| *u += yk * v);
        }
        m.apply(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);

        rel = residual(&x, &mut r) / b_norm;
        if breakdown && rel > config.rtol {
            return Err(Error::Breakdown {
                step: iterations,
                residual: rel,
            });
        }
    }

    Ok((
        x,
        SolveReport {
            iterations,
            converged: rel <= config.rtol,
            history,
            restarts,
            final_residual: rel,
        },
    ))
}
