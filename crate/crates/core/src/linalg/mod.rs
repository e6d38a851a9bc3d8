//! Dense numerical kernels: symmetric eigensolver, spectral norms, a small
//! simplex solver and Laplacian pseudo-inverse solves.

mod eigen;
mod lp;
mod matrix;

pub use eigen::{eigh, extreme_eigenpair, herm_eigenpairs, op_norm, trace_norm, Eigen, Spectral};
pub use lp::{solve_lp, IncrementalLp, LinearProgram, LpOutcome, FEASIBILITY_TOL, RANK_TOL};
pub use matrix::{HermMatrix, SymMatrix};

pub(crate) use matrix::CMatrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("solver failed to converge after {sweeps} iterations")]
    NoConvergence { sweeps: usize },
    #[error("numerically singular basis")]
    SingularBasis,
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("right-hand side must sum to zero (sum = {sum:e})")]
    NotZeroSum { sum: f64 },
    #[error("graph is disconnected: Laplacian kernel has dimension {kernel_dim}")]
    Disconnected { kernel_dim: usize },
}

const PSEUDO_INVERSE_CUTOFF: f64 = 1e-10;

/// Solves `Δf = λ` for a connected-graph Laplacian `Δ` and zero-sum `λ`,
/// returning the unique zero-sum solution.
pub fn laplacian_solve(laplacian: &SymMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = laplacian.n();
    if rhs.len() != n {
        return Err(LinalgError::Shape(format!(
            "right-hand side has length {}, Laplacian is {n}x{n}",
            rhs.len()
        )));
    }
    let sum: f64 = rhs.iter().sum();
    let mass: f64 = rhs.iter().map(|x| x.abs()).sum();
    if sum.abs() > 1e-12 * mass.max(1.0) {
        return Err(LinalgError::NotZeroSum { sum });
    }
    if let Some(mut f) = grounded_solve(laplacian, rhs) {
        let mean = f.iter().sum::<f64>() / n as f64;
        f.iter_mut().for_each(|x| *x -= mean);
        return Ok(f);
    }
    let e = eigh(laplacian)?;
    let top = e.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let cutoff = PSEUDO_INVERSE_CUTOFF * top;
    let kernel_dim = e.values.iter().filter(|v| v.abs() <= cutoff).count();
    Err(LinalgError::Disconnected {
        kernel_dim: kernel_dim.max(2),
    })
}

/// Pins the last vertex to zero and solves the reduced system by Cholesky.
/// Returns `None` when a pivot collapses, which signals a disconnected graph.
fn grounded_solve(laplacian: &SymMatrix, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = laplacian.n();
    if n == 1 {
        return Some(vec![0.0]);
    }
    let m = n - 1;
    let scale = (0..n).fold(0.0_f64, |s, i| s.max(laplacian.get(i, i)));
    if scale <= 0.0 || scale.is_nan() {
        return None;
    }
    let mut l = vec![0.0; m * m];
    for j in 0..m {
        let mut d = laplacian.get(j, j);
        for k in 0..j {
            d -= l[j * m + k] * l[j * m + k];
        }
        if d <= PSEUDO_INVERSE_CUTOFF * scale {
            return None;
        }
        let d = d.sqrt();
        l[j * m + j] = d;
        for i in (j + 1)..m {
            let mut v = laplacian.get(i, j);
            for k in 0..j {
                v -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = v / d;
        }
    }
    let solve = |b: &[f64]| {
        let mut y = b[..m].to_vec();
        for i in 0..m {
            for k in 0..i {
                y[i] -= l[i * m + k] * y[k];
            }
            y[i] /= l[i * m + i];
        }
        for i in (0..m).rev() {
            for k in (i + 1)..m {
                y[i] -= l[k * m + i] * y[k];
            }
            y[i] /= l[i * m + i];
        }
        y.push(0.0);
        y
    };
    let mut f = solve(rhs);
    let r: Vec<f64> = laplacian.mul_vec(&f).iter().zip(rhs).map(|(a, b)| b - a).collect();
    for (fi, di) in f.iter_mut().zip(solve(&r)) {
        *fi += di;
    }
    Some(f)
}
