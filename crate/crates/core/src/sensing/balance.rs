//! SVD-based balancing of rectangular sensing matrices, and the weighted
//! BPDN reconstruction that runs through the balanced system.

use crate::error::{Error, Result};
use crate::io;
use crate::numerics::{condition_number, svd, Matrix};
use crate::solvers::{solve_bpdn, BpdnProblem, SolveReport};

/// Decomposition `A = P * B * diag(q)` with P invertible, q nonzero, and
/// B balanced: orthonormal rows and equal column norms at convergence.
#[derive(Debug, Clone)]
pub struct BalancedDecomposition {
    p: Matrix,
    b: Matrix,
    q: Vec<f64>,
    iterations_run: usize,
    imbalance: f64,
    /// Column-norm imbalance before iterating and after each iteration.
    imbalance_history: Vec<f64>,
}

impl BalancedDecomposition {
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn imbalance(&self) -> f64 {
        self.imbalance
    }

    pub fn imbalance_history(&self) -> &[f64] {
        &self.imbalance_history
    }

    /// Recompose `P * B * diag(q)`.
    pub fn recompose(&self) -> Matrix {
        let mut bq = self.b.clone();
        for (j, &qj) in self.q.iter().enumerate() {
            for v in bq.col_mut(j) {
                *v *= qj;
            }
        }
        self.p.matmul(&bq)
    }

    pub fn write_to(&self, w: &mut impl std::io::Write, provenance_json: &str) -> Result<()> {
        io::write_magic(w, io::MAGIC_BALANCE)?;
        io::write_matrix(w, &self.p)?;
        io::write_matrix(w, &self.b)?;
        io::write_u32(w, self.q.len() as u32)?;
        io::write_f64_slice(w, &self.q)?;
        io::write_u32(w, self.iterations_run as u32)?;
        io::write_f64_slice(w, &[self.imbalance])?;
        io::write_u32(w, self.imbalance_history.len() as u32)?;
        io::write_f64_slice(w, &self.imbalance_history)?;
        io::write_blob(w, provenance_json)
    }

    pub fn read_from(r: &mut impl std::io::Read) -> Result<(Self, String)> {
        io::read_magic(r, io::MAGIC_BALANCE)?;
        let p = io::read_matrix(r)?;
        let b = io::read_matrix(r)?;
        let q_len = io::read_u32(r)? as usize;
        let q = io::read_f64_vec(r, q_len)?;
        let iterations_run = io::read_u32(r)? as usize;
        let imbalance = io::read_f64_vec(r, 1)?[0];
        let h_len = io::read_u32(r)? as usize;
        let imbalance_history = io::read_f64_vec(r, h_len)?;
        let blob = io::read_blob(r)?;
        Ok((
            BalancedDecomposition {
                p,
                b,
                q,
                iterations_run,
                imbalance,
                imbalance_history,
            },
            blob,
        ))
    }
}

/// Scale-free column-norm imbalance: the worst relative deviation of a
/// column norm from the mean column norm.
pub fn balanced_residual(b: &Matrix) -> f64 {
    let norms: Vec<f64> = (0..b.cols())
        .map(|j| b.col(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    imbalance_of_norms(&norms)
}

fn imbalance_of_norms(norms: &[f64]) -> f64 {
    let mean = norms.iter().sum::<f64>() / norms.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    norms
        .iter()
        .fold(0.0f64, |w, &n| w.max((n - mean).abs() / mean))
}

const EARLY_STOP_IMBALANCE: f64 = 1e-10;

/// Iterative SVD balancing of an m x n matrix (m <= n).
///
/// Each iteration decomposes the current core `B = U S Vᵀ`, absorbs
/// `U S` into P, rescales the columns of `Vᵀ` to the common norm
/// `sqrt(m/n)`, and pushes the inverse scaling into the diagonal q, so
/// `A = P B diag(q)` holds exactly throughout. The `sqrt(m/n)` target is
/// the norm the columns of an m x n matrix with orthonormal rows carry on
/// average, which makes the scaling the identity at the fixed point: B
/// converges to orthonormal rows and equal column norms while P and Q
/// stay on the scale of the input. The convergence monitor is the
/// column-norm imbalance of the unscaled `Vᵀ` factor (how much work the
/// scaling still has to do). Runs `t_max` iterations, stopping early once
/// that imbalance falls below 1e-10; the input's own imbalance is
/// recorded as iteration 0.
pub fn balance(a: &Matrix, t_max: usize) -> Result<BalancedDecomposition> {
    let m = a.rows();
    let n = a.cols();
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "balance needs a wide matrix, got {m}x{n}"
        )));
    }
    for j in 0..n {
        if a.col(j).iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroColumn(j));
        }
    }

    let target = (m as f64 / n as f64).sqrt();
    let mut p = Matrix::identity(m);
    let mut b = a.clone();
    let mut q = vec![1.0; n];
    let mut history = vec![balanced_residual(&b)];
    let mut iterations_run = 0;

    for _ in 0..t_max {
        if *history.last().unwrap() < EARLY_STOP_IMBALANCE {
            break;
        }
        let dec = svd(&b)?;
        if dec.sigma[m - 1] <= dec.sigma[0] * 1e-300 {
            return Err(Error::NearSingular(f64::INFINITY));
        }

        // P <- P * U * S.
        let mut pu = p.matmul(&dec.u);
        for (i, &s) in dec.sigma.iter().enumerate() {
            for v in pu.col_mut(i) {
                *v *= s;
            }
        }
        p = pu;

        // Column j of Vᵀ is row j of V; scale it to the target norm and
        // push the inverse scale into q.
        let mut b_next = Matrix::zeros(m, n);
        let mut norms = vec![0.0; n];
        for j in 0..n {
            let norm = (0..m).map(|i| dec.v[(j, i)] * dec.v[(j, i)]).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroColumn(j));
            }
            norms[j] = norm;
            let scale = target / norm;
            for i in 0..m {
                b_next[(i, j)] = dec.v[(j, i)] * scale;
            }
            q[j] /= scale;
        }
        b = b_next;
        iterations_run += 1;
        history.push(imbalance_of_norms(&norms));
    }

    let imbalance = *history.last().unwrap();
    Ok(BalancedDecomposition {
        p,
        b,
        q,
        iterations_run,
        imbalance,
        imbalance_history: history,
    })
}

/// Reconstruct through the balanced system: solve the BPDN problem on
/// `(B, P^{-1} y)` and undo the diagonal weighting.
///
/// The returned report carries the rescaled solution `s = s~ / q`, whose
/// support equals that of the internal solution exactly; `residual_norm`
/// refers to the solved system `(B, y~)`. Fails when P is near-singular
/// (condition number above 1e12). The epsilon is used as given, without
/// rescaling for the `P^{-1}` transform.
pub fn balanced_bpdn(
    dec: &BalancedDecomposition,
    y: &[f64],
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let m = dec.p.rows();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "y has length {}, P is {m}x{m}",
            y.len()
        )));
    }
    let cond = condition_number(&dec.p)?;
    if !(cond <= 1e12) {
        return Err(Error::NearSingular(cond));
    }

    let y_tilde = lu_solve(&dec.p, y)?;
    let problem = BpdnProblem::new(&dec.b, &y_tilde, epsilon)?;
    let mut report = solve_bpdn(&problem, tol, max_iter, None)?;
    for (s, &qj) in report.solution.iter_mut().zip(&dec.q) {
        *s /= qj;
    }
    Ok(report)
}

/// Solve `P x = y` by Gaussian elimination with partial pivoting.
fn lu_solve(p: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let n = p.rows();
    debug_assert_eq!(p.cols(), n);
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| p[(i, j)]).collect();
            row.push(y[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())
            .unwrap();
        if aug[piv][col] == 0.0 {
            return Err(Error::NearSingular(f64::INFINITY));
        }
        aug.swap(col, piv);
        let pivot = aug[col][col];
        for j in col..=n {
            aug[col][j] /= pivot;
        }
        for i in 0..n {
            if i != col && aug[i][col] != 0.0 {
                let f = aug[i][col];
                for j in col..=n {
                    aug[i][j] -= f * aug[col][j];
                }
            }
        }
    }
    Ok((0..n).map(|i| aug[i][n]).collect())
}
