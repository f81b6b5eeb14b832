//! Cyclic coordinate-descent Lasso.

use super::{fresh_residual_norm, l1_norm, LassoProblem, SolveReport};
use crate::numerics::Matrix;

/// Solve the penalized Lasso by cyclic coordinate descent.
///
/// Each coordinate update is the exact scalar soft-threshold minimizer, so
/// the objective never increases across sweeps. Convergence is declared
/// when the KKT residual (see [`lasso_kkt_residual`]) drops to `tol`;
/// failure to converge within `max_iter` sweeps is reported through
/// `converged = false`, never as an error, so callers can decide.
pub fn lasso_cd(
    problem: &LassoProblem,
    s0: Option<&[f64]>,
    max_iter: usize,
    tol: f64,
) -> SolveReport {
    let a = problem.a;
    let y = problem.y;
    let lambda = problem.lambda;
    assert!(tol > 0.0, "tol must be > 0");

    let n = a.cols();
    let mut s = match s0 {
        Some(v) => {
            assert_eq!(v.len(), n, "warm start length mismatch");
            v.to_vec()
        }
        None => vec![0.0; n],
    };

    let col_sq: Vec<f64> = (0..n)
        .map(|j| a.col(j).iter().map(|x| x * x).sum())
        .collect();

    // Maintained residual r = y - A s.
    let as_vec = a.matvec(&s);
    let mut r: Vec<f64> = y.iter().zip(&as_vec).map(|(yi, ai)| yi - ai).collect();

    let objective = |r: &[f64], s: &[f64]| -> f64 {
        0.5 * r.iter().map(|x| x * x).sum::<f64>() + lambda * l1_norm(s)
    };

    let mut prev_obj = objective(&r, &s);
    let mut iterations = 0;
    let mut converged = false;

    for sweep in 0..max_iter {
        iterations = sweep + 1;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                // A zero atom can only be penalized; its optimum is 0.
                s[j] = 0.0;
                continue;
            }
            let col = a.col(j);
            let g: f64 = col.iter().zip(&r).map(|(c, ri)| c * ri).sum();
            let rho = g + col_sq[j] * s[j];
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let delta = new - s[j];
            if delta != 0.0 {
                for (ri, &c) in r.iter_mut().zip(col) {
                    *ri -= delta * c;
                }
                s[j] = new;
            }
        }

        let obj = objective(&r, &s);
        debug_assert!(
            obj <= prev_obj + 1e-12 * (1.0 + prev_obj.abs()),
            "objective rose from {prev_obj} to {obj} in sweep {sweep}"
        );
        prev_obj = obj;

        if kkt_residual_with(a, &r, &s, lambda) <= tol {
            converged = true;
            break;
        }
    }

    let residual_norm = fresh_residual_norm(a, y, &s);
    let objective = 0.5 * residual_norm * residual_norm + lambda * l1_norm(&s);
    SolveReport {
        solution: s,
        residual_norm,
        iterations,
        converged,
        objective,
    }
}

/// Largest violation of the Lasso KKT conditions at `s`.
///
/// With `g_j = a_jᵀ(y - A s)`: inactive coordinates require `|g_j| <= lambda`,
/// active ones `g_j = lambda * sign(s_j)`. The returned value is the max
/// over coordinates of the amount by which these fail.
pub fn lasso_kkt_residual(a: &Matrix, y: &[f64], lambda: f64, s: &[f64]) -> f64 {
    let as_vec = a.matvec(s);
    let r: Vec<f64> = y.iter().zip(&as_vec).map(|(yi, ai)| yi - ai).collect();
    kkt_residual_with(a, &r, s, lambda)
}

fn kkt_residual_with(a: &Matrix, r: &[f64], s: &[f64], lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.cols() {
        let g: f64 = a.col(j).iter().zip(r).map(|(c, ri)| c * ri).sum();
        let v = if s[j] == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g - lambda * s[j].signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
