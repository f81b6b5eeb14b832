//! Spectral projected gradient for l1-constrained least squares.

use super::projection::{project_l1, project_l1_into};
use super::{fresh_residual_norm, inf_norm, SolveReport};
use crate::numerics::Matrix;

const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e12;
const SUFFICIENT_DECREASE: f64 = 1e-4;
const LINESEARCH_MEMORY: usize = 10;
const MAX_BACKTRACKS: usize = 50;

/// `min_s 0.5 * ||y - A s||^2  s.t.  ||s||_1 <= tau`.
///
/// Projected gradient with a safeguarded Barzilai-Borwein step length and
/// a nonmonotone (Grippo-Lampariello-Lucidi) line search. Exits when the
/// unit-step projected gradient drops to `tol` in the max norm, or after
/// `max_iter` iterations with `converged = false`. The returned solution
/// is feasible to within `tau * (1 + 1e-10)`.
pub fn solve_lasso_constrained(
    a: &Matrix,
    y: &[f64],
    tau: f64,
    tol: f64,
    max_iter: usize,
    s0: Option<&[f64]>,
) -> SolveReport {
    assert_eq!(a.rows(), y.len(), "dimension mismatch");
    assert!(tau >= 0.0, "tau must be >= 0");
    let n = a.cols();
    let m = a.rows();

    if tau == 0.0 {
        let residual_norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        return SolveReport {
            solution: vec![0.0; n],
            residual_norm,
            iterations: 0,
            converged: true,
            objective: 0.5 * residual_norm * residual_norm,
        };
    }

    let mut s = match s0 {
        Some(v) => project_l1(v, tau),
        None => vec![0.0; n],
    };

    // Reused buffers for the hot loop.
    let mut scratch: Vec<f64> = Vec::with_capacity(n);
    let mut trial = vec![0.0; n];
    let mut projected = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut ad = vec![0.0; m];
    let mut grad_new = vec![0.0; n];

    let mut as_vec = a.matvec(&s);
    let mut r: Vec<f64> = y.iter().zip(&as_vec).map(|(yi, ai)| yi - ai).collect();
    let mut f = 0.5 * r.iter().map(|x| x * x).sum::<f64>();
    // grad of 0.5||y - As||^2 is -A'r.
    let mut grad = vec![0.0; n];
    a.tr_matvec_into(&r, &mut grad);
    for g in grad.iter_mut() {
        *g = -*g;
    }

    let mut f_history = std::collections::VecDeque::with_capacity(LINESEARCH_MEMORY);
    f_history.push_back(f);

    // Unit-step projected gradient in the max norm.
    macro_rules! pg_norm {
        () => {{
            for ((t, si), gi) in trial.iter_mut().zip(&s).zip(&grad) {
                *t = si - gi;
            }
            project_l1_into(&trial, tau, &mut projected, &mut scratch);
            projected
                .iter()
                .zip(&s)
                .fold(0.0f64, |mx, (p, si)| mx.max((p - si).abs()))
        }};
    }

    let mut converged = pg_norm!() <= tol;
    let mut alpha = {
        let g_inf = inf_norm(&grad);
        if g_inf > 0.0 {
            (1.0 / g_inf).clamp(STEP_MIN, STEP_MAX)
        } else {
            1.0
        }
    };

    let mut iterations = 0;
    while !converged && iterations < max_iter {
        iterations += 1;

        // Search direction from the scaled projected step.
        for ((t, si), gi) in trial.iter_mut().zip(&s).zip(&grad) {
            *t = si - alpha * gi;
        }
        project_l1_into(&trial, tau, &mut projected, &mut scratch);
        for ((di, p), si) in d.iter_mut().zip(&projected).zip(&s) {
            *di = p - si;
        }
        let d_inf = inf_norm(&d);
        if d_inf == 0.0 {
            converged = true;
            break;
        }

        a.matvec_into(&d, &mut ad);
        let gd: f64 = grad.iter().zip(&d).map(|(g, di)| g * di).sum();
        let f_max = f_history.iter().cloned().fold(f64::MIN, f64::max);

        // Nonmonotone backtracking.
        let mut theta = 1.0;
        let mut f_new = f;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let fv = 0.5
                * r.iter()
                    .zip(&ad)
                    .map(|(ri, adi)| {
                        let v = ri - theta * adi;
                        v * v
                    })
                    .sum::<f64>();
            if fv <= f_max + SUFFICIENT_DECREASE * theta * gd {
                f_new = fv;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if !accepted {
            // Step has collapsed below rounding; no further progress.
            break;
        }

        for (si, di) in s.iter_mut().zip(&d) {
            *si += theta * di;
        }
        for (avi, adi) in as_vec.iter_mut().zip(&ad) {
            *avi += theta * adi;
        }
        for (ri, (yi, avi)) in r.iter_mut().zip(y.iter().zip(&as_vec)) {
            *ri = yi - avi;
        }
        a.tr_matvec_into(&r, &mut grad_new);
        for g in grad_new.iter_mut() {
            *g = -*g;
        }

        // Barzilai-Borwein spectral step for the next iteration.
        let mut sty = 0.0;
        let mut sts = 0.0;
        for (di, (gn, go)) in d.iter().zip(grad_new.iter().zip(&grad)) {
            let ds = theta * di;
            sty += ds * (gn - go);
            sts += ds * ds;
        }
        alpha = if sty > 0.0 {
            (sts / sty).clamp(STEP_MIN, STEP_MAX)
        } else {
            STEP_MAX
        };

        std::mem::swap(&mut grad, &mut grad_new);
        f = f_new;
        if f_history.len() == LINESEARCH_MEMORY {
            f_history.pop_front();
        }
        f_history.push_back(f);

        converged = pg_norm!() <= tol;
    }

    let residual_norm = fresh_residual_norm(a, y, &s);
    SolveReport {
        solution: s,
        residual_norm,
        iterations,
        converged,
        objective: 0.5 * residual_norm * residual_norm,
    }
}
