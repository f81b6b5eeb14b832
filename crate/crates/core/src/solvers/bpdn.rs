//! Basis-pursuit denoising by Pareto root finding.

use super::spg::solve_lasso_constrained;
use super::{fresh_residual_norm, inf_norm, l1_norm, BpdnProblem, SolveReport};
use crate::error::{Error, Result};

const MAX_ROOT_ITER: usize = 30;
/// Accepted relative band around epsilon for the exit residual.
const RESIDUAL_BAND: f64 = 1e-3;

/// Solve `min ||s||_1  s.t.  ||y - A s||_2 < epsilon`.
///
/// Newton iteration on the Pareto curve `phi(tau) = ||y - A s_tau||_2 -
/// epsilon`, where `s_tau` solves the l1-constrained least-squares
/// subproblem at radius `tau`. The Newton slope is `phi'(tau) =
/// -||A'r||_inf / ||r||_2`; iterates approach the root from below, with a
/// bisection safeguard against overshoot from inexact subsolves. At most
/// [`MAX_ROOT_ITER`] root iterations are taken; `max_iter` is the total
/// projected-gradient iteration budget across all subsolves, so it bounds
/// the cost of one call outright. Exhausting it returns the best solution
/// so far with `converged = false`.
///
/// Returns an error when `epsilon` lies below the distance from `y` to the
/// range of `A` (detected by a vanishing gradient with the residual still
/// above `epsilon`); the report's `objective` is `||s||_1`.
pub fn solve_bpdn(
    problem: &BpdnProblem,
    tol: f64,
    max_iter: usize,
    s0: Option<&[f64]>,
) -> Result<SolveReport> {
    let a = problem.a;
    let y = problem.y;
    let epsilon = problem.epsilon;

    let y_norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    // The zero vector is feasible (and l1-minimal) when epsilon covers y.
    if epsilon >= y_norm {
        return Ok(SolveReport {
            solution: vec![0.0; a.cols()],
            residual_norm: y_norm,
            iterations: 0,
            converged: true,
            objective: 0.0,
        });
    }

    // The absolute slack reflects what the subproblem solver can deliver
    // at projected-gradient tolerance `tol` (residual accuracy is a small
    // multiple of it); without it an epsilon of 0 could never be accepted.
    let floor_slack = 10.0 * tol * y_norm.max(1.0);
    let accept_hi = epsilon * (1.0 + RESIDUAL_BAND) + floor_slack;
    let accept_lo = epsilon * (1.0 - RESIDUAL_BAND) - floor_slack;

    let mut tau = 0.0;
    let mut s: Vec<f64> = vec![0.0; a.cols()];
    if let Some(v) = s0 {
        tau = l1_norm(v);
        s = v.to_vec();
    }
    let mut tau_lo = 0.0; // residual known to be above epsilon here
    let mut tau_hi = f64::INFINITY; // residual known to be below accept_lo here
    let mut sub_tol = tol;

    let mut iterations = 0;
    let mut last: Option<SolveReport> = None;

    for _ in 0..MAX_ROOT_ITER {
        let remaining = max_iter.saturating_sub(iterations);
        if remaining == 0 {
            break;
        }
        let sub = solve_lasso_constrained(a, y, tau, sub_tol, remaining, Some(&s));
        iterations += sub.iterations;
        s = sub.solution.clone();
        let rn = sub.residual_norm;

        if !sub.converged {
            // The residual over-estimates phi(tau) while the subproblem is
            // unsolved; stepping on it would walk tau past the root. Keep
            // refining at the same tau (warm-started).
            last = Some(sub);
            continue;
        }

        if rn <= accept_hi {
            if rn >= accept_lo {
                return Ok(finish(sub, iterations, true, a, y));
            }
            // Overshot: tau is beyond the Pareto root, so the l1 norm is
            // no longer minimal. Bisect back.
            tau_hi = tau;
            tau = 0.5 * (tau_lo + tau_hi);
            last = Some(sub);
            continue;
        }
        tau_lo = tau;

        let as_vec = a.matvec(&s);
        let r: Vec<f64> = y.iter().zip(&as_vec).map(|(yi, ai)| yi - ai).collect();
        let g_inf = inf_norm(&a.tr_matvec(&r));
        if g_inf <= 1e-12 * rn.max(1.0) {
            // Gradient vanished with the residual still above epsilon:
            // y has a component outside range(A) larger than epsilon.
            return Err(Error::InfeasibleEpsilon {
                epsilon,
                floor: rn,
            });
        }

        // Newton step on phi; never leaves the bracket.
        let mut tau_next = tau + (rn - epsilon) * rn / g_inf;
        if tau_next >= tau_hi {
            tau_next = 0.5 * (tau_lo + tau_hi);
        }
        if (tau_next - tau).abs() <= 1e-12 * tau.max(1.0) {
            // Stalled: the subproblem accuracy is the bottleneck, not tau.
            if sub_tol > 1e-13 {
                sub_tol *= 0.1;
                continue;
            }
            return Ok(finish(sub, iterations, false, a, y));
        }
        tau = tau_next;
        last = Some(sub);
    }

    let sub = last.unwrap_or(SolveReport {
        solution: s,
        residual_norm: fresh_residual_norm(a, y, &vec![0.0; a.cols()]),
        iterations: 0,
        converged: false,
        objective: 0.0,
    });
    Ok(finish(sub, iterations, false, a, y))
}

fn finish(
    sub: SolveReport,
    iterations: usize,
    converged: bool,
    a: &crate::numerics::Matrix,
    y: &[f64],
) -> SolveReport {
    let residual_norm = fresh_residual_norm(a, y, &sub.solution);
    let objective = l1_norm(&sub.solution);
    SolveReport {
        solution: sub.solution,
        residual_norm,
        iterations,
        converged: converged && sub.converged,
        objective,
    }
}
