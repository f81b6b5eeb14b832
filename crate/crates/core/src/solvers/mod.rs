//! The l1 machinery: coordinate-descent Lasso, l1-ball projection, a
//! spectral projected-gradient solver for the l1-constrained least-squares
//! subproblem, and Pareto root-finding basis-pursuit denoising on top.

mod bpdn;
mod lasso;
mod projection;
mod spg;

pub use bpdn::solve_bpdn;
pub use lasso::{lasso_cd, lasso_kkt_residual};
pub use projection::project_l1;
pub use spg::solve_lasso_constrained;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Penalized form: `min_s 0.5 * ||y - A s||^2 + lambda * ||s||_1`.
#[derive(Debug, Clone, Copy)]
pub struct LassoProblem<'a> {
    pub a: &'a Matrix,
    pub y: &'a [f64],
    pub lambda: f64,
}

impl<'a> LassoProblem<'a> {
    pub fn new(a: &'a Matrix, y: &'a [f64], lambda: f64) -> Result<Self> {
        if a.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but y has length {}",
                a.rows(),
                y.len()
            )));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        Ok(LassoProblem { a, y, lambda })
    }
}

/// Constrained form: `min_s ||s||_1  s.t.  ||y - A s||_2 < epsilon`.
#[derive(Debug, Clone, Copy)]
pub struct BpdnProblem<'a> {
    pub a: &'a Matrix,
    pub y: &'a [f64],
    pub epsilon: f64,
}

impl<'a> BpdnProblem<'a> {
    pub fn new(a: &'a Matrix, y: &'a [f64], epsilon: f64) -> Result<Self> {
        if a.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but y has length {}",
                a.rows(),
                y.len()
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        Ok(BpdnProblem { a, y, epsilon })
    }
}

/// Outcome of a solver run.
///
/// `residual_norm` is recomputed from scratch at exit, so it is trustworthy
/// independent of any residual bookkeeping inside the solver. `objective`
/// is the solved problem's own objective at the solution (penalized value
/// for the Lasso, `0.5 * ||r||^2` for the constrained form, `||s||_1` for
/// BPDN).
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

pub(crate) fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `||y - A s||_2` computed from scratch.
pub(crate) fn fresh_residual_norm(a: &Matrix, y: &[f64], s: &[f64]) -> f64 {
    let as_vec = a.matvec(s);
    y.iter()
        .zip(&as_vec)
        .map(|(yi, ai)| (yi - ai) * (yi - ai))
        .sum::<f64>()
        .sqrt()
}
