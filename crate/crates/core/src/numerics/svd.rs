//! Economy SVD by one-sided Jacobi rotations, and the condition number.

use super::matrix::{dot, norm2, Matrix};
use crate::error::{Error, Result};

/// Economy singular value decomposition `A = U · diag(sigma) · Vᵀ`.
///
/// For a `d×n` input, `u` is `d×r` and `v` is `n×r` with `r = min(d, n)`;
/// both have orthonormal columns and `sigma` is sorted descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// Recompose `U · diag(sigma) · Vᵀ`.
    pub fn recompose(&self) -> Matrix {
        let r = self.sigma.len();
        let mut us = self.u.clone();
        for j in 0..r {
            let s = self.sigma[j];
            for x in us.col_mut(j) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }
}

const MAX_SWEEPS: usize = 64;

/// Economy SVD of a dense matrix.
///
/// One-sided Jacobi: orthogonalize the columns of the tall orientation by
/// plane rotations; column norms become the singular values. The rotation
/// threshold is relative, so tiny singular values keep full relative
/// orthogonality. Signs are fixed so the largest-magnitude entry of every
/// left singular vector is positive, making the output reproducible.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    let (u, sigma, v) = if a.rows() >= a.cols() {
        jacobi_svd(a.clone())?
    } else {
        // A = (AᵀSVD)ᵀ: swap the roles of U and V.
        let (u_t, sigma, v_t) = jacobi_svd(a.transpose())?;
        (v_t, sigma, u_t)
    };
    let (mut u, mut v) = (u, v);
    fix_signs(&mut u, &mut v);
    Ok(SvdResult { u, sigma, v })
}

/// sigma_max / sigma_min of `a`.
///
/// Returns `f64::INFINITY` when the smallest singular value is below
/// `sigma_max * 1e-300` (effectively rank-deficient), and for an all-zero
/// matrix.
pub fn condition_number(a: &Matrix) -> Result<f64> {
    let dec = svd(a)?;
    let s_max = dec.sigma[0];
    let s_min = *dec.sigma.last().unwrap();
    if s_max == 0.0 || s_min < s_max * 1e-300 {
        return Ok(f64::INFINITY);
    }
    Ok(s_max / s_min)
}

/// One-sided Jacobi on a tall matrix (rows >= cols).
///
/// Returns (U, sigma, V) with sigma descending.
fn jacobi_svd(mut w: Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let rows = w.rows();
    let cols = w.cols();
    debug_assert!(rows >= cols);
    let mut v = Matrix::identity(cols);

    // Relative off-diagonal threshold. Quadratic convergence of Jacobi
    // takes this to rounding level in a handful of sweeps.
    let tol = 1e-15;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in (p + 1)..cols {
                let (alpha, beta, gamma) = {
                    let wp = w.col(p);
                    let wq = w.col(q);
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                if gamma.abs() <= tol * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotation zeroing the (p, q) entry of WᵀW.
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence(MAX_SWEEPS));
    }

    // Column norms are the singular values; sort descending (stable).
    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| norm2(w.col(j))).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let mut u = Matrix::zeros(rows, cols);
    let mut sigma = vec![0.0; cols];
    let mut zero_cols = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma[dst] = s;
        if s > 0.0 {
            let col = w.col(src);
            let inv = 1.0 / s;
            for (o, &x) in u.col_mut(dst).iter_mut().zip(col) {
                *o = x * inv;
            }
        } else {
            zero_cols.push(dst);
        }
    }
    if !zero_cols.is_empty() {
        complete_basis(&mut u, &zero_cols);
    }

    let mut v_sorted = Matrix::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
    }

    Ok((u, sigma, v_sorted))
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let rows = m.rows();
    let data = m.data_mut();
    let (left, right) = data.split_at_mut(q * rows);
    let col_p = &mut left[p * rows..(p + 1) * rows];
    let col_q = &mut right[..rows];
    for (xp, xq) in col_p.iter_mut().zip(col_q.iter_mut()) {
        let (a, b) = (*xp, *xq);
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Fill the listed (zero-singular-value) columns of `u` with unit vectors
/// orthogonal to all other columns, via Gram-Schmidt against the standard
/// basis. Deterministic.
fn complete_basis(u: &mut Matrix, targets: &[usize]) {
    let rows = u.rows();
    let cols = u.cols();
    let mut next_seed = 0usize;
    for &t in targets {
        let mut chosen = None;
        while next_seed < rows {
            let mut cand = vec![0.0; rows];
            cand[next_seed] = 1.0;
            next_seed += 1;
            // Two passes for numerical orthogonality; still-empty target
            // columns are zero and project to nothing.
            for _ in 0..2 {
                for j in 0..cols {
                    if j == t {
                        continue;
                    }
                    let proj = dot(&cand, u.col(j));
                    for (c, &b) in cand.iter_mut().zip(u.col(j)) {
                        *c -= proj * b;
                    }
                }
            }
            let n = norm2(&cand);
            if n > 0.5 {
                for c in &mut cand {
                    *c /= n;
                }
                chosen = Some(cand);
                break;
            }
        }
        let cand = chosen.expect("standard basis exhausted while completing U");
        u.col_mut(t).copy_from_slice(&cand);
    }
}

/// Flip signs so each column of `u` has its largest-magnitude entry
/// positive, flipping the paired column of `v` to keep the product fixed.
fn fix_signs(u: &mut Matrix, v: &mut Matrix) {
    for j in 0..u.cols() {
        let col = u.col(j);
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            for x in u.col_mut(j) {
                *x = -*x;
            }
            for x in v.col_mut(j) {
                *x = -*x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = crate::rng::seeded_rng(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Independent oracle: singular values as square roots of the
    /// eigenvalues of the Gram matrix, via cyclic Jacobi eigen iteration.
    /// Never touches the one-sided Jacobi path under test.
    fn gram_singular_values(a: &Matrix) -> Vec<f64> {
        let g = if a.rows() >= a.cols() {
            a.transpose().matmul(a)
        } else {
            a.matmul(&a.transpose())
        };
        let mut eig = jacobi_eigenvalues(&g);
        eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
        eig.iter().map(|&l| l.max(0.0).sqrt()).collect()
    }

    /// Eigenvalues of a symmetric matrix by two-sided Jacobi rotations.
    fn jacobi_eigenvalues(g: &Matrix) -> Vec<f64> {
        let n = g.rows();
        let mut m = g.clone();
        for _ in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(m[(p, q)].abs());
                }
            }
            if off <= 1e-14 * m.max_abs().max(1e-300) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        (0..n).map(|i| m[(i, i)]).collect()
    }

    fn ortho_defect(m: &Matrix) -> f64 {
        m.transpose().matmul(m).max_dist_from_identity()
    }

    #[test]
    fn identity_3x3() {
        let dec = svd(&Matrix::identity(3)).unwrap();
        for &s in &dec.sigma {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let uvt = dec.u.matmul(&dec.v.transpose());
        assert!(uvt.max_dist_from_identity() < 1e-12);
    }

    #[test]
    fn diagonal_2x2() {
        let a = Matrix::from_diag(&[3.0, 2.0]);
        let dec = svd(&a).unwrap();
        assert!((dec.sigma[0] - 3.0).abs() < 1e-12);
        assert!((dec.sigma[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_10x25_reconstructs_and_matches_gram_oracle() {
        let a = random_matrix(10, 25, 42);
        let dec = svd(&a).unwrap();
        let resid = dec.recompose().sub(&a).frob_norm() / a.frob_norm().max(1.0);
        assert!(resid <= 1e-10, "reconstruction residual {resid}");
        assert!(ortho_defect(&dec.u) <= 1e-10);
        assert!(ortho_defect(&dec.v) <= 1e-10);

        let oracle = gram_singular_values(&a);
        assert_eq!(oracle.len(), dec.sigma.len());
        let s_max = dec.sigma[0];
        for (got, want) in dec.sigma.iter().zip(&oracle) {
            assert!(
                (got - want).abs() <= 1e-8 * s_max,
                "sigma {got} vs oracle {want}"
            );
        }
    }

    #[test]
    fn wide_and_tall_agree() {
        let a = random_matrix(12, 5, 3);
        let at = a.transpose();
        let d1 = svd(&a).unwrap();
        let d2 = svd(&at).unwrap();
        for (x, y) in d1.sigma.iter().zip(&d2.sigma) {
            assert!((x - y).abs() < 1e-12);
        }
        let resid = d2.recompose().sub(&at).frob_norm() / at.frob_norm();
        assert!(resid < 1e-12);
    }

    #[test]
    fn rank_deficient_still_orthonormal() {
        // Two identical columns plus a zero column: rank 1 out of 3.
        let c = vec![1.0, 2.0, 2.0, 0.0];
        let a = Matrix::from_columns(&[c.clone(), c, vec![0.0; 4]]).unwrap();
        let dec = svd(&a).unwrap();
        assert!(ortho_defect(&dec.u) <= 1e-10);
        let resid = dec.recompose().sub(&a).frob_norm() / a.frob_norm();
        assert!(resid <= 1e-10);
        assert!(dec.sigma[1] < 1e-12 && dec.sigma[2] < 1e-12);
    }

    #[test]
    fn sign_convention_deterministic() {
        let a = random_matrix(8, 6, 11);
        let d1 = svd(&a).unwrap();
        let d2 = svd(&a).unwrap();
        assert_eq!(d1.u.data(), d2.u.data());
        assert_eq!(d1.v.data(), d2.v.data());
        for j in 0..d1.u.cols() {
            let col = d1.u.col(j);
            let peak = col.iter().cloned().fold(0.0f64, |m, x| {
                if x.abs() > m.abs() {
                    x
                } else {
                    m
                }
            });
            assert!(peak > 0.0, "column {j} peak {peak} not positive");
        }
    }

    #[test]
    fn condition_number_cases() {
        assert!((condition_number(&Matrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let d = Matrix::from_diag(&[10.0, 1.0]);
        assert!((condition_number(&d).unwrap() - 10.0).abs() < 1e-12);

        let a = random_matrix(5, 8, 9);
        let oracle = gram_singular_values(&a);
        let want = oracle[0] / oracle[oracle.len() - 1];
        let got = condition_number(&a).unwrap();
        assert!((got - want).abs() / want <= 1e-8);
    }

    #[test]
    fn condition_number_scale_invariant() {
        let a = random_matrix(6, 6, 17);
        let base = condition_number(&a).unwrap();
        for &c in &[2.0, -3.5, 1e-6, 1e8] {
            let mut b = a.clone();
            b.scale(c);
            let got = condition_number(&b).unwrap();
            assert!(
                (got - base).abs() / base <= 1e-12,
                "scale {c}: {got} vs {base}"
            );
        }
    }

    #[test]
    fn singular_matrix_condition_is_infinite() {
        let a = Matrix::from_columns(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(condition_number(&a).unwrap().is_infinite());
    }
}
