//! Independent oracles and fixtures for the acceptance suite. The oracles
//! never call into the code paths they check.

use hscs_core::hsi::SpectraSet;
use hscs_core::numerics::Matrix;
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};

/// Unit-norm spectra drawn from a planted dictionary whose spectrum
/// decays geometrically down to `1/condition` (real spectral scenes have
/// strongly decaying covariance spectra). Codes are k-sparse Gaussian;
/// `noise` is added before the final renormalization.
#[allow(clippy::too_many_arguments)]
pub fn decaying_planted_scene(
    d: usize,
    n_atoms: usize,
    k: usize,
    p: usize,
    noise: f64,
    condition: f64,
    seed: u64,
) -> SpectraSet {
    let mut rng = hscs_core::rng::seeded_rng(seed);
    let normal = StandardNormal;

    let raw = Matrix::from_fn(d, n_atoms, |_, _| {
        let g: f64 = normal.sample(&mut rng);
        g
    });
    let dec = hscs_core::numerics::svd(&raw).unwrap();
    let mut us = dec.u.clone();
    for i in 0..d {
        let s = condition.powf(-(i as f64) / (d - 1) as f64);
        for v in us.col_mut(i) {
            *v *= s;
        }
    }
    let mut planted = us.matmul(&dec.v.transpose());
    for j in 0..n_atoms {
        let norm = planted.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
        for v in planted.col_mut(j) {
            *v /= norm;
        }
    }

    let mut cols = Vec::with_capacity(p);
    while cols.len() < p {
        let idx = sample(&mut rng, n_atoms, k).into_vec();
        let mut s = vec![0.0; n_atoms];
        for &j in &idx {
            let g: f64 = normal.sample(&mut rng);
            s[j] = g;
        }
        let clean = planted.matvec(&s);
        let cn = clean.iter().map(|v| v * v).sum::<f64>().sqrt();
        if cn < 1e-9 {
            continue;
        }
        let mut x: Vec<f64> = clean.iter().map(|v| v / cn).collect();
        for v in x.iter_mut() {
            let g: f64 = normal.sample(&mut rng);
            *v += noise * g;
        }
        let n2 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n2 < 1e-9 {
            continue;
        }
        cols.push(x.iter().map(|v| v / n2).collect::<Vec<f64>>());
    }
    let ids: Vec<(u32, u32)> = (0..p).map(|i| (i as u32, 0)).collect();
    SpectraSet::from_matrix_with_scene(
        Matrix::from_columns(&cols).unwrap(),
        ids,
        true,
        format!("decaying-planted-{seed}"),
    )
    .unwrap()
}

/// Singular values via the eigenvalues of the Gram matrix, computed by
/// Householder tridiagonalization plus implicit-shift QL, sorted
/// descending.
pub fn gram_singular_values(a: &Matrix) -> Vec<f64> {
    let g = if a.rows() >= a.cols() {
        a.transpose().matmul(a)
    } else {
        a.matmul(&a.transpose())
    };
    let mut eig = tridiagonal_eigenvalues(&g);
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig.iter().map(|&l| l.max(0.0).sqrt()).collect()
}

/// Eigenvalues of a symmetric matrix: reduce to tridiagonal form by
/// Householder reflections, then implicit-shift QL on the tridiagonal.
pub fn tridiagonal_eigenvalues(g: &Matrix) -> Vec<f64> {
    let n = g.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| g.row(i)).collect();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];

    // Householder reduction (values-only variant).
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i][k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let mut f = a[i][l];
                let gg = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * gg;
                h -= f * gg;
                a[i][l] = f - gg;
                f = 0.0;
                for j in 0..=l {
                    let mut gsum = 0.0;
                    for k in 0..=j {
                        gsum += a[j][k] * a[i][k];
                    }
                    for k in (j + 1)..=l {
                        gsum += a[k][j] * a[i][k];
                    }
                    e[j] = gsum / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let fj = a[i][j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        a[j][k] -= fj * e[k] + gj * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i][i];
    }

    // Implicit-shift QL on the tridiagonal (d, e).
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations <= 50, "QL iteration failed to converge");

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// Eigenvalues by two-sided cyclic Jacobi; slow but a fully separate
/// route used to cross-check the tridiagonal solver.
pub fn jacobi_eigenvalues(g: &Matrix) -> Vec<f64> {
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

/// Exhaustive best-subset least squares: try every support of size k,
/// return the minimizing support (sorted) and full-length coefficients.
pub fn best_subset_ls(a: &Matrix, y: &[f64], k: usize) -> (Vec<usize>, Vec<f64>) {
    let n = a.cols();
    let mut best_resid = f64::INFINITY;
    let mut best: (Vec<usize>, Vec<f64>) = (vec![], vec![0.0; n]);
    let mut subset = vec![0usize; k];
    enumerate_subsets(n, k, 0, 0, &mut subset, &mut |sel: &[usize]| {
        if let Some(coef) = ls_on_support(a, y, sel) {
            let mut s = vec![0.0; n];
            for (i, &j) in sel.iter().enumerate() {
                s[j] = coef[i];
            }
            let as_vec = a.matvec(&s);
            let resid = y
                .iter()
                .zip(&as_vec)
                .map(|(yi, ai)| (yi - ai) * (yi - ai))
                .sum::<f64>()
                .sqrt();
            if resid < best_resid {
                best_resid = resid;
                best = (sel.to_vec(), s);
            }
        }
    });
    best
}

fn enumerate_subsets(
    n: usize,
    k: usize,
    start: usize,
    depth: usize,
    subset: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        visit(subset);
        return;
    }
    for j in start..n {
        subset[depth] = j;
        enumerate_subsets(n, k, j + 1, depth + 1, subset, visit);
    }
}

/// Tropp's exact recovery condition for a support set S:
/// `max_{j not in S} ||pinv(A_S) a_j||_1 < 1`. When it holds, basis
/// pursuit recovers every signal supported on S from exact data.
pub fn exact_recovery_condition(a: &Matrix, support_set: &[usize]) -> bool {
    let k = support_set.len();
    let sub = a.select_columns(support_set);
    let gram = sub.transpose().matmul(&sub);
    // pinv(A_S) a_j solves the normal equations gram * w = A_Sᵀ a_j.
    for j in 0..a.cols() {
        if support_set.contains(&j) {
            continue;
        }
        let rhs = sub.tr_matvec(a.col(j));
        let Some(w) = solve_dense(&gram, &rhs) else {
            return false;
        };
        let l1: f64 = w.iter().map(|x| x.abs()).sum();
        if l1 >= 1.0 {
            return false;
        }
    }
    let _ = k;
    true
}

fn solve_dense(g: &Matrix, rhs: &[f64]) -> Option<Vec<f64>> {
    let k = g.rows();
    let mut aug = vec![vec![0.0f64; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            aug[i][j] = g[(i, j)];
        }
        aug[i][k] = rhs[i];
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())?;
        if aug[piv][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        for j in col..=k {
            aug[col][j] /= p;
        }
        for i in 0..k {
            if i != col && aug[i][col] != 0.0 {
                let f = aug[i][col];
                for j in col..=k {
                    aug[i][j] -= f * aug[col][j];
                }
            }
        }
    }
    Some((0..k).map(|i| aug[i][k]).collect())
}

fn ls_on_support(a: &Matrix, y: &[f64], sel: &[usize]) -> Option<Vec<f64>> {
    let k = sel.len();
    let sub = a.select_columns(sel);
    let gram = sub.transpose().matmul(&sub);
    let rhs = sub.tr_matvec(y);
    let mut aug = vec![vec![0.0f64; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            aug[i][j] = gram[(i, j)];
        }
        aug[i][k] = rhs[i];
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())?;
        if aug[piv][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        for j in col..=k {
            aug[col][j] /= p;
        }
        for i in 0..k {
            if i != col && aug[i][col] != 0.0 {
                let f = aug[i][col];
                for j in col..=k {
                    aug[i][j] -= f * aug[col][j];
                }
            }
        }
    }
    Some((0..k).map(|i| aug[i][k]).collect())
}
