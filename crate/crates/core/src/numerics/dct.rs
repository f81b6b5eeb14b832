//! Orthonormal type-II DCT synthesis basis.

use super::matrix::Matrix;

/// The `d×d` orthonormal DCT-II synthesis matrix.
///
/// Column `k` holds the basis vector with entries
/// `c_k * cos(pi * (2i + 1) * k / (2d))`, `c_0 = sqrt(1/d)`,
/// `c_k = sqrt(2/d)` otherwise, so the matrix is orthonormal and its
/// singular values are all 1.
pub fn dct_basis(d: usize) -> Matrix {
    assert!(d >= 1, "dct_basis requires d >= 1");
    let fd = d as f64;
    let c0 = (1.0 / fd).sqrt();
    let ck = (2.0 / fd).sqrt();
    Matrix::from_fn(d, d, |i, k| {
        let scale = if k == 0 { c0 } else { ck };
        scale * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * fd)).cos()
    })
}
