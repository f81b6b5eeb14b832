//! Dense matrix container and the linear-algebra kernels the rest of the
//! crate consumes: SVD, condition number, and the orthonormal DCT basis.

mod dct;
mod matrix;
mod svd;

pub use dct::dct_basis;
pub use matrix::Matrix;
pub use svd::{condition_number, svd, SvdResult};
