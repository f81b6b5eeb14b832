//! Compressive sensing for hyperspectral spectra.
//!
//! The pipeline: learn a sparsifying dictionary from training pixels
//! ([`dictlearn`]), derive an adaptive measurement matrix from the
//! dictionary's leading left singular vectors ([`sensing`]), optionally
//! recondition the sensing matrix by an SVD-based balancing decomposition,
//! and reconstruct spectra by basis-pursuit denoising ([`solvers`]).
//! [`hsi`] handles cube ingestion and synthetic scenes; [`experiments`]
//! runs the comparison harness and emits CSV/JSON reports.

// Indexed loops are the clearest form for the dense kernels here, and the
// negated comparisons are NaN-rejecting validation guards.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dictlearn;
pub mod error;
pub mod experiments;
pub mod hsi;
pub mod io;
pub mod numerics;
pub mod rng;
pub mod sensing;
pub mod solvers;

pub use error::{Error, Result};
pub use numerics::Matrix;
