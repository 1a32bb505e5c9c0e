//! Randomized rank-revealing factorizations built on unpivoted QR.
//!
//! The centerpiece is [`factor::pbp_qlp`], a projection-based partial QLP
//! decomposition `A ≈ Q L Pᵀ` computed from a Gaussian sketch, optional
//! orthonormalized power iteration and two unpivoted QR factorizations. The
//! crate also carries the baselines it is measured against (randomized SVD,
//! compressed randomized UTV, deterministic pivoted QLP, truncated SVD), the
//! dense kernels they share, deterministic test-matrix generators, and
//! evaluators that check the rank-revealing and approximation inequalities
//! satisfied by the factorization.
//!
//! The crate is `no_std` and needs only `alloc`. Enable the `std` feature for
//! `std::error::Error` and runtime SIMD dispatch in the matrix product.

#![no_std]
#![deny(unsafe_op_in_unsafe_fn)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod factor;
pub mod matgen;
pub mod matrix;
pub mod norm;
pub mod qr;
pub mod rng;
pub mod svd;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use factor::{approximate, pbp_qlp, pbp_qlp_with, truncated_svd, Algorithm, QlpFactors, SketchParams};
pub use norm::spectral_norm;
pub use qr::{column_pivoted_qr, householder_qr, orth, QrFactors};
pub use rng::gaussian_matrix;
pub use svd::{svd_full, SvdFactors};
