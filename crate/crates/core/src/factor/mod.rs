//! Randomized and deterministic low-rank factorizations.
//!
//! All randomized routines draw a seeded Gaussian test matrix, optionally
//! sharpen the sampled subspace with `q` rounds of power iteration, and count
//! every application of `A` or `Aᵀ` to a dense block in the returned
//! [`SketchRecord`].

mod approx;
mod baselines;
mod deterministic;
mod pbp_qlp;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::qr::{orth, RankWarning};

pub use approx::{approximate, factor_full, parse_algorithms, Algorithm, LowRankApprox};
pub use baselines::{cor_utv, cor_utv_with, r_svd, r_svd_with, RSvdFactors, UtvFactors};
pub use deterministic::{cpqr_approx, pivoted_qlp, truncated_svd};
pub use pbp_qlp::{pbp_qlp, pbp_qlp_with};

/// How the power-iteration loop treats intermediate samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerScheme {
    /// Orthonormalize the sample between every application of `A` and `Aᵀ`.
    #[default]
    Orthonormalized,
    /// Apply `A` and `Aᵀ` back to back and orthonormalize only once at the
    /// end. Loses singular components below `σ₁ ε^{1/(2q+1)}`; kept to
    /// reproduce that round-off floor.
    Plain,
}

/// Sampling parameters shared by the randomized algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchParams {
    /// Number of sketch columns.
    pub d: usize,
    /// Power-iteration exponent.
    pub q: usize,
    pub seed: u64,
    pub scheme: PowerScheme,
}

impl SketchParams {
    pub fn new(d: usize, q: usize, seed: u64) -> Self {
        SketchParams {
            d,
            q,
            seed,
            scheme: PowerScheme::Orthonormalized,
        }
    }

    pub fn with_scheme(mut self, scheme: PowerScheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// What a randomized run drew and how much it touched `A`.
#[derive(Debug, Clone)]
pub struct SketchRecord {
    /// The Gaussian test matrix (`n₁ x d` for PbP-QLP, `n₂ x d` for the
    /// baselines).
    pub phi: DenseMatrix,
    pub seed: u64,
    pub d: usize,
    pub q: usize,
    pub scheme: PowerScheme,
    /// Applications of `A` or `Aᵀ` to a dense block.
    pub passes_over_a: usize,
    /// Rank-collapse warnings raised by `orth` during the run.
    pub warnings: Vec<RankWarning>,
}

/// `A ≈ Q L Pᵀ` with `L` lower triangular.
#[derive(Debug, Clone)]
pub struct QlpFactors {
    /// `n₁ x d`, orthonormal columns.
    pub q_basis: DenseMatrix,
    /// `d x d`, lower triangular.
    pub l: DenseMatrix,
    /// `n₂ x d`, orthonormal columns.
    pub p_basis: DenseMatrix,
    /// `d x d` upper triangular factor of the first QR stage.
    pub first_stage_r: DenseMatrix,
    /// Absent for the deterministic pivoted QLP.
    pub sketch: Option<SketchRecord>,
}

/// Leading/trailing blocks of a triangular factor split at `k`.
#[derive(Debug, Clone)]
pub struct TriangularBlocks {
    pub b11: DenseMatrix,
    /// `k x (d-k)` for upper triangular, `(d-k) x k` for lower triangular.
    pub off: DenseMatrix,
    pub b22: DenseMatrix,
}

impl QlpFactors {
    pub fn d(&self) -> usize {
        self.l.rows()
    }

    /// `Q L Pᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.q_basis.matmul(&self.l).matmul_t(&self.p_basis)
    }

    /// Diagonal of `L` (nonnegative by the QR sign convention).
    pub fn l_values(&self) -> Vec<f64> {
        self.l.diag().into_iter().map(f64::abs).collect()
    }

    /// Magnitudes of the diagonal of the first-stage `R`.
    pub fn r_values(&self) -> Vec<f64> {
        self.first_stage_r.diag().into_iter().map(f64::abs).collect()
    }

    /// `R = [R₁₁ R₁₂; 0 R₂₂]` with `R₁₁` of order `k`.
    pub fn r_blocks(&self, k: usize) -> Result<TriangularBlocks> {
        split_blocks(&self.first_stage_r, k, true)
    }

    /// `L = [L₁₁ 0; L₂₁ L₂₂]` with `L₁₁` of order `k`.
    pub fn l_blocks(&self, k: usize) -> Result<TriangularBlocks> {
        split_blocks(&self.l, k, false)
    }
}

fn split_blocks(m: &DenseMatrix, k: usize, upper: bool) -> Result<TriangularBlocks> {
    let d = m.rows();
    if k == 0 || k > d {
        return Err(Error::Parameter(alloc::format!(
            "block split needs 1 <= k <= {d}, got k = {k}"
        )));
    }
    let off = if upper {
        m.submatrix(0..k, k..d)
    } else {
        m.submatrix(k..d, 0..k)
    };
    Ok(TriangularBlocks {
        b11: m.submatrix(0..k, 0..k),
        off,
        b22: m.submatrix(k..d, k..d),
    })
}

/// Wraps `A` and counts block applications of `A` and `Aᵀ`.
pub(crate) struct CountingOperator<'a> {
    a: &'a DenseMatrix,
    passes: usize,
}

impl<'a> CountingOperator<'a> {
    pub(crate) fn new(a: &'a DenseMatrix) -> Self {
        CountingOperator { a, passes: 0 }
    }

    /// `A x`.
    pub(crate) fn apply(&mut self, x: &DenseMatrix) -> DenseMatrix {
        self.passes += 1;
        self.a.matmul(x)
    }

    /// `Aᵀ x`.
    pub(crate) fn apply_t(&mut self, x: &DenseMatrix) -> DenseMatrix {
        self.passes += 1;
        self.a.t_matmul(x)
    }

    pub(crate) fn passes(&self) -> usize {
        self.passes
    }
}

/// `orth` that records rank-collapse warnings.
pub(crate) fn orth_logged(m: &DenseMatrix, warnings: &mut Vec<RankWarning>) -> Result<DenseMatrix> {
    let b = orth(m)?;
    if let Some(w) = b.warning {
        warnings.push(w);
    }
    Ok(b.q)
}

pub(crate) fn check_sketch_size(a: &DenseMatrix, d: usize) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Dimension("empty input matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let limit = a.rows().min(a.cols());
    if d == 0 || d > limit {
        return Err(Error::Parameter(alloc::format!(
            "sampling size d must satisfy 1 <= d <= min(n1, n2) = {limit}, got {d}"
        )));
    }
    Ok(())
}
