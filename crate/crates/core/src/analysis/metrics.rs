use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::factor::{approximate, factor_full, Algorithm, QlpFactors, SketchParams};
use crate::matrix::DenseMatrix;
use crate::norm::spectral_norm;
use crate::svd::singular_values;

/// Largest tolerated `‖BᵀB - I‖₂` for inputs claimed orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

pub(crate) fn sigma_min(m: &DenseMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(*singular_values(m)?.last().expect("nonempty"))
}

fn check_orthonormal(b: &DenseMatrix, which: &str) -> Result<()> {
    let g = b.t_matmul(b).sub(&DenseMatrix::identity(b.cols()));
    let defect = spectral_norm(&g)?;
    if defect > ORTHONORMAL_TOL {
        return Err(Error::Input(alloc::format!(
            "{which} is not orthonormal (‖BᵀB - I‖₂ = {defect:e})"
        )));
    }
    Ok(())
}

/// `‖B₁B₁ᵀ - B₂B₂ᵀ‖₂`, the sine of the largest canonical angle between the
/// column spaces. Evaluated as `‖(I - B₁B₁ᵀ)B₂‖₂`, which never forms an
/// `n x n` product and keeps full accuracy for small angles.
pub fn subspace_distance(b1: &DenseMatrix, b2: &DenseMatrix) -> Result<f64> {
    if b1.shape() != b2.shape() {
        return Err(Error::Dimension(alloc::format!(
            "subspace distance needs equal shapes, got {:?} and {:?}",
            b1.shape(),
            b2.shape()
        )));
    }
    if b1.cols() > b1.rows() {
        return Err(Error::Dimension("bases must have at most as many columns as rows".into()));
    }
    check_orthonormal(b1, "first basis")?;
    check_orthonormal(b2, "second basis")?;
    if b1.is_empty() {
        return Ok(0.0);
    }
    let residual = b2.sub(&b1.matmul(&b1.t_matmul(b2)));
    Ok(spectral_norm(&residual)?.clamp(0.0, 1.0))
}

/// Block diagnostics of a QLP factorization split at `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRevealReport {
    pub k: usize,
    pub sigma_min_r11: f64,
    pub norm_r22: f64,
    pub sigma_min_l11: f64,
    pub sigma_1_l22: f64,
    /// `|R[k-1][k-1]| / |R[k][k]|` (zero-based), infinite when the second
    /// diagonal entry vanishes.
    pub gap_ratio: f64,
}

pub fn rank_reveal_report(factors: &QlpFactors, k: usize) -> Result<RankRevealReport> {
    let d = factors.d();
    if k == 0 || k >= d {
        return Err(Error::Parameter(alloc::format!(
            "rank split needs 1 <= k < d = {d}, got k = {k}"
        )));
    }
    let r = factors.r_blocks(k)?;
    let l = factors.l_blocks(k)?;
    let rv = factors.r_values();
    let gap_ratio = if rv[k] == 0.0 {
        f64::INFINITY
    } else {
        rv[k - 1] / rv[k]
    };
    Ok(RankRevealReport {
        k,
        sigma_min_r11: sigma_min(&r.b11)?,
        norm_r22: spectral_norm(&r.b22)?,
        sigma_min_l11: sigma_min(&l.b11)?,
        sigma_1_l22: spectral_norm(&l.b22)?,
        gap_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPoint {
    pub d: usize,
    pub spectral: f64,
    pub frobenius: f64,
}

/// Approximation errors `‖A - Â_d‖` for every `d`. Deterministic algorithms
/// factor once and truncate; randomized ones draw a fresh sketch per `d`
/// from the same seed.
pub fn error_curve(
    a: &DenseMatrix,
    alg: Algorithm,
    d_values: &[usize],
    params: &SketchParams,
) -> Result<Vec<ErrorPoint>> {
    let limit = a.rows().min(a.cols());
    if let Some(&bad) = d_values.iter().find(|&&d| d == 0 || d > limit) {
        return Err(Error::Parameter(alloc::format!(
            "rank parameter must satisfy 1 <= d <= {limit}, got {bad}"
        )));
    }
    let full = if alg.is_randomized() {
        None
    } else {
        Some(factor_full(a, alg)?)
    };
    d_values
        .iter()
        .map(|&d| {
            let approx = match &full {
                Some(f) => f.truncate(d),
                None => approximate(a, alg, &SketchParams { d, ..*params })?,
            };
            let residual = a.sub(&approx.reconstruct());
            Ok(ErrorPoint {
                d,
                spectral: spectral_norm(&residual)?,
                frobenius: residual.frobenius_norm(),
            })
        })
        .collect()
}

/// Largest singular-value estimate of `alg` at rank `params.d` over `‖A‖₂`.
pub fn l2_norm_ratio(a: &DenseMatrix, alg: Algorithm, params: &SketchParams) -> Result<f64> {
    let norm = spectral_norm(a)?;
    if norm == 0.0 {
        return Err(Error::Input("norm ratio of a zero matrix is undefined".into()));
    }
    let approx = approximate(a, alg, params)?;
    let est = approx.estimates.iter().copied().fold(0.0, f64::max);
    Ok(est / norm)
}
