use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::norm::spectral_norm;
use crate::qr::orth;
use crate::rng::{derive_seed, gaussian_matrix};

/// Smallest nonzero value of the linear spectrum.
pub const LINEAR_SPECTRUM_FLOOR: f64 = 1e-25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    /// `σ_i = e^{-i/6}`.
    Fast,
    /// `σ_i = i^{-2}`.
    Slow,
}

/// `n x cols` matrix with orthonormal columns, `orth` of a seeded Gaussian.
pub fn random_orthonormal(n: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    Ok(orth(&gaussian_matrix(n, cols, seed)?)?.q)
}

/// `U diag(s) Vᵀ` using the leading `s.len()` columns of `u` and `v`.
pub fn with_spectrum(u: &DenseMatrix, s: &[f64], v: &DenseMatrix) -> DenseMatrix {
    let r = s.len();
    u.leading_cols(r).scale_cols(s).matmul_t(&v.leading_cols(r))
}

/// Leading `k` values of the line from 1 (index 1) to 1e-25 (index `n`).
pub fn linear_spectrum(n: usize, k: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![1.0; k.min(n)];
    }
    let step = (1.0 - LINEAR_SPECTRUM_FLOOR) / (n - 1) as f64;
    (0..k).map(|i| 1.0 - i as f64 * step).collect()
}

pub(crate) fn stairs_spectrum(n: usize, step_len: usize, ratio: f64) -> Vec<f64> {
    (0..n).map(|i| libm::pow(ratio, (i / step_len) as f64)).collect()
}

pub(crate) fn decay_spectrum(n: usize, kind: DecayKind) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let i = i as f64;
            match kind {
                DecayKind::Fast => libm::exp(-i / 6.0),
                DecayKind::Slow => 1.0 / (i * i),
            }
        })
        .collect()
}

fn full_rank(n: usize, s: &[f64], seed: u64) -> Result<DenseMatrix> {
    let u = random_orthonormal(n, n, derive_seed(seed, 0))?;
    let v = random_orthonormal(n, n, derive_seed(seed, 1))?;
    Ok(with_spectrum(&u, s, &v))
}

/// `A = U_k Σ_k V_kᵀ + μ σ_k N` with `N` a Gaussian matrix of unit spectral
/// norm. Returns `A` and the spectrum of the noiseless part (length `n`).
pub fn gen_low_rank_plus_noise(n: usize, k: usize, mu: f64, seed: u64) -> Result<(DenseMatrix, Vec<f64>)> {
    if k == 0 || k >= n {
        return Err(Error::Parameter(alloc::format!(
            "low-rank-plus-noise needs 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::Parameter(alloc::format!("noise level mu must be >= 0, got {mu}")));
    }
    let s = linear_spectrum(n, k);
    let u = random_orthonormal(n, k, derive_seed(seed, 0))?;
    let v = random_orthonormal(n, k, derive_seed(seed, 1))?;
    let mut a = with_spectrum(&u, &s, &v);
    if mu > 0.0 {
        let g = gaussian_matrix(n, n, derive_seed(seed, 2))?;
        let scale = mu * s[k - 1] / spectral_norm(&g)?;
        a = a.add(&g.scale(scale));
    }
    let mut reference = s;
    reference.resize(n, 0.0);
    Ok((a, reference))
}

/// Staircase spectrum `σ_i = ratio^⌊(i-1)/step_len⌋`.
pub fn gen_devils_stairs(n: usize, step_len: usize, ratio: f64, seed: u64) -> Result<(DenseMatrix, Vec<f64>)> {
    if n == 0 || step_len == 0 {
        return Err(Error::Parameter("devil's stairs needs n >= 1 and step length >= 1".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Parameter(alloc::format!(
            "devil's stairs step ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let s = stairs_spectrum(n, step_len, ratio);
    Ok((full_rank(n, &s, seed)?, s))
}

pub fn gen_decay(n: usize, kind: DecayKind, seed: u64) -> Result<(DenseMatrix, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Parameter("matrix order must be >= 1".into()));
    }
    let s = decay_spectrum(n, kind);
    Ok((full_rank(n, &s, seed)?, s))
}
