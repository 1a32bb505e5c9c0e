//! Randomized SVD and compressed randomized UTV.
//!
//! Both reuse the power-iteration scheme of PbP-QLP: in the orthonormalized
//! form every sample is passed through `orth` before the next application of
//! `A` or `Aᵀ`.

use alloc::vec::Vec;

use super::{check_sketch_size, orth_logged, CountingOperator, PowerScheme, SketchParams, SketchRecord};
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::qr::column_pivoted_qr;
use crate::rng::gaussian_matrix;
use crate::svd::{pseudoinverse, svd_full, SvdFactors};

/// Singular values of `V̄ᵀΩ` below this fraction of the largest are dropped
/// when forming the pass-efficient core.
pub const PINV_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RSvdFactors {
    /// Rank-`d` factors `Ũ`, `Σ̃`, `Ṽ`.
    pub svd: SvdFactors,
    pub sketch: SketchRecord,
}

/// `A ≈ Ũ T Ṽᵀ` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct UtvFactors {
    pub u: DenseMatrix,
    pub t: DenseMatrix,
    pub v: DenseMatrix,
    /// The core came from the sketches alone (no extra pass over `A`).
    pub pass_efficient: bool,
    /// Singular values of `V̄ᵀΩ` zeroed in the pseudoinverse (pass-efficient
    /// path only).
    pub pinv_dropped: usize,
    pub sketch: SketchRecord,
}

impl UtvFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.matmul(&self.t).matmul_t(&self.v)
    }
}

/// Randomized SVD: `Ū = orth(AΩ)` (sharpened by `q` rounds of power
/// iteration), then an SVD of the small matrix `G = ŪᵀA`.
pub fn r_svd(a: &DenseMatrix, d: usize, q: usize, seed: u64) -> Result<RSvdFactors> {
    r_svd_with(a, &SketchParams::new(d, q, seed))
}

pub fn r_svd_with(a: &DenseMatrix, params: &SketchParams) -> Result<RSvdFactors> {
    check_sketch_size(a, params.d)?;
    let omega = gaussian_matrix(a.cols(), params.d, params.seed)?;
    let mut op = CountingOperator::new(a);
    let mut warnings = Vec::new();

    let u_bar = match params.scheme {
        PowerScheme::Orthonormalized => {
            let mut u_bar = orth_logged(&op.apply(&omega), &mut warnings)?;
            for _ in 0..params.q {
                let v_hat = orth_logged(&op.apply_t(&u_bar), &mut warnings)?;
                u_bar = orth_logged(&op.apply(&v_hat), &mut warnings)?;
            }
            u_bar
        }
        PowerScheme::Plain => {
            let mut f = op.apply(&omega);
            for _ in 0..params.q {
                let y = op.apply_t(&f);
                f = op.apply(&y);
            }
            orth_logged(&f, &mut warnings)?
        }
    };

    // G = ŪᵀA, formed as (AᵀŪ)ᵀ.
    let g = op.apply_t(&u_bar).transpose();
    let small = svd_full(&g)?;
    let svd = SvdFactors {
        u: u_bar.matmul(&small.u),
        s: small.s,
        v: small.v,
    };
    Ok(RSvdFactors {
        svd,
        sketch: SketchRecord {
            phi: omega,
            seed: params.seed,
            d: params.d,
            q: params.q,
            scheme: params.scheme,
            passes_over_a: op.passes(),
            warnings,
        },
    })
}

/// Compressed randomized UTV.
///
/// Samples both ranges (`F₁ = AΩ`, `F₂ = AᵀŪ`), compresses `A` to the
/// `d x d` core `G = ŪᵀAV̄` and factors the core with column-pivoted QR. With
/// `pass_efficient` the core is instead estimated from the samples as
/// `Ĝ = ŪᵀF₁ (V̄ᵀΩ)†`, where `Ω` is whatever block `A` was last applied to
/// in order to produce `F₁`; this saves one pass over `A`.
pub fn cor_utv(
    a: &DenseMatrix,
    d: usize,
    q: usize,
    seed: u64,
    pass_efficient: bool,
) -> Result<UtvFactors> {
    cor_utv_with(a, &SketchParams::new(d, q, seed), pass_efficient)
}

pub fn cor_utv_with(a: &DenseMatrix, params: &SketchParams, pass_efficient: bool) -> Result<UtvFactors> {
    check_sketch_size(a, params.d)?;
    let omega = gaussian_matrix(a.cols(), params.d, params.seed)?;
    let mut op = CountingOperator::new(a);
    let mut warnings = Vec::new();

    let (f1, omega_eff, u_bar, v_bar) = match params.scheme {
        PowerScheme::Orthonormalized => {
            let mut omega_eff = omega.clone();
            let mut f1 = op.apply(&omega);
            for _ in 0..params.q {
                let u = orth_logged(&f1, &mut warnings)?;
                omega_eff = orth_logged(&op.apply_t(&u), &mut warnings)?;
                f1 = op.apply(&omega_eff);
            }
            let u_bar = orth_logged(&f1, &mut warnings)?;
            let f2 = op.apply_t(&u_bar);
            let v_bar = orth_logged(&f2, &mut warnings)?;
            (f1, omega_eff, u_bar, v_bar)
        }
        PowerScheme::Plain => {
            let mut omega_eff = omega.clone();
            let mut f1 = op.apply(&omega);
            for _ in 0..params.q {
                omega_eff = op.apply_t(&f1);
                f1 = op.apply(&omega_eff);
            }
            let f2 = op.apply_t(&f1);
            let u_bar = orth_logged(&f1, &mut warnings)?;
            let v_bar = orth_logged(&f2, &mut warnings)?;
            (f1, omega_eff, u_bar, v_bar)
        }
    };

    let (g, pinv_dropped) = if pass_efficient {
        let (pinv, dropped) = pseudoinverse(&v_bar.t_matmul(&omega_eff), PINV_REL_TOL)?;
        (u_bar.t_matmul(&f1).matmul(&pinv), dropped)
    } else {
        (u_bar.t_matmul(&op.apply(&v_bar)), 0)
    };

    let core = column_pivoted_qr(&g)?;
    let perm = core.perm.as_ref().expect("pivoted");
    Ok(UtvFactors {
        u: u_bar.matmul(&core.q),
        t: core.r.clone(),
        v: v_bar.permute_cols(perm),
        pass_efficient,
        pinv_dropped,
        sketch: SketchRecord {
            phi: omega,
            seed: params.seed,
            d: params.d,
            q: params.q,
            scheme: params.scheme,
            passes_over_a: op.passes(),
            warnings,
        },
    })
}
