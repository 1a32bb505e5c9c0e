use super::QlpFactors;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::qr::{column_pivoted_qr, QrFactors};
use crate::svd::{svd_full, SvdFactors};

/// Pivoted QLP: two column-pivoted QR passes, the second on `R_Aᵀ`.
///
/// `AΠ_A = Q_A R_A` and `R_AᵀΠ' = P' L'ᵀ` give
/// `A = (Q_A Π') L' (Π_A P')ᵀ`. The result carries `d = n₂` and no sketch.
pub fn pivoted_qlp(a: &DenseMatrix) -> Result<QlpFactors> {
    if a.rows() < a.cols() {
        return Err(Error::Dimension(alloc::format!(
            "pivoted QLP needs n1 >= n2, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let first = column_pivoted_qr(a)?;
    let second = column_pivoted_qr(&first.r.transpose())?;
    let pi_a = first.perm.as_ref().expect("pivoted");
    let pi_r = second.perm.as_ref().expect("pivoted");

    let q_basis = first.q.permute_cols(pi_r);
    // Row i of Π_A P' is row pi_a^{-1}(i) of P'.
    let n = a.cols();
    let mut inverse = alloc::vec![0usize; n];
    for (pos, &orig) in pi_a.iter().enumerate() {
        inverse[orig] = pos;
    }
    let p_rows = &second.q;
    let p_basis = DenseMatrix::from_fn(n, p_rows.cols(), |i, j| p_rows.get(inverse[i], j))?;

    Ok(QlpFactors {
        q_basis,
        l: second.r.transpose(),
        p_basis,
        first_stage_r: first.r,
        sketch: None,
    })
}

/// Best rank-`r` approximation: the leading `r` triplets of the full SVD.
pub fn truncated_svd(a: &DenseMatrix, r: usize) -> Result<SvdFactors> {
    let limit = a.rows().min(a.cols());
    if r == 0 || r > limit {
        return Err(Error::Parameter(alloc::format!(
            "truncation rank must satisfy 1 <= r <= {limit}, got {r}"
        )));
    }
    Ok(svd_full(a)?.truncate(r))
}

/// Column-pivoted QR of `A`; its rank-`d` approximation is
/// `Q[:, :d] R[:d, :] Πᵀ`.
pub fn cpqr_approx(a: &DenseMatrix) -> Result<QrFactors> {
    column_pivoted_qr(a)
}
