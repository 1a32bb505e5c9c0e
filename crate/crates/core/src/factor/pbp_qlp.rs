use alloc::vec::Vec;

use super::{
    check_sketch_size, orth_logged, CountingOperator, PowerScheme, QlpFactors, SketchParams,
    SketchRecord,
};
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::qr::householder_qr;
use crate::rng::gaussian_matrix;

/// Projection-based partial QLP with orthonormalized power iteration.
///
/// Computes `A ≈ Q L Pᵀ` where `Q` (`n₁ x d`) and `P` (`n₂ x d`) have
/// orthonormal columns and `L` (`d x d`) is lower triangular with diagonal
/// entries approximating the leading singular values of `A`:
///
/// ```text
/// Φ = randn(n₁, d)
/// C = AᵀΦ;   P̄ = orth(C)
/// repeat q times:  C = A P̄;  P̄ = orth(C);  C = Aᵀ P̄;  P̄ = orth(C)
/// D = A P̄;   D = Q R          (unpivoted QR)
/// Rᵀ = P̃ R̃                    (unpivoted QR)
/// L = R̃ᵀ;    P = P̄ P̃
/// ```
///
/// Only unpivoted QR is used, and `A` is touched exactly `2q + 2` times.
pub fn pbp_qlp(a: &DenseMatrix, d: usize, q: usize, seed: u64) -> Result<QlpFactors> {
    pbp_qlp_with(a, &SketchParams::new(d, q, seed))
}

pub fn pbp_qlp_with(a: &DenseMatrix, params: &SketchParams) -> Result<QlpFactors> {
    let d = params.d;
    check_sketch_size(a, d)?;
    let phi = gaussian_matrix(a.rows(), d, params.seed)?;
    let mut op = CountingOperator::new(a);
    let mut warnings = Vec::new();

    let p_bar = match params.scheme {
        PowerScheme::Orthonormalized => {
            let mut p_bar = orth_logged(&op.apply_t(&phi), &mut warnings)?;
            for _ in 0..params.q {
                let c = op.apply(&p_bar);
                let u = orth_logged(&c, &mut warnings)?;
                p_bar = orth_logged(&op.apply_t(&u), &mut warnings)?;
            }
            p_bar
        }
        PowerScheme::Plain => {
            let mut c = op.apply_t(&phi);
            for _ in 0..params.q {
                let y = op.apply(&c);
                c = op.apply_t(&y);
            }
            orth_logged(&c, &mut warnings)?
        }
    };

    let dmat = op.apply(&p_bar);
    let first = householder_qr(&dmat)?;
    let second = householder_qr(&first.r.transpose())?;
    let l = second.r.transpose();
    let p_basis = p_bar.matmul(&second.q);

    Ok(QlpFactors {
        q_basis: first.q,
        l,
        p_basis,
        first_stage_r: first.r,
        sketch: Some(SketchRecord {
            phi,
            seed: params.seed,
            d,
            q: params.q,
            scheme: params.scheme,
            passes_over_a: op.passes(),
            warnings,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::norm::spectral_norm;
    use crate::qr::orthonormality_defect;

    #[test]
    fn identity_is_reproduced() {
        let a = DenseMatrix::identity(5);
        let f = pbp_qlp(&a, 5, 0, 3).unwrap();
        for v in f.l_values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(spectral_norm(&a.sub(&f.reconstruct())).unwrap() <= 1e-12);
    }

    #[test]
    fn structure_and_pass_count() {
        let a = gaussian_matrix(40, 30, 1).unwrap();
        for q in 0..3 {
            let f = pbp_qlp(&a, 8, q, 5).unwrap();
            assert!(f.l.is_lower_triangular());
            assert!(f.first_stage_r.is_upper_triangular());
            assert!(orthonormality_defect(&f.q_basis) < 1e-12);
            assert!(orthonormality_defect(&f.p_basis) < 1e-12);
            assert!(f.l.diag().iter().all(|&v| v >= 0.0));
            assert_eq!(f.sketch.as_ref().unwrap().passes_over_a, 2 * q + 2);
            let plain = pbp_qlp_with(&a, &SketchParams::new(8, q, 5).with_scheme(PowerScheme::Plain))
                .unwrap();
            assert_eq!(plain.sketch.unwrap().passes_over_a, 2 * q + 2);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = gaussian_matrix(20, 15, 2).unwrap();
        let f = pbp_qlp(&a, 6, 1, 9).unwrap();
        let g = pbp_qlp(&a, 6, 1, 9).unwrap();
        assert_eq!(f.l, g.l);
        assert_eq!(f.q_basis, g.q_basis);
    }

    #[test]
    fn sampling_size_out_of_range() {
        let a = gaussian_matrix(10, 6, 2).unwrap();
        assert!(matches!(pbp_qlp(&a, 0, 0, 1), Err(Error::Parameter(_))));
        assert!(matches!(pbp_qlp(&a, 7, 0, 1), Err(Error::Parameter(_))));
    }
}
