use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{cor_utv_with, cpqr_approx, pbp_qlp_with, pivoted_qlp, r_svd_with, SketchParams};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::svd::svd_full;

/// The factorizations compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    TruncatedSvd,
    Cpqr,
    PivotedQlp,
    RSvd,
    CorUtv,
    /// CoR-UTV with the sketch-only core estimate.
    CorUtvPassEfficient,
    PbpQlp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::TruncatedSvd,
        Algorithm::Cpqr,
        Algorithm::PivotedQlp,
        Algorithm::RSvd,
        Algorithm::CorUtv,
        Algorithm::CorUtvPassEfficient,
        Algorithm::PbpQlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TruncatedSvd => "svd",
            Algorithm::Cpqr => "cpqr",
            Algorithm::PivotedQlp => "pqlp",
            Algorithm::RSvd => "r_svd",
            Algorithm::CorUtv => "cor_utv",
            Algorithm::CorUtvPassEfficient => "cor_utv_pe",
            Algorithm::PbpQlp => "pbp_qlp",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            Algorithm::RSvd | Algorithm::CorUtv | Algorithm::CorUtvPassEfficient | Algorithm::PbpQlp
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::Parameter(alloc::format!(
                    "unknown algorithm '{s}' (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

/// `A ≈ left · core · rightᵀ`, with singular-value estimates read off the
/// factorization (diagonal magnitudes or `Σ̃`).
///
/// `right = None` stands for the identity. Deterministic factorizations are
/// nested: [`LowRankApprox::truncate`] of the full factorization equals the
/// factorization at the smaller rank.
#[derive(Debug, Clone)]
pub struct LowRankApprox {
    pub algorithm: Algorithm,
    pub left: DenseMatrix,
    pub core: DenseMatrix,
    pub right: Option<DenseMatrix>,
    pub estimates: Vec<f64>,
}

impl LowRankApprox {
    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let lc = self.left.matmul(&self.core);
        match &self.right {
            Some(r) => lc.matmul_t(r),
            None => lc,
        }
    }

    /// Keeps the leading `d` columns of `left` and rows of `core`.
    pub fn truncate(&self, d: usize) -> LowRankApprox {
        let d = d.min(self.rank());
        LowRankApprox {
            algorithm: self.algorithm,
            left: self.left.leading_cols(d),
            core: self.core.submatrix(0..d, 0..self.core.cols()),
            right: self.right.clone(),
            estimates: self.estimates[..d.min(self.estimates.len())].to_vec(),
        }
    }
}

fn diag_abs(m: &DenseMatrix) -> Vec<f64> {
    m.diag().into_iter().map(f64::abs).collect()
}

/// Full-rank factorization for the deterministic algorithms.
pub fn factor_full(a: &DenseMatrix, alg: Algorithm) -> Result<LowRankApprox> {
    match alg {
        Algorithm::TruncatedSvd => {
            let f = svd_full(a)?;
            Ok(LowRankApprox {
                algorithm: alg,
                left: f.u.scale_cols(&f.s),
                core: DenseMatrix::identity(f.s.len()),
                right: Some(f.v),
                estimates: f.s,
            })
        }
        Algorithm::Cpqr => {
            let f = cpqr_approx(a)?;
            let perm = f.perm.as_ref().expect("pivoted");
            let mut inverse = alloc::vec![0usize; perm.len()];
            for (pos, &orig) in perm.iter().enumerate() {
                inverse[orig] = pos;
            }
            Ok(LowRankApprox {
                algorithm: alg,
                estimates: f.r_values(),
                left: f.q,
                // R Πᵀ: column `orig` of the input is column inverse[orig] of R.
                core: f.r.permute_cols(&inverse),
                right: None,
            })
        }
        Algorithm::PivotedQlp => {
            let f = pivoted_qlp(a)?;
            Ok(LowRankApprox {
                algorithm: alg,
                estimates: f.l_values(),
                left: f.q_basis,
                core: f.l,
                right: Some(f.p_basis),
            })
        }
        _ => Err(Error::Parameter(alloc::format!(
            "{alg} is randomized; use `approximate`"
        ))),
    }
}

/// Rank-`params.d` approximation of `a` by `alg`. Deterministic algorithms
/// ignore `q`, `seed` and `scheme`.
pub fn approximate(a: &DenseMatrix, alg: Algorithm, params: &SketchParams) -> Result<LowRankApprox> {
    let limit = a.rows().min(a.cols());
    if params.d == 0 || params.d > limit {
        return Err(Error::Parameter(alloc::format!(
            "rank parameter must satisfy 1 <= d <= {limit}, got {}",
            params.d
        )));
    }
    match alg {
        Algorithm::TruncatedSvd | Algorithm::Cpqr | Algorithm::PivotedQlp => {
            Ok(factor_full(a, alg)?.truncate(params.d))
        }
        Algorithm::RSvd => {
            let f = r_svd_with(a, params)?;
            Ok(LowRankApprox {
                algorithm: alg,
                left: f.svd.u.scale_cols(&f.svd.s),
                core: DenseMatrix::identity(params.d),
                right: Some(f.svd.v),
                estimates: f.svd.s,
            })
        }
        Algorithm::CorUtv | Algorithm::CorUtvPassEfficient => {
            let f = cor_utv_with(a, params, alg == Algorithm::CorUtvPassEfficient)?;
            Ok(LowRankApprox {
                algorithm: alg,
                estimates: diag_abs(&f.t),
                left: f.u,
                core: f.t,
                right: Some(f.v),
            })
        }
        Algorithm::PbpQlp => {
            let f = pbp_qlp_with(a, params)?;
            Ok(LowRankApprox {
                algorithm: alg,
                estimates: f.l_values(),
                left: f.q_basis,
                core: f.l,
                right: Some(f.p_basis),
            })
        }
    }
}

/// Parses a comma-separated algorithm list.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Algorithm::from_str)
        .collect()
}

impl Algorithm {
    /// Every known name, for help texts.
    pub fn known_names() -> String {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        names.join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::spectral_norm;
    use crate::rng::gaussian_matrix;

    #[test]
    fn names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("qr".parse::<Algorithm>().is_err());
        assert_eq!(
            parse_algorithms("svd, pbp_qlp").unwrap(),
            alloc::vec![Algorithm::TruncatedSvd, Algorithm::PbpQlp]
        );
    }

    #[test]
    fn deterministic_truncation_is_projection() {
        // Q₁Q₁ᵀA for the nested deterministic factorizations.
        let a = gaussian_matrix(15, 10, 3).unwrap();
        for alg in [Algorithm::TruncatedSvd, Algorithm::Cpqr, Algorithm::PivotedQlp] {
            let full = factor_full(&a, alg).unwrap();
            assert!(full.reconstruct().max_abs_diff(&a) < 1e-12, "{alg}");
            let t = full.truncate(4);
            let q = crate::qr::orth(&t.left).unwrap().q;
            let proj = q.matmul(&q.t_matmul(&a));
            assert!(t.reconstruct().max_abs_diff(&proj) < 1e-12, "{alg}");
        }
    }

    #[test]
    fn every_algorithm_recovers_exact_rank() {
        let a = gaussian_matrix(25, 3, 1).unwrap().matmul_t(&gaussian_matrix(20, 3, 2).unwrap());
        let s1 = spectral_norm(&a).unwrap();
        for alg in Algorithm::ALL {
            let f = approximate(&a, alg, &SketchParams::new(3, 0, 7)).unwrap();
            let err = spectral_norm(&a.sub(&f.reconstruct())).unwrap();
            assert!(err <= 1e-10 * s1, "{alg}: {err:e}");
        }
    }
}
