//! Deterministic test matrices.
//!
//! Synthetic families are built as `U diag(σ) Vᵀ` with random orthonormal
//! factors drawn from seeded Gaussian matrices, so their exact spectrum is
//! known. The ill-posed families are fixed quadrature/Galerkin
//! discretizations of first-kind integral equations and take no seed.

mod hansen;
mod synthetic;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub use hansen::{baart, deriv2, foxgood, gen_hansen, gravity, heat, HansenProblem};
pub use synthetic::{
    gen_decay, gen_devils_stairs, gen_low_rank_plus_noise, linear_spectrum, random_orthonormal,
    with_spectrum, DecayKind,
};

/// `μ` of the large-gap low-rank-plus-noise matrix.
pub const MU_LARGE_GAP: f64 = 0.005;
/// `μ` of the small-gap low-rank-plus-noise matrix.
pub const MU_SMALL_GAP: f64 = 0.02;
pub const DEFAULT_STEP_LEN: usize = 15;
pub const DEFAULT_STEP_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFamily {
    LowRankPlusNoise { k: usize, mu: f64 },
    DevilsStairs { step_len: usize, step_ratio: f64 },
    FastDecay,
    SlowDecay,
    Hansen(HansenProblem),
}

/// A test-matrix family, its order and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub family: MatrixFamily,
    pub n: usize,
    pub seed: u64,
}

/// Generator output; `reference` is the exact spectrum of the noiseless part
/// for synthetic families and `None` for the ill-posed problems.
#[derive(Debug, Clone)]
pub struct GeneratedMatrix {
    pub a: DenseMatrix,
    pub reference: Option<Vec<f64>>,
}

impl SpectrumSpec {
    pub fn new(family: MatrixFamily, n: usize, seed: u64) -> Self {
        SpectrumSpec { family, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            MatrixFamily::LowRankPlusNoise { k, mu } => {
                if *k == 0 || *k >= self.n {
                    return Err(Error::Parameter(alloc::format!(
                        "low-rank-plus-noise needs 1 <= k < n, got k = {k}, n = {}",
                        self.n
                    )));
                }
                if !(mu.is_finite() && *mu >= 0.0) {
                    return Err(Error::Parameter(alloc::format!("noise level mu must be >= 0, got {mu}")));
                }
            }
            MatrixFamily::DevilsStairs {
                step_len,
                step_ratio,
            } => {
                if *step_len == 0 {
                    return Err(Error::Parameter("devil's stairs step length must be >= 1".into()));
                }
                if !(*step_ratio > 0.0 && *step_ratio < 1.0) {
                    return Err(Error::Parameter(alloc::format!(
                        "devil's stairs step ratio must lie in (0, 1), got {step_ratio}"
                    )));
                }
            }
            MatrixFamily::Hansen(p) => p.check_order(self.n)?,
            MatrixFamily::FastDecay | MatrixFamily::SlowDecay => {}
        }
        if self.n == 0 {
            return Err(Error::Parameter("matrix order must be >= 1".into()));
        }
        Ok(())
    }

    /// Exact spectrum of the synthetic part, without generating the matrix.
    pub fn reference_spectrum(&self) -> Option<Vec<f64>> {
        let n = self.n;
        match &self.family {
            MatrixFamily::LowRankPlusNoise { k, .. } => {
                let mut s = linear_spectrum(n, *k);
                s.resize(n, 0.0);
                Some(s)
            }
            MatrixFamily::DevilsStairs {
                step_len,
                step_ratio,
            } => Some(synthetic::stairs_spectrum(n, *step_len, *step_ratio)),
            MatrixFamily::FastDecay => Some(synthetic::decay_spectrum(n, DecayKind::Fast)),
            MatrixFamily::SlowDecay => Some(synthetic::decay_spectrum(n, DecayKind::Slow)),
            MatrixFamily::Hansen(_) => None,
        }
    }

    pub fn generate(&self) -> Result<GeneratedMatrix> {
        self.validate()?;
        let (a, reference) = match &self.family {
            MatrixFamily::LowRankPlusNoise { k, mu } => {
                let (a, s) = gen_low_rank_plus_noise(self.n, *k, *mu, self.seed)?;
                (a, Some(s))
            }
            MatrixFamily::DevilsStairs {
                step_len,
                step_ratio,
            } => {
                let (a, s) = gen_devils_stairs(self.n, *step_len, *step_ratio, self.seed)?;
                (a, Some(s))
            }
            MatrixFamily::FastDecay => {
                let (a, s) = gen_decay(self.n, DecayKind::Fast, self.seed)?;
                (a, Some(s))
            }
            MatrixFamily::SlowDecay => {
                let (a, s) = gen_decay(self.n, DecayKind::Slow, self.seed)?;
                (a, Some(s))
            }
            MatrixFamily::Hansen(p) => (gen_hansen(*p, self.n)?, None),
        };
        Ok(GeneratedMatrix { a, reference })
    }

    /// Canonical `family[:params]` label, parseable by [`MatrixFamily::from_str`].
    pub fn family_label(&self) -> String {
        self.family.to_string()
    }
}

impl fmt::Display for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixFamily::LowRankPlusNoise { k, mu } => write!(f, "lowrank:k={k},mu={mu}"),
            MatrixFamily::DevilsStairs {
                step_len,
                step_ratio,
            } => write!(f, "stairs:len={step_len},ratio={step_ratio}"),
            MatrixFamily::FastDecay => f.write_str("fast"),
            MatrixFamily::SlowDecay => f.write_str("slow"),
            MatrixFamily::Hansen(p) => f.write_str(p.name()),
        }
    }
}

/// Parses `family[:key=value,...]`.
///
/// Families: `lowrank` (`k`, `mu`), the aliases `largegap` / `smallgap`
/// (`k` = 20 with `mu` = 0.005 / 0.02), `stairs` (`len`, `ratio`), `fast`,
/// `slow`, and the problem names `baart`, `deriv2`, `foxgood`, `gravity`,
/// `heat`.
impl FromStr for MatrixFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let mut kv: Vec<(&str, &str)> = Vec::new();
        for item in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::Parameter(alloc::format!("matrix parameter '{item}' is not key=value"))
            })?;
            kv.push((k.trim(), v.trim()));
        }
        let lower = name.to_ascii_lowercase();
        let allowed: &[&str] = match lower.as_str() {
            "lowrank" | "largegap" | "smallgap" => &["k", "mu"],
            "stairs" => &["len", "ratio"],
            _ => &[],
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parameter(alloc::format!(
                "unknown parameter '{k}' for matrix family '{name}'"
            )));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let parse_f = |key: &str, default: f64| -> Result<f64> {
            get(key).map_or(Ok(default), |v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parameter(alloc::format!("'{key}' expects a number, got '{v}'")))
            })
        };
        let parse_u = |key: &str, default: usize| -> Result<usize> {
            get(key).map_or(Ok(default), |v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Parameter(alloc::format!("'{key}' expects an integer, got '{v}'")))
            })
        };
        Ok(match lower.as_str() {
            "lowrank" => MatrixFamily::LowRankPlusNoise {
                k: parse_u("k", 20)?,
                mu: parse_f("mu", MU_LARGE_GAP)?,
            },
            "largegap" => MatrixFamily::LowRankPlusNoise {
                k: parse_u("k", 20)?,
                mu: parse_f("mu", MU_LARGE_GAP)?,
            },
            "smallgap" => MatrixFamily::LowRankPlusNoise {
                k: parse_u("k", 20)?,
                mu: parse_f("mu", MU_SMALL_GAP)?,
            },
            "stairs" => MatrixFamily::DevilsStairs {
                step_len: parse_u("len", DEFAULT_STEP_LEN)?,
                step_ratio: parse_f("ratio", DEFAULT_STEP_RATIO)?,
            },
            "fast" => MatrixFamily::FastDecay,
            "slow" => MatrixFamily::SlowDecay,
            other => MatrixFamily::Hansen(other.parse::<HansenProblem>().map_err(|_| {
                Error::Parameter(alloc::format!(
                    "unknown matrix family '{name}' (expected lowrank, largegap, smallgap, stairs, fast, slow, baart, deriv2, foxgood, gravity, heat)"
                ))
            })?),
        })
    }
}
