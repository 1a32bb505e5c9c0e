//! Discretized first-kind integral equations (Regularization Tools
//! conventions: Galerkin with box functions, or midpoint quadrature).

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub const MIN_ORDER: usize = 8;
/// Depth of the mass line in the gravity problem.
pub const GRAVITY_DEPTH: f64 = 0.25;
/// Heat conductivity of the inverse heat problem.
pub const HEAT_KAPPA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HansenProblem {
    Baart,
    Deriv2,
    Foxgood,
    Gravity,
    Heat,
}

impl HansenProblem {
    pub const ALL: [HansenProblem; 5] = [
        HansenProblem::Baart,
        HansenProblem::Deriv2,
        HansenProblem::Foxgood,
        HansenProblem::Gravity,
        HansenProblem::Heat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HansenProblem::Baart => "baart",
            HansenProblem::Deriv2 => "deriv2",
            HansenProblem::Foxgood => "foxgood",
            HansenProblem::Gravity => "gravity",
            HansenProblem::Heat => "heat",
        }
    }

    pub(crate) fn check_order(self, n: usize) -> Result<()> {
        if n < MIN_ORDER {
            return Err(Error::Parameter(alloc::format!(
                "{} needs n >= {MIN_ORDER}, got {n}",
                self.name()
            )));
        }
        if self == HansenProblem::Baart && n % 2 != 0 {
            return Err(Error::Parameter(alloc::format!("baart needs an even order, got {n}")));
        }
        Ok(())
    }
}

impl fmt::Display for HansenProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HansenProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        HansenProblem::ALL
            .iter()
            .copied()
            .find(|p| p.name() == lower)
            .ok_or_else(|| Error::Parameter(alloc::format!("unknown test problem '{s}'")))
    }
}

pub fn gen_hansen(problem: HansenProblem, n: usize) -> Result<DenseMatrix> {
    problem.check_order(n)?;
    match problem {
        HansenProblem::Baart => baart(n),
        HansenProblem::Deriv2 => deriv2(n),
        HansenProblem::Foxgood => foxgood(n),
        HansenProblem::Gravity => gravity(n),
        HansenProblem::Heat => heat(n),
    }
}

/// `K(s,t) = exp(s cos t)` on `[0, π/2] x [0, π]`. Exact integration in `s`
/// and Simpson's rule in `t` over each box, scaled to the `L²` Galerkin basis.
pub fn baart(n: usize) -> Result<DenseMatrix> {
    HansenProblem::Baart.check_order(n)?;
    let hs = core::f64::consts::PI / (2.0 * n as f64);
    let hx = core::f64::consts::PI / n as f64;
    // ∫ over row box i of exp(s c) ds.
    let box_integral = |i: usize, c: f64| -> f64 {
        let (lo, hi) = (i as f64 * hs, (i + 1) as f64 * hs);
        if c.abs() < 1e-300 {
            hs
        } else {
            (libm::exp(hi * c) - libm::exp(lo * c)) / c
        }
    };
    let scale = 1.0 / libm::sqrt(hs * hx);
    DenseMatrix::from_fn(n, n, |i, j| {
        let c1 = libm::cos(j as f64 * hx);
        let c2 = libm::cos((j as f64 + 0.5) * hx);
        let c3 = if 2 * (j + 1) == n {
            0.0
        } else {
            libm::cos((j + 1) as f64 * hx)
        };
        let simpson = (box_integral(i, c1) + 4.0 * box_integral(i, c2) + box_integral(i, c3)) * hx / 6.0;
        simpson * scale
    })
}

/// Green's function of the second derivative on `[0, 1]`,
/// `K(s,t) = s(t-1)` for `s < t` and `t(s-1)` otherwise, Galerkin
/// discretization. Symmetric.
pub fn deriv2(n: usize) -> Result<DenseMatrix> {
    HansenProblem::Deriv2.check_order(n)?;
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let entry = |i: usize, j: usize| -> f64 {
        // 1-based indices, lower triangle i >= j.
        let (fi, fj) = (i as f64, j as f64);
        if i == j {
            h2 * ((fi * fi - fi + 0.25) * h - (fi - 2.0 / 3.0))
        } else {
            h2 * (fj - 0.5) * ((fi - 0.5) * h - 1.0)
        }
    };
    DenseMatrix::from_fn(n, n, |i, j| {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        entry(r + 1, c + 1)
    })
}

/// `K(s,t) = sqrt(s² + t²)` on `[0, 1]²`, midpoint quadrature.
pub fn foxgood(n: usize) -> Result<DenseMatrix> {
    HansenProblem::Foxgood.check_order(n)?;
    let h = 1.0 / n as f64;
    DenseMatrix::from_fn(n, n, |i, j| {
        let s = h * (i as f64 + 0.5);
        let t = h * (j as f64 + 0.5);
        h * libm::sqrt(s * s + t * t)
    })
}

/// `K(s,t) = d (d² + (s-t)²)^{-3/2}` on `[0, 1]²`, midpoint quadrature.
pub fn gravity(n: usize) -> Result<DenseMatrix> {
    HansenProblem::Gravity.check_order(n)?;
    let h = 1.0 / n as f64;
    let d = GRAVITY_DEPTH;
    DenseMatrix::from_fn(n, n, |i, j| {
        let diff = h * (i as f64 - j as f64);
        h * d / libm::pow(d * d + diff * diff, 1.5)
    })
}

/// Inverse heat equation: lower-triangular Toeplitz matrix of
/// `k(t) = t^{-3/2} exp(-1/(4κ² t)) / (2κ√π)` at the midpoints.
pub fn heat(n: usize) -> Result<DenseMatrix> {
    HansenProblem::Heat.check_order(n)?;
    let h = 1.0 / n as f64;
    let c = h / (2.0 * HEAT_KAPPA * libm::sqrt(core::f64::consts::PI));
    let d = 1.0 / (4.0 * HEAT_KAPPA * HEAT_KAPPA);
    let kernel: alloc::vec::Vec<f64> = (0..n)
        .map(|i| {
            let t = h * (i as f64 + 0.5);
            c * libm::pow(t, -1.5) * libm::exp(-d / t)
        })
        .collect();
    DenseMatrix::from_fn(n, n, |i, j| if i >= j { kernel[i - j] } else { 0.0 })
}
