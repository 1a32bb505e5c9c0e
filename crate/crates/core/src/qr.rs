//! Householder QR kernels.
//!
//! Both variants return economy factors with `diag(R) >= 0` and exact zeros
//! below the diagonal of `R`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix};

#[derive(Debug, Clone)]
pub struct QrFactors {
    /// `m x r` with orthonormal columns.
    pub q: DenseMatrix,
    /// `r x n` upper triangular.
    pub r: DenseMatrix,
    /// Column `j` of `Q R` is column `perm[j]` of the input. `None` for the
    /// unpivoted kernel.
    pub perm: Option<Vec<usize>>,
}

impl QrFactors {
    /// `Q R`, i.e. the input with its columns permuted when pivoting was used.
    pub fn product(&self) -> DenseMatrix {
        self.q.matmul(&self.r)
    }

    /// Magnitudes of the diagonal of `R`.
    pub fn r_values(&self) -> Vec<f64> {
        self.r.diag().into_iter().map(f64::abs).collect()
    }
}

/// Work matrix holding Householder vectors below the diagonal (implicit unit
/// leading entry) and `R` on and above it.
struct Householder {
    a: DenseMatrix,
    tau: Vec<f64>,
}

/// Generates the reflector annihilating `x[1..]`, overwriting `x` with
/// `(beta, v[1..])`. Returns `tau`.
fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let xnorm = norm2(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -libm::copysign(libm::hypot(alpha, xnorm), alpha);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    x[1..].iter_mut().for_each(|v| *v *= scale);
    x[0] = beta;
    tau
}

/// Applies `I - tau v vᵀ` (with `v[0] = 1` implicit) to `y`.
#[inline]
fn apply_reflector(v_tail: &[f64], tau: f64, y: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let w = y[0] + dot(v_tail, &y[1..]);
    let s = tau * w;
    y[0] -= s;
    for (yi, vi) in y[1..].iter_mut().zip(v_tail) {
        *yi -= s * vi;
    }
}

impl Householder {
    fn reflect_step(&mut self, k: usize) {
        let m = self.a.rows();
        let n = self.a.cols();
        let tau = make_reflector(&mut self.a.col_mut(k)[k..]);
        self.tau.push(tau);
        if tau == 0.0 {
            return;
        }
        let v_tail: Vec<f64> = self.a.col(k)[k + 1..m].to_vec();
        for j in k + 1..n {
            apply_reflector(&v_tail, tau, &mut self.a.col_mut(j)[k..]);
        }
    }

    /// Splits the work matrix into thin `Q` and `R`, fixing signs so that
    /// `diag(R) >= 0`.
    fn finish(self, perm: Option<Vec<usize>>) -> QrFactors {
        let m = self.a.rows();
        let n = self.a.cols();
        let r = m.min(n);
        let mut rmat = DenseMatrix::zeros(r, n);
        for j in 0..n {
            for i in 0..=j.min(r - 1) {
                rmat.set(i, j, self.a.get(i, j));
            }
        }
        let mut q = DenseMatrix::zeros(m, r);
        for i in 0..r {
            q.set(i, i, 1.0);
        }
        for k in (0..r).rev() {
            let tau = self.tau[k];
            if tau == 0.0 {
                continue;
            }
            let v_tail = &self.a.col(k)[k + 1..m];
            for j in k..r {
                apply_reflector(v_tail, tau, &mut q.col_mut(j)[k..]);
            }
        }
        for i in 0..r {
            if rmat.get(i, i) < 0.0 {
                for j in i..n {
                    rmat.set(i, j, -rmat.get(i, j));
                }
                q.col_mut(i).iter_mut().for_each(|v| *v = -*v);
            }
        }
        QrFactors { q, r: rmat, perm }
    }
}

fn check_input(m: &DenseMatrix) -> Result<()> {
    if m.is_empty() {
        return Err(Error::Dimension(alloc::format!(
            "QR needs at least one row and column, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Unpivoted Householder QR, economy size.
pub fn householder_qr(m: &DenseMatrix) -> Result<QrFactors> {
    check_input(m)?;
    let r = m.rows().min(m.cols());
    let mut h = Householder {
        a: m.clone(),
        tau: Vec::with_capacity(r),
    };
    for k in 0..r {
        h.reflect_step(k);
    }
    Ok(h.finish(None))
}

/// Householder QR with column pivoting (largest remaining column norm first,
/// ties to the lowest index). Uses LAPACK-style norm downdating with
/// recomputation when cancellation is detected.
pub fn column_pivoted_qr(m: &DenseMatrix) -> Result<QrFactors> {
    check_input(m)?;
    let rows = m.rows();
    let n = m.cols();
    let r = rows.min(n);
    let tol = libm::sqrt(f64::EPSILON);
    let mut h = Householder {
        a: m.clone(),
        tau: Vec::with_capacity(r),
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut vn1: Vec<f64> = (0..n).map(|j| norm2(m.col(j))).collect();
    let mut vn2 = vn1.clone();

    for k in 0..r {
        let mut p = k;
        for j in k + 1..n {
            if vn1[j] > vn1[p] {
                p = j;
            }
        }
        if p != k {
            h.a.swap_cols(k, p);
            perm.swap(k, p);
            vn1.swap(k, p);
            vn2.swap(k, p);
        }
        h.reflect_step(k);
        for j in k + 1..n {
            if vn1[j] == 0.0 {
                continue;
            }
            let t = h.a.get(k, j).abs() / vn1[j];
            let temp = (1.0 - t * t).max(0.0);
            let ratio = vn1[j] / vn2[j];
            if temp * ratio * ratio <= tol {
                let fresh = if k + 1 < rows {
                    norm2(&h.a.col(j)[k + 1..])
                } else {
                    0.0
                };
                vn1[j] = fresh;
                vn2[j] = fresh;
            } else {
                vn1[j] *= libm::sqrt(temp);
            }
        }
    }
    Ok(h.finish(Some(perm)))
}

/// Flag raised when `orth` is asked for a basis of a numerically
/// rank-deficient matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankWarning {
    /// First column whose R-value fell below the threshold.
    pub index: usize,
    /// `|r[index][index]| / |r[0][0]|`.
    pub ratio: f64,
}

/// Relative R-value threshold below which `orth` reports rank deficiency.
pub const ORTH_RANK_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct OrthBasis {
    pub q: DenseMatrix,
    pub warning: Option<RankWarning>,
}

/// Orthonormal basis for the range of a tall matrix: the thin `Q` of its
/// unpivoted QR. A numerically rank-deficient input still yields a full set
/// of orthonormal columns, with a warning attached.
pub fn orth(m: &DenseMatrix) -> Result<OrthBasis> {
    if m.rows() < m.cols() {
        return Err(Error::Dimension(alloc::format!(
            "orth needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let f = householder_qr(m)?;
    let d = f.r.diag();
    let lead = d[0].abs();
    let warning = d.iter().enumerate().find_map(|(i, v)| {
        let ratio = if lead > 0.0 { v.abs() / lead } else { 0.0 };
        (ratio < ORTH_RANK_TOL).then_some(RankWarning { index: i, ratio })
    });
    Ok(OrthBasis { q: f.q, warning })
}

/// `‖QᵀQ - I‖₂` bound via the Frobenius norm (cheap, used in assertions).
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.t_matmul(q);
    let mut d = vec![0.0; g.rows() * g.cols()];
    for j in 0..g.cols() {
        for i in 0..g.rows() {
            let e = if i == j { 1.0 } else { 0.0 };
            d[i + j * g.rows()] = g.get(i, j) - e;
        }
    }
    norm2(&d)
}
