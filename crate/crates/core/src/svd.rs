//! One-sided Jacobi SVD.
//!
//! The input is first reduced by column-pivoted QR, `AΠ = QR`, and Hestenes
//! rotations are applied to the columns of `Rᵀ`. The preconditioning step
//! concentrates the mass on the diagonal so that few sweeps are needed, and
//! the one-sided iteration keeps high relative accuracy for small singular
//! values.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::qr::column_pivoted_qr;

/// Maximum number of Jacobi sweeps.
pub const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `m x r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub s: Vec<f64>,
    /// `n x r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U diag(s) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.scale_cols(&self.s).matmul_t(&self.v)
    }

    /// Leading `r` triplets.
    pub fn truncate(&self, r: usize) -> SvdFactors {
        let r = r.min(self.s.len());
        SvdFactors {
            u: self.u.leading_cols(r),
            s: self.s[..r].to_vec(),
            v: self.v.leading_cols(r),
        }
    }
}

struct JacobiOutcome {
    /// Columns orthogonal on exit.
    x: DenseMatrix,
    /// Accumulated right rotations (`X_in W = X_out`), if requested.
    w: Option<DenseMatrix>,
    sweeps: usize,
}

/// Hestenes iteration on the columns of `x` until every pair satisfies
/// `|x_iᵀx_j| <= tol * ‖x_i‖‖x_j‖`.
fn hestenes(mut x: DenseMatrix, accumulate: bool) -> Result<JacobiOutcome> {
    let n = x.cols();
    let mut w = accumulate.then(|| DenseMatrix::identity(n));
    let tol = f64::EPSILON * libm::sqrt(x.rows().max(1) as f64);
    let mut norms: Vec<f64> = (0..n).map(|j| dot(x.col(j), x.col(j))).collect();
    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            let est = norms.iter().fold(0.0f64, |a, &b| a.max(b));
            return Err(Error::Convergence {
                estimate: libm::sqrt(est),
                iterations: sweeps,
            });
        }
        sweeps += 1;
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = norms[i];
                let beta = norms[j];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(x.col(i), x.col(j));
                if gamma.abs() <= tol * libm::sqrt(alpha) * libm::sqrt(beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                rotate(&mut x, i, j, c, s);
                if let Some(w) = w.as_mut() {
                    rotate(w, i, j, c, s);
                }
                norms[i] = (alpha - t * gamma).max(0.0);
                norms[j] = (beta + t * gamma).max(0.0);
            }
        }
        // Refresh tracked norms to stop drift.
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj = dot(x.col(j), x.col(j));
        }
        if !rotated {
            break;
        }
    }
    Ok(JacobiOutcome { x, w, sweeps })
}

#[inline]
fn rotate(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let rows = m.rows();
    let (ci, cj) = two_cols_mut(m, i, j, rows);
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *a;
        let xj = *b;
        *a = c * xi - s * xj;
        *b = s * xi + c * xj;
    }
}

fn two_cols_mut(m: &mut DenseMatrix, i: usize, j: usize, rows: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(i < j);
    let data = m.data_mut();
    let (lo, hi) = data.split_at_mut(j * rows);
    (&mut lo[i * rows..(i + 1) * rows], &mut hi[..rows])
}

fn check(m: &DenseMatrix) -> Result<()> {
    if m.is_empty() {
        return Err(Error::Dimension("SVD of an empty matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Full (economy) SVD: `m = U diag(s) Vᵀ` with `r = min(rows, cols)`
/// triplets, singular values sorted nonincreasing.
pub fn svd_full(m: &DenseMatrix) -> Result<SvdFactors> {
    check(m)?;
    if m.rows() < m.cols() {
        let t = svd_full(&m.transpose())?;
        return Ok(SvdFactors {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let n = m.cols();
    let qr = column_pivoted_qr(m)?;
    let perm = qr.perm.as_ref().expect("pivoted QR carries a permutation");
    let out = hestenes(qr.r.transpose(), true)?;
    let w = out.w.expect("accumulated");
    let y = out.x;

    let sigma: Vec<f64> = (0..n).map(|j| norm2(y.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    // Left factor of Rᵀ (normalized columns of Y) becomes the right factor of A.
    let mut ux = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut filled = vec![false; n];
    for (k, &j) in order.iter().enumerate() {
        s.push(sigma[j]);
        if sigma[j] > 0.0 {
            let inv = 1.0 / sigma[j];
            for (dst, src) in ux.col_mut(k).iter_mut().zip(y.col(j)) {
                *dst = src * inv;
            }
            filled[k] = true;
        }
    }
    complete_orthonormal(&mut ux, &filled);
    let w_sorted = w.permute_cols(&order);

    let u = qr.q.matmul(&w_sorted);
    let mut v = DenseMatrix::zeros(n, n);
    for k in 0..n {
        for (row, &p) in perm.iter().enumerate() {
            v.set(p, k, ux.get(row, k));
        }
    }
    Ok(SvdFactors { u, s, v })
}

/// Singular values only, nonincreasing. Skips accumulating the rotations.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    check(m)?;
    let m = if m.rows() < m.cols() {
        m.transpose()
    } else {
        m.clone()
    };
    let qr = column_pivoted_qr(&m)?;
    let out = hestenes(qr.r.transpose(), false)?;
    let mut s: Vec<f64> = (0..out.x.cols()).map(|j| norm2(out.x.col(j))).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Number of sweeps the kernel needed for `m` (diagnostics).
pub fn jacobi_sweeps(m: &DenseMatrix) -> Result<usize> {
    check(m)?;
    let m = if m.rows() < m.cols() {
        m.transpose()
    } else {
        m.clone()
    };
    let qr = column_pivoted_qr(&m)?;
    Ok(hestenes(qr.r.transpose(), false)?.sweeps)
}

/// Replaces the columns with `filled[k] == false` by unit vectors orthogonal
/// to every other column (modified Gram–Schmidt, two passes).
fn complete_orthonormal(m: &mut DenseMatrix, filled: &[bool]) {
    let rows = m.rows();
    let mut candidate = 0usize;
    for k in 0..m.cols() {
        if filled[k] {
            continue;
        }
        loop {
            assert!(candidate < rows, "orthonormal completion ran out of candidates");
            let mut e = vec![0.0; rows];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for j in 0..m.cols() {
                    if j == k {
                        continue;
                    }
                    let c = dot(m.col(j), &e);
                    for (ei, qi) in e.iter_mut().zip(m.col(j)) {
                        *ei -= c * qi;
                    }
                }
            }
            let nrm = norm2(&e);
            if nrm > 0.5 {
                for (dst, src) in m.col_mut(k).iter_mut().zip(&e) {
                    *dst = src / nrm;
                }
                break;
            }
        }
    }
}

/// Moore–Penrose pseudoinverse with singular values below `rel_tol * s[0]`
/// treated as zero. Returns the pseudoinverse and the number of discarded
/// singular values.
pub fn pseudoinverse(m: &DenseMatrix, rel_tol: f64) -> Result<(DenseMatrix, usize)> {
    let f = svd_full(m)?;
    let cutoff = rel_tol * f.s.first().copied().unwrap_or(0.0);
    let inv: Vec<f64> = f
        .s
        .iter()
        .map(|&x| if x > cutoff && x > 0.0 { 1.0 / x } else { 0.0 })
        .collect();
    let dropped = inv.iter().filter(|&&x| x == 0.0).count();
    Ok((f.v.scale_cols(&inv).matmul_t(&f.u), dropped))
}
