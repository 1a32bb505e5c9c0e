//! Spectral norm.
//!
//! Small matrices go through the Jacobi SVD. Larger ones use Golub–Kahan–
//! Lanczos bidiagonalization (a Krylov method on `mᵀm`) with full
//! reorthogonalization, stopped once the Ritz residual of the leading triplet
//! drops below the relative tolerance.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix};
use crate::rng::NormalStream;
use crate::svd::{singular_values, svd_full};

/// Largest dimension routed to the dense SVD path.
pub const SVD_PATH_MAX_DIM: usize = 400;
pub const KRYLOV_REL_TOL: f64 = 1e-10;
pub const KRYLOV_MAX_ITER: usize = 5000;
const START_SEED: u64 = 0x5eed_0f_5bec_7a1;

pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.rows().max(m.cols()) <= SVD_PATH_MAX_DIM {
        spectral_norm_svd(m)
    } else {
        spectral_norm_krylov(m, KRYLOV_REL_TOL, KRYLOV_MAX_ITER)
    }
}

/// `s[0]` of the Jacobi SVD.
pub fn spectral_norm_svd(m: &DenseMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(singular_values(m)?[0])
}

/// Golub–Kahan–Lanczos estimate of `‖m‖₂`.
pub fn spectral_norm_krylov(m: &DenseMatrix, rel_tol: f64, max_iter: usize) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let mut stream = NormalStream::new(START_SEED);
    let mut v: Vec<f64> = (0..cols).map(|_| stream.next_normal()).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let full_dim = rows.min(cols);
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut u = m.matvec(&v);
    let mut alpha = norm2(&u);
    if alpha == 0.0 {
        // Start vector in the null space.
        if m.frobenius_norm() == 0.0 {
            return Ok(0.0);
        }
        return spectral_norm_svd(m);
    }
    u.iter_mut().for_each(|x| *x /= alpha);
    vs.push(v);
    us.push(u);
    alphas.push(alpha);

    let mut estimate = alpha;
    for step in 1..=max_iter {
        // Right vector: Aᵀu - alpha v, reorthogonalized.
        let mut w = m.t_matvec(us.last().unwrap());
        axpy(-alpha, vs.last().unwrap(), &mut w);
        reorthogonalize(&mut w, &vs);
        let beta = norm2(&w);

        let (sigma, residual) = leading_ritz(&alphas, &betas, beta)?;
        estimate = sigma;
        if residual <= rel_tol * sigma || beta <= f64::EPSILON * sigma || step == full_dim {
            return Ok(sigma);
        }
        if step == max_iter {
            break;
        }
        w.iter_mut().for_each(|x| *x /= beta);
        betas.push(beta);

        let mut z = m.matvec(&w);
        axpy(-beta, us.last().unwrap(), &mut z);
        reorthogonalize(&mut z, &us);
        alpha = norm2(&z);
        vs.push(w);
        if alpha <= f64::EPSILON * sigma {
            alphas.push(0.0);
            let (sigma, _) = leading_ritz(&alphas, &betas, 0.0)?;
            return Ok(sigma);
        }
        z.iter_mut().for_each(|x| *x /= alpha);
        us.push(z);
        alphas.push(alpha);
    }
    Err(Error::Convergence {
        estimate,
        iterations: max_iter,
    })
}

fn reorthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, x);
            axpy(-c, b, x);
        }
    }
}

/// Largest singular value of the upper bidiagonal matrix with diagonal
/// `alphas` and superdiagonal `betas`, together with the residual
/// `beta_next * |y_k|` of the corresponding Ritz pair.
fn leading_ritz(alphas: &[f64], betas: &[f64], beta_next: f64) -> Result<(f64, f64)> {
    let k = alphas.len();
    let b = DenseMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if j == i + 1 {
            betas[i]
        } else {
            0.0
        }
    })?;
    let f = svd_full(&b)?;
    let y_last = f.v.get(k - 1, 0);
    Ok((f.s[0], beta_next * y_last.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_matrix;

    #[test]
    fn diagonal_and_zero() {
        let d = DenseMatrix::from_diag(&[2.0, 7.0, 1.0]).unwrap();
        assert_eq!(spectral_norm(&d).unwrap(), 7.0);
        assert!((spectral_norm_krylov(&d, 1e-12, 50).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&DenseMatrix::zeros(4, 3)).unwrap(), 0.0);
        assert_eq!(spectral_norm_krylov(&DenseMatrix::zeros(4, 3), 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn krylov_cap_reports_best_estimate() {
        let m = gaussian_matrix(120, 100, 9).unwrap();
        match spectral_norm_krylov(&m, 1e-15, 2) {
            Err(Error::Convergence { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
