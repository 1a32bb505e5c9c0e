//! Seeded Gaussian sampling.
//!
//! The generator is pinned so that sketches replicate bit-for-bit in any
//! language:
//!
//! 1. The 64-bit seed is expanded into four state words by SplitMix64
//!    (`z += 0x9e3779b97f4a7c15; z = (z ^ z>>30) * 0xbf58476d1ce4e5b9;
//!    z = (z ^ z>>27) * 0x94d049bb133111eb; z ^ z>>31`).
//! 2. Uniform words come from xoshiro256** (`rotl(s1 * 5, 7) * 9`).
//! 3. Each pair of words `(a, b)` is mapped to `u1 = ((a >> 11) + 1) * 2^-53`
//!    in (0, 1] and `u2 = (b >> 11) * 2^-53` in [0, 1), then Box–Muller gives
//!    `r cos(2π u2)` followed by `r sin(2π u2)` with `r = sqrt(-2 ln u1)`.
//! 4. Matrices are filled in column-major order.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct Xoshiro256 {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Xoshiro256 {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Xoshiro256 { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }
}

/// Standard normal stream (Box–Muller, both outputs used).
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: Xoshiro256,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: Xoshiro256::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53;
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// `rows x cols` matrix of i.i.d. standard normal entries, a pure function of
/// its arguments.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(alloc::format!(
            "gaussian matrix needs positive dimensions, got {rows}x{cols}"
        )));
    }
    let mut stream = NormalStream::new(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| stream.next_normal()).collect();
    Ok(DenseMatrix::from_raw(rows, cols, data))
}

/// Deterministic sub-seed for the `index`-th independent stream derived from
/// `seed`. Generators use it to keep their random factors decorrelated.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut s = seed ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
    splitmix64(&mut s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of SplitMix64 seeded with 0 (published test vector).
        let mut s = 0u64;
        assert_eq!(splitmix64(&mut s), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(&mut s), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn same_seed_same_bits() {
        let a = gaussian_matrix(3, 2, 7).unwrap();
        let b = gaussian_matrix(3, 2, 7).unwrap();
        let bits = |m: &DenseMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&gaussian_matrix(3, 2, 8).unwrap()));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(gaussian_matrix(0, 5, 0), Err(Error::Dimension(_))));
        assert!(matches!(gaussian_matrix(5, 0, 0), Err(Error::Dimension(_))));
    }
}
