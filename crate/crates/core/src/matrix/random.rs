//! Seeded sampling of Gaussian matrices and Haar-distributed frames.
//!
//! All randomness flows from a [`RngSeed`] through ChaCha8, whose output
//! stream is fixed by its specification, so sampled matrices are
//! bitwise-reproducible across platforms and crate versions.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Matrix, OrthonormalFrame};
use crate::error::{domain, Result};

/// A 64-bit seed; the only entropy source in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child seed for a tuple of indices. Counter-based: the result depends
    /// only on `(self, parts)`, never on how many seeds were derived before.
    pub fn derive(self, parts: &[u64]) -> RngSeed {
        let mut state = splitmix64(self.0 ^ 0x5eed_5eed_5eed_5eed);
        for &part in parts {
            state = splitmix64(state ^ splitmix64(part.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        RngSeed(state)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `m × n` matrix of i.i.d. `N(0, σ²)` entries drawn in row-major order.
pub fn sample_gaussian_with<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, sigma: f64) -> Result<Matrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(domain(format!(
            "standard deviation must be finite and >= 0, got {sigma}"
        )));
    }
    if m == 0 || n == 0 {
        return Err(domain(format!("cannot sample a {m}x{n} matrix")));
    }
    if sigma == 0.0 {
        return Ok(Matrix::zeros(m, n));
    }
    let mut entries = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            entries[(i, j)] = sigma * z;
        }
    }
    Ok(Matrix::from_inner(entries))
}

pub fn sample_gaussian(m: usize, n: usize, sigma: f64, seed: RngSeed) -> Result<Matrix> {
    sample_gaussian_with(&mut seed.rng(), m, n, sigma)
}

/// Uniform element of the Stiefel set `O(p, r)`: the Q factor of a Gaussian
/// `p × r` matrix with the signs of `diag(R)` forced positive.
pub fn sample_haar_frame_with<R: Rng + ?Sized>(rng: &mut R, p: usize, r: usize) -> Result<OrthonormalFrame> {
    if r == 0 || r > p {
        return Err(domain(format!("cannot sample a width-{r} frame in R^{p}")));
    }
    let gaussian = sample_gaussian_with(rng, p, r, 1.0)?.into_inner();
    let qr = gaussian.qr();
    let mut q = qr.q();
    let upper = qr.r();
    for j in 0..r {
        if upper[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(OrthonormalFrame::from_trusted(q))
}

pub fn sample_haar_frame(p: usize, r: usize, seed: RngSeed) -> Result<OrthonormalFrame> {
    sample_haar_frame_with(&mut seed.rng(), p, r)
}
