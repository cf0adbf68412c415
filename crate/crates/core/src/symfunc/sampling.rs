//! Random matrices for property checks.
//!
//! Cone samples come from rejection sampling: a symmetric Gaussian matrix is
//! shifted toward the identity by a random multiple and kept only if it lies in
//! `K_m`. The sampler counts attempts so the acceptance rate can be reported.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{cone_membership, SymMatrix};

/// Symmetric matrix with independent `N(0,1)` entries on and above the diagonal.
pub fn gaussian_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let mut s = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            s.set(i, j, rng.sample(StandardNormal));
        }
    }
    s
}

/// Nonzero positive semidefinite matrix `B B^T` of random rank `1..=n`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let rank = rng.random_range(1..=n);
    let cols: Vec<Vec<f64>> = (0..rank)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    SymMatrix::from_fn(n, |i, j| cols.iter().map(|c| c[i] * c[j]).sum())
}

/// Rejection sampler for the open cone `K_m`.
#[derive(Debug, Clone)]
pub struct ConeSampler {
    pub n: usize,
    pub m: usize,
    /// Shifts are drawn uniformly from `[0, max_shift]`.
    pub max_shift: f64,
    pub attempts: u64,
    pub accepted: u64,
}

impl ConeSampler {
    pub fn new(n: usize, m: usize) -> Self {
        ConeSampler { n, m, max_shift: 2.0 * (n as f64).sqrt(), attempts: 0, accepted: 0 }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SymMatrix {
        loop {
            self.attempts += 1;
            let shift = rng.random_range(0.0..self.max_shift);
            let s = gaussian_symmetric(rng, self.n).add(&SymMatrix::identity(self.n).scaled(shift));
            let member = cone_membership(&s, self.m).map(|v| v.member).unwrap_or(false);
            if member {
                self.accepted += 1;
                return s;
            }
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }
}
