//! Fixed inputs shared by the benchmarks.

use mhessian::symfunc::sampling::ConeSampler;
use mhessian::SymMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic batch of `K_m` samples of size `n`.
pub fn cone_batch(n: usize, m: usize, count: usize) -> Vec<SymMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 31 + m as u64);
    let mut sampler = ConeSampler::new(n, m);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}
