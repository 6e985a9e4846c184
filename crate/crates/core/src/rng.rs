//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha`), whose output is
//! specified bit-for-bit and therefore identical across platforms. Normal
//! draws use the ziggurat sampler of `rand_distr::StandardNormal`.
//!
//! Parallel work never shares a stream. Sub-streams come from either
//! [`SeededRng::fork`], which consumes one `u64` from the parent, or
//! [`SeededRng::derive`], which selects an independent ChaCha stream id under
//! a root seed and is used to give each replication its own generator.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream number `stream` under `root`. Distinct stream numbers never
    /// overlap.
    pub fn derive(root: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(root);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Child stream seeded from the next draw of this one.
    pub fn fork(&mut self) -> Self {
        Self::new(self.inner.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut self.inner);
        idx
    }

    /// `m` distinct indices drawn uniformly from `0..n`, in draw order.
    pub fn sample_without_replacement(&mut self, n: usize, m: usize) -> Vec<usize> {
        let mut idx = self.permutation(n);
        idx.truncate(m);
        idx
    }
}
