use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seeded random stream.
///
/// Splitting rule: a master seed `s` owns 2^64 independent ChaCha8 streams.
/// [`Rng::fork`] with label `k` returns stream `k` of the same key, so child
/// streams never overlap and do not depend on how much the parent consumed.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent child stream `label` of this seed.
    pub fn fork(&self, label: u64) -> Rng {
        Self::with_stream(self.seed, label)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.normal() * s, self.normal() * s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }
}
