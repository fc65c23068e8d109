use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Binomial, Distribution};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Real;

/// Key of one independent random substream.
///
/// Every `(master_seed, repetition, hypothesis)` triple, together with an
/// internal lane separating prior draws from Bernoulli draws, becomes the
/// 256-bit ChaCha key, so substreams never overlap and can be generated in any
/// order on any thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    pub master_seed: u64,
    pub repetition: u64,
    pub hypothesis: u64,
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Lane {
    Bernoulli = 0,
    Prior = 1,
}

impl StreamSeed {
    pub fn new(master_seed: u64, repetition: u64, hypothesis: u64) -> Self {
        Self {
            master_seed,
            repetition,
            hypothesis,
        }
    }

    pub(crate) fn rng(&self, lane: Lane) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        for (chunk, word) in key
            .chunks_exact_mut(8)
            .zip([self.master_seed, self.repetition, self.hypothesis, lane as u64])
        {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Endless i.i.d. Bernoulli(`p`) indicators for one hypothesis.
///
/// Each indicator consumes one 64-bit word: the top 53 bits, read as a
/// uniform on `[0, 1)`, are compared against `p`. `p = 0` and `p = 1` give
/// constant streams.
#[derive(Debug, Clone)]
pub struct BernoulliStream {
    rng: ChaCha8Rng,
    threshold: u64,
}

impl Iterator for BernoulliStream {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        Some((self.rng.next_u64() >> 11) < self.threshold)
    }
}

pub fn bernoulli_stream<T: Real>(p: T, seed: StreamSeed) -> BernoulliStream {
    let p = p.to_f64().unwrap_or(0.0).clamp(0.0, 1.0);
    BernoulliStream {
        rng: seed.rng(Lane::Bernoulli),
        threshold: (p * (1u64 << 53) as f64).ceil() as u64,
    }
}

/// `count` independent `Binomial(n, p)` draws, as the exceedance totals of
/// `count` streams of length `n` would be distributed.
pub fn binomial_counts<T: Real>(n: u64, p: T, count: usize, seed: StreamSeed) -> Vec<u64> {
    let p = p.to_f64().unwrap_or(0.0).clamp(0.0, 1.0);
    let dist = Binomial::new(n, p).expect("p clamped to [0, 1]");
    let mut rng = seed.rng(Lane::Prior);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

/// Uniform on `[lo, hi)`.
pub(crate) fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
