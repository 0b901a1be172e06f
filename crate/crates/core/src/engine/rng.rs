//! The single random stream every stochastic draw goes through.
//!
//! Algorithm: ChaCha8 seeded with `seed_from_u64(seed)`. The stream position is
//! the generator's word position, so a (seed, position) pair pins every future draw.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> RngStream {
        RngStream { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    fn at(seed: u64, position: u128) -> RngStream {
        let mut s = RngStream::new(seed);
        s.rng.set_word_pos(position);
        s
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in [lo, hi); returns `lo` when the range is empty.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            lo + (hi - lo) * self.uniform()
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Poisson draw; a non-positive mean yields 0.
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if !lambda.is_finite() || lambda <= 0.0 {
            return 0;
        }
        let d = Poisson::new(lambda).expect("positive finite mean");
        let v: f64 = d.sample(&mut self.rng);
        v as u64
    }

    /// Uniform integer in [0, n); `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// A fresh seed for a derived stream.
    pub fn next_seed(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Index drawn proportionally to `weights` (all finite, non-negative, not all zero).
    pub fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut r = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            if r < *w {
                return i;
            }
            r -= w;
        }
        weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

impl PartialEq for RngStream {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.position() == other.position()
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    seed: u64,
    position: String,
}

impl Serialize for RngStream {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Repr { seed: self.seed, position: self.position().to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RngStream {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        let pos = r.position.parse::<u128>().map_err(serde::de::Error::custom)?;
        Ok(RngStream::at(r.seed, pos))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_values() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
        assert_eq!(a.poisson(7.0), b.poisson(7.0));
    }

    #[test]
    fn serialization_resumes_the_stream() {
        let mut a = RngStream::new(9);
        a.uniform();
        a.poisson(3.0);
        let json = serde_json::to_string(&a).unwrap();
        let mut b: RngStream = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.next_seed(), b.next_seed());
    }

    #[test]
    fn poisson_edge_cases() {
        let mut r = RngStream::new(1);
        assert_eq!(r.poisson(0.0), 0);
        assert_eq!(r.poisson(-3.0), 0);
        let n = 20_000;
        let mean = (0..n).map(|_| r.poisson(5.0) as f64).sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn weighted_respects_zero_weights() {
        let mut r = RngStream::new(3);
        for _ in 0..1000 {
            assert_eq!(r.weighted(&[0.0, 2.0, 0.0]), 1);
        }
    }
}
