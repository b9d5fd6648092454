//! Keyed random streams.
//!
//! Every stream is a ChaCha8 generator whose 256-bit key is the four 64-bit
//! words `(seed, replicate, taxpayer, purpose)` in little-endian order. ChaCha
//! is counter-based, so distinct keys give unrelated streams and the same key
//! always replays the same sequence on every platform. Consuming one stream
//! never advances another.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;

use crate::error::{check_open_unit, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Audit,
    Decision,
    Parameter,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Audit => 1,
            Purpose::Decision => 2,
            Purpose::Parameter => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub replicate: u64,
    pub taxpayer: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(seed: u64, replicate: u64, taxpayer: u64, purpose: Purpose) -> Self {
        Self {
            seed,
            replicate,
            taxpayer,
            purpose,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        let words = [self.seed, self.replicate, self.taxpayer, self.purpose.tag()];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(bytes)
    }
}

/// Endless i.i.d. Bernoulli(p) flags.
#[derive(Debug, Clone)]
pub struct BernoulliStream {
    rng: ChaCha8Rng,
    dist: Bernoulli,
}

impl Iterator for BernoulliStream {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.dist.sample(&mut self.rng))
    }
}

pub fn bernoulli_stream(key: StreamKey, p: f64) -> Result<BernoulliStream> {
    check_open_unit("p", p)?;
    let dist = Bernoulli::new(p).expect("p checked to lie in (0, 1)");
    Ok(BernoulliStream {
        rng: key.rng(),
        dist,
    })
}

/// Endless uniform draws on `[0, 1)`.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl Iterator for UniformStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.rng.random::<f64>())
    }
}

pub fn uniform_stream(key: StreamKey) -> UniformStream {
    UniformStream { rng: key.rng() }
}

/// `count` independent Beta(2, 3) savings rates, each strictly inside (0, 1).
pub fn beta_2_3_sample(key: StreamKey, count: usize) -> Vec<f64> {
    let dist = Beta::new(2.0, 3.0).expect("valid shape parameters");
    let mut rng = key.rng();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: f64 = dist.sample(&mut rng);
        // Savings rates must stay in the open interval.
        if x > 0.0 && x < 1.0 {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(purpose: Purpose) -> StreamKey {
        StreamKey::new(42, 0, 0, purpose)
    }

    #[test]
    fn same_key_same_stream() {
        let a: Vec<bool> = bernoulli_stream(key(Purpose::Audit), 0.3)
            .unwrap()
            .take(500)
            .collect();
        let b: Vec<bool> = bernoulli_stream(key(Purpose::Audit), 0.3)
            .unwrap()
            .take(500)
            .collect();
        assert_eq!(a, b);
        let c: Vec<bool> = bernoulli_stream(StreamKey::new(42, 0, 1, Purpose::Audit), 0.3)
            .unwrap()
            .take(500)
            .collect();
        assert_ne!(a, c);
    }

    #[test]
    fn bernoulli_rate() {
        let p = 0.01;
        let draws = 100_000;
        let hits = bernoulli_stream(key(Purpose::Audit), p)
            .unwrap()
            .take(draws)
            .filter(|&x| x)
            .count();
        let rate = hits as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((rate - p).abs() < 3.0 * se, "rate {rate}");
    }

    #[test]
    fn bernoulli_rejects_bad_p() {
        assert!(bernoulli_stream(key(Purpose::Audit), 0.0).is_err());
        assert!(bernoulli_stream(key(Purpose::Audit), 1.0).is_err());
    }

    #[test]
    fn beta_moments() {
        let xs = beta_2_3_sample(key(Purpose::Parameter), 100_000);
        assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.4).abs() < 0.005, "mean {mean}");
        assert!((var - 0.04).abs() < 0.004, "var {var}");
    }

    #[test]
    fn streams_do_not_couple() {
        let audit = StreamKey::new(9, 3, 1, Purpose::Audit);
        let baseline: Vec<bool> = bernoulli_stream(audit, 0.2).unwrap().take(200).collect();
        // Drain another taxpayer's decision stream at an uneven rate in between.
        let mut other = uniform_stream(StreamKey::new(9, 3, 2, Purpose::Decision));
        let mut stream = bernoulli_stream(audit, 0.2).unwrap();
        let mut again = Vec::new();
        for i in 0..200 {
            for _ in 0..(i % 7) {
                other.next();
            }
            again.push(stream.next().unwrap());
        }
        assert_eq!(baseline, again);
    }
}
