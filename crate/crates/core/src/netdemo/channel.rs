//! Memoryless bit-flip channel applied to the significant bits of a frame.

use rand::distributions::{Bernoulli, BernoulliError, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::flip_bit;

#[derive(Debug, Clone)]
pub struct BitFlipChannel {
    p: f64,
    dist: Option<Bernoulli>,
    rng: ChaCha8Rng,
}

impl BitFlipChannel {
    pub fn new(p: f64, seed: u64) -> Result<Self, BernoulliError> {
        Self::with_stream(p, seed, 0)
    }

    /// Independent channel per `(seed, stream)`.
    pub fn with_stream(p: f64, seed: u64, stream: u64) -> Result<Self, BernoulliError> {
        let dist = if p == 0.0 { None } else { Some(Bernoulli::new(p)?) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(BitFlipChannel { p, dist, rng })
    }

    pub fn clean() -> Self {
        Self::new(0.0, 0).expect("zero is a valid probability")
    }

    pub fn flip_prob(&self) -> f64 {
        self.p
    }

    /// Flips each of the first `bit_len` bits independently; returns the
    /// number of flips.
    pub fn apply(&mut self, bytes: &mut [u8], bit_len: usize) -> usize {
        let Some(dist) = &self.dist else {
            return 0;
        };
        let mut flips = 0;
        for i in 0..bit_len.min(bytes.len() * 8) {
            if dist.sample(&mut self.rng) {
                flip_bit(bytes, i);
                flips += 1;
            }
        }
        flips
    }
}

/// Probability that at least one of `bits` independent bits flips.
pub fn frame_error_prob(p: f64, bits: usize) -> f64 {
    -(bits as f64 * (-p).ln_1p()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_probabilities() {
        assert!(BitFlipChannel::new(-0.1, 0).is_err());
        assert!(BitFlipChannel::new(1.5, 0).is_err());
        assert!(BitFlipChannel::new(f64::NAN, 0).is_err());
    }

    #[test]
    fn clean_channel_is_identity() {
        let mut ch = BitFlipChannel::clean();
        let mut bytes = vec![0xa5u8; 32];
        assert_eq!(ch.apply(&mut bytes, 256), 0);
        assert_eq!(bytes, vec![0xa5u8; 32]);
    }

    #[test]
    fn padding_is_never_touched() {
        let mut ch = BitFlipChannel::new(1.0, 3).unwrap();
        let mut bytes = vec![0u8; 2];
        assert_eq!(ch.apply(&mut bytes, 10), 10);
        assert_eq!(bytes, vec![0xff, 0xc0]);
    }

    #[test]
    fn flip_rate_matches_p() {
        let mut ch = BitFlipChannel::new(0.01, 9).unwrap();
        let n = 1_000_000;
        let mut bytes = vec![0u8; n / 8];
        let flips = ch.apply(&mut bytes, n) as f64;
        let se = (0.01 * 0.99 * n as f64).sqrt();
        assert!((flips - 0.01 * n as f64).abs() < 4.0 * se);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let run = |stream| {
            let mut ch = BitFlipChannel::with_stream(0.3, 5, stream).unwrap();
            let mut b = vec![0u8; 64];
            ch.apply(&mut b, 512);
            b
        };
        assert_eq!(run(1), run(1));
        assert_ne!(run(1), run(2));
    }

    #[test]
    fn frame_error_formula() {
        assert_eq!(frame_error_prob(0.0, 266), 0.0);
        let direct = 1.0 - (1.0 - 1e-4f64).powi(266);
        assert!((frame_error_prob(1e-4, 266) - direct).abs() < 1e-12);
    }
}
