use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Decides measurement outcomes. `probs` are the conditional outcome
/// probabilities of one measurement, in outcome order.
pub trait OutcomeSource {
    fn choose(&mut self, probs: &[f64]) -> Result<usize>;
}

/// Independent ChaCha20 stream `stream` of the generator seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples outcomes from their probabilities.
#[derive(Debug, Clone)]
pub struct SampledOutcomes<R> {
    rng: R,
}

impl<R: Rng> SampledOutcomes<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }

    pub fn into_inner(self) -> R {
        self.rng
    }
}

impl SampledOutcomes<ChaCha20Rng> {
    pub fn seeded(seed: u64, stream: u64) -> Self {
        Self::new(rng_stream(seed, stream))
    }
}

impl<R: Rng> OutcomeSource for SampledOutcomes<R> {
    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        let total: f64 = probs.iter().sum();
        let mut u = self.rng.gen::<f64>() * total;
        for (i, &p) in probs.iter().enumerate() {
            if u < p {
                return Ok(i);
            }
            u -= p;
        }
        // rounding: fall back to the last outcome with weight
        probs
            .iter()
            .rposition(|&p| p > 0.0)
            .ok_or_else(|| Error::OutcomeSource("all outcomes have zero probability".into()))
    }
}

/// Replays a fixed list of outcomes, rejecting zero-probability choices.
#[derive(Debug, Clone, Default)]
pub struct ForcedOutcomes {
    choices: Vec<usize>,
    pos: usize,
}

impl ForcedOutcomes {
    pub const ZERO_TOL: f64 = 1e-14;

    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl OutcomeSource for ForcedOutcomes {
    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        let k = *self
            .choices
            .get(self.pos)
            .ok_or_else(|| Error::OutcomeSource(format!("no forced outcome at position {}", self.pos)))?;
        if k >= probs.len() {
            return Err(Error::OutcomeSource(format!(
                "forced outcome {k} but the measurement has {} outcomes",
                probs.len()
            )));
        }
        if probs[k] < Self::ZERO_TOL {
            return Err(Error::ZeroProbabilityBranch(k));
        }
        self.pos += 1;
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4)
            .map({
                let mut r = rng_stream(42, 0);
                move |_| r.gen()
            })
            .collect();
        let b: Vec<u64> = (0..4)
            .map({
                let mut r = rng_stream(42, 0);
                move |_| r.gen()
            })
            .collect();
        let c: Vec<u64> = (0..4)
            .map({
                let mut r = rng_stream(42, 1);
                move |_| r.gen()
            })
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn forced_rejects_zero_probability() {
        let mut f = ForcedOutcomes::new(vec![1, 0]);
        assert_eq!(f.choose(&[1.0, 0.0]), Err(Error::ZeroProbabilityBranch(1)));
        let mut f = ForcedOutcomes::new(vec![0]);
        assert_eq!(f.choose(&[0.5, 0.5]), Ok(0));
        assert!(f.choose(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn sampling_skips_impossible_outcomes() {
        let mut s = SampledOutcomes::seeded(7, 0);
        for _ in 0..1000 {
            assert_eq!(s.choose(&[0.0, 1.0, 0.0]).unwrap(), 1);
        }
    }
}
