use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A stationary binary-reward environment: playing action `i` yields a
/// reward with probability `reward_probs[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEnvironment {
    reward_probs: Vec<f64>,
}

impl ActionEnvironment {
    /// Raw constructor for exploratory runs. Ties among the maxima are allowed.
    pub fn new(reward_probs: Vec<f64>) -> Result<Self> {
        if reward_probs.len() < 2 {
            return Err(Error::TooFewActions(reward_probs.len()));
        }
        for &d in &reward_probs {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Domain {
                    name: "reward probability",
                    value: d,
                    domain: "[0, 1]",
                });
            }
        }
        Ok(Self { reward_probs })
    }

    /// Constructor for analysis runs: the maximum must be unique, and the
    /// actions are sorted so that the dominant one has index 0.
    pub fn with_dominant_first(mut reward_probs: Vec<f64>) -> Result<Self> {
        Self::new(reward_probs.clone())?;
        reward_probs.sort_by(|a, b| b.total_cmp(a));
        if reward_probs[0] == reward_probs[1] {
            return Err(Error::TiedMaximum);
        }
        Ok(Self { reward_probs })
    }

    pub fn reward_probs(&self) -> &[f64] {
        &self.reward_probs
    }

    pub fn num_actions(&self) -> usize {
        self.reward_probs.len()
    }

    /// Index of the unique best action, if there is one.
    pub fn dominant(&self) -> Option<usize> {
        let mut best = 0;
        let mut tied = false;
        for (i, &d) in self.reward_probs.iter().enumerate().skip(1) {
            if d > self.reward_probs[best] {
                best = i;
                tied = false;
            } else if d == self.reward_probs[best] {
                tied = true;
            }
        }
        (!tied).then_some(best)
    }

    /// One Bernoulli(d_i) reward draw.
    pub fn sample_reward<R: Rng + ?Sized>(&self, action: usize, rng: &mut R) -> bool {
        rng.gen_bool(self.reward_probs[action])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{replicate_rng, StreamPurpose};

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            ActionEnvironment::new(vec![0.5]),
            Err(Error::TooFewActions(1))
        );
        assert!(ActionEnvironment::new(vec![0.5, 1.2]).is_err());
        assert!(ActionEnvironment::new(vec![-0.1, 0.2]).is_err());
        assert_eq!(
            ActionEnvironment::with_dominant_first(vec![0.6, 0.6]),
            Err(Error::TiedMaximum)
        );
    }

    #[test]
    fn raw_constructor_accepts_ties() {
        let env = ActionEnvironment::new(vec![0.6, 0.6, 0.1]).unwrap();
        assert_eq!(env.dominant(), None);
    }

    #[test]
    fn analysis_constructor_puts_best_first() {
        let env = ActionEnvironment::with_dominant_first(vec![0.3, 0.7, 0.5]).unwrap();
        assert_eq!(env.reward_probs(), &[0.7, 0.5, 0.3]);
        assert_eq!(env.dominant(), Some(0));
    }

    #[test]
    fn degenerate_rewards() {
        let env = ActionEnvironment::new(vec![1.0, 0.0]).unwrap();
        let mut rng = replicate_rng(1, 0, StreamPurpose::Iteration);
        for _ in 0..1000 {
            assert!(env.sample_reward(0, &mut rng));
            assert!(!env.sample_reward(1, &mut rng));
        }
    }

    #[test]
    fn bernoulli_mean() {
        let env = ActionEnvironment::new(vec![0.7, 0.1]).unwrap();
        let mut rng = replicate_rng(2, 0, StreamPurpose::Iteration);
        let n = 100_000;
        let hits = (0..n).filter(|_| env.sample_reward(0, &mut rng)).count();
        assert!((hits as f64 / n as f64 - 0.7).abs() < 0.01);
    }
}
