//! Pursuit learning and linear reward-inaction automata.
//!
//! Actions are indexed from 0 here; index 0 plays the role of the dominant
//! action in analysis runs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::ActionEnvironment;
use crate::error::{Error, Result};
use crate::schedule::LambdaSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Pursuit,
    /// Direct linear reward-inaction update, kept as a baseline.
    #[serde(alias = "lri")]
    LinearRewardInaction,
}

/// How `argmax d_hat` resolves equal estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Uniform among the tied actions, drawn from the iteration stream.
    Random,
}

/// Inverse-CDF action draw from a single uniform `u` in `[0, 1)`.
///
/// Walks the cumulative sum in ascending index order. If rounding leaves the
/// total just below `u`, the last action with positive mass is returned.
pub fn sample_action_with(pi: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in pi.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    last_positive
}

/// Draws an action from `pi`, consuming exactly one uniform variate.
pub fn sample_action<R: Rng + ?Sized>(pi: &[f64], rng: &mut R) -> usize {
    sample_action_with(pi, rng.gen::<f64>())
}

/// Running-mean update `d_hat + (x - d_hat) / n`, where `n >= 1` already
/// counts the new observation.
pub fn update_estimate(d_hat: f64, n: u64, reward: bool) -> f64 {
    debug_assert!(n >= 1);
    let x = if reward { 1.0 } else { 0.0 };
    (d_hat + (x - d_hat) / n as f64).clamp(0.0, 1.0)
}

/// Index of the largest estimate; ties go to the lowest index.
pub fn argmax_estimate(d_hat: &[f64]) -> usize {
    let mut best = 0;
    for (i, &d) in d_hat.iter().enumerate().skip(1) {
        if d > d_hat[best] {
            best = i;
        }
    }
    best
}

fn argmax_with<R: Rng + ?Sized>(d_hat: &[f64], tie_break: TieBreak, rng: &mut R) -> usize {
    let best = argmax_estimate(d_hat);
    if tie_break == TieBreak::LowestIndex {
        return best;
    }
    let top = d_hat[best];
    let tied: Vec<usize> = (0..d_hat.len()).filter(|&i| d_hat[i] == top).collect();
    if tied.len() == 1 {
        best
    } else {
        tied[rng.gen_range(0..tied.len())]
    }
}

/// Divides by the exact sum so the simplex constraint does not drift.
fn renormalize(pi: &mut [f64]) {
    let total: f64 = pi.iter().sum();
    for p in pi.iter_mut() {
        *p /= total;
    }
}

/// `pi <- (1 - lambda) pi + lambda e_m`, in place.
pub fn pursuit_update(pi: &mut [f64], best: usize, lambda: f64) {
    let keep = 1.0 - lambda;
    for (j, p) in pi.iter_mut().enumerate() {
        *p *= keep;
        if j == best {
            *p += lambda;
        }
    }
    renormalize(pi);
}

/// Linear reward-inaction: no change on penalty, otherwise move toward the
/// action just played.
pub fn lri_update(pi: &mut [f64], chosen: usize, reward: bool, lambda: f64) {
    if !reward {
        return;
    }
    for (j, p) in pi.iter_mut().enumerate() {
        if j == chosen {
            *p += lambda * (1.0 - *p);
        } else {
            *p -= lambda * *p;
        }
    }
    renormalize(pi);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutomatonState {
    pi: Vec<f64>,
    d_hat: Vec<f64>,
    counts: Vec<u64>,
    t: u64,
    init_pulls: u32,
}

impl AutomatonState {
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn d_hat(&self) -> &[f64] {
        &self.d_hat
    }

    /// Plays per action since initialization; initialization pulls are excluded.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of completed iterations.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn init_pulls(&self) -> u32 {
        self.init_pulls
    }

    pub fn num_actions(&self) -> usize {
        self.pi.len()
    }

    /// Builds a state directly, e.g. to start from a chosen `pi`.
    pub fn from_parts(pi: Vec<f64>, d_hat: Vec<f64>, init_pulls: u32) -> Result<Self> {
        let r = pi.len();
        if r < 2 {
            return Err(Error::TooFewActions(r));
        }
        if d_hat.len() != r {
            return Err(Error::Config(format!(
                "pi has {r} entries but d_hat has {}",
                d_hat.len()
            )));
        }
        if pi.iter().any(|&p| !(p >= 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("pi is not a probability vector".into()));
        }
        if d_hat.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::Config("d_hat entries must lie in [0, 1]".into()));
        }
        Ok(Self {
            pi,
            d_hat,
            counts: vec![0; r],
            t: 0,
            init_pulls,
        })
    }
}

/// What happened during one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub t: u64,
    pub chosen: usize,
    pub reward: bool,
    /// `m(t)`, the action with the largest estimate after the update.
    pub best: usize,
    pub lambda: f64,
}

/// Update rule plus schedule; the state itself lives in [`AutomatonState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Automaton {
    pub algorithm: Algorithm,
    pub schedule: LambdaSchedule,
    pub tie_break: TieBreak,
}

impl Automaton {
    pub fn pursuit(schedule: LambdaSchedule) -> Self {
        Self {
            algorithm: Algorithm::Pursuit,
            schedule,
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn lri(schedule: LambdaSchedule) -> Self {
        Self {
            algorithm: Algorithm::LinearRewardInaction,
            ..Self::pursuit(schedule)
        }
    }

    /// Uniform `pi(0)`, zero counts, and `d_hat(0)` set to the reward
    /// proportion over `init_pulls` plays of each action.
    pub fn initialize<R: Rng + ?Sized>(
        &self,
        env: &ActionEnvironment,
        init_pulls: u32,
        rng: &mut R,
    ) -> Result<AutomatonState> {
        let r = env.num_actions();
        if r < 2 {
            return Err(Error::TooFewActions(r));
        }
        if init_pulls == 0 {
            return Err(Error::Config(
                "at least one initialization pull per action is required".into(),
            ));
        }
        let d_hat = (0..r)
            .map(|i| {
                let hits = (0..init_pulls)
                    .filter(|_| env.sample_reward(i, rng))
                    .count();
                hits as f64 / init_pulls as f64
            })
            .collect();
        Ok(AutomatonState {
            pi: vec![1.0 / r as f64; r],
            d_hat,
            counts: vec![0; r],
            t: 0,
            init_pulls,
        })
    }

    /// One iteration: draw an action from `pi(t-1)`, observe the reward,
    /// update count and estimate, then move `pi` with `lambda_t`.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut AutomatonState,
        env: &ActionEnvironment,
        rng: &mut R,
    ) -> StepOutcome {
        let t = state.t + 1;
        let chosen = sample_action(&state.pi, rng);
        let reward = env.sample_reward(chosen, rng);

        state.counts[chosen] += 1;
        // the initialization draws stay part of the running mean
        let observations = state.counts[chosen] + u64::from(state.init_pulls);
        state.d_hat[chosen] = update_estimate(state.d_hat[chosen], observations, reward);
        let best = argmax_with(&state.d_hat, self.tie_break, rng);

        let lambda = self.schedule.lambda_at(t);
        match self.algorithm {
            Algorithm::Pursuit => pursuit_update(&mut state.pi, best, lambda),
            Algorithm::LinearRewardInaction => lri_update(&mut state.pi, chosen, reward, lambda),
        }
        state.t = t;

        StepOutcome {
            t,
            chosen,
            reward,
            best,
            lambda,
        }
    }
}
