use serde::{Deserialize, Serialize};

use crate::automaton::{AutomatonState, StepOutcome};
use crate::schedule::LambdaSchedule;

/// One thinned per-iteration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub chosen: usize,
    pub reward: bool,
    pub best: usize,
    pub pi1: f64,
    pub counts: Vec<u64>,
}

impl TraceRecord {
    pub fn new(outcome: &StepOutcome, state: &AutomatonState) -> Self {
        Self {
            t: outcome.t,
            chosen: outcome.chosen,
            reward: outcome.reward,
            best: outcome.best,
            pi1: state.pi()[0],
            counts: state.counts().to_vec(),
        }
    }
}

/// Full state at a checkpoint iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: u64,
    pub pi: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub counts: Vec<u64>,
}

impl From<&AutomatonState> for Snapshot {
    fn from(state: &AutomatonState) -> Self {
        Self {
            t: state.t(),
            pi: state.pi().to_vec(),
            d_hat: state.d_hat().to_vec(),
            counts: state.counts().to_vec(),
        }
    }
}

/// Everything one replicate leaves behind.
///
/// `first_passage[k]` is the first iteration with `pi1 > 1 - eps_k`;
/// `sustained_passage[k]` is the start of the final stretch that stays above
/// the threshold through the horizon. Both are `None` when never reached.
/// `lower_bound_violations` counts breaches of the per-path floor
/// `π_i(t) >= π_i(0) θ^{γ(t)}` and is `None` where that floor does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub replicate: u64,
    pub seed: u64,
    pub schedule: LambdaSchedule,
    pub reward_probs: Vec<f64>,
    pub stride: Option<u64>,
    pub records: Vec<TraceRecord>,
    pub checkpoints: Vec<Snapshot>,
    pub first_passage: Vec<Option<u64>>,
    pub sustained_passage: Vec<Option<u64>>,
    pub lower_bound_violations: Option<u64>,
    pub terminal: Snapshot,
}

impl Trace {
    pub fn snapshot_at(&self, t: u64) -> Option<&Snapshot> {
        if self.terminal.t == t {
            return Some(&self.terminal);
        }
        self.checkpoints
            .binary_search_by_key(&t, |s| s.t)
            .ok()
            .map(|i| &self.checkpoints[i])
    }
}
