//! Seeded Monte Carlo over independent replicates.
//!
//! Replicate `k` draws from streams keyed by `(master_seed, k)` (see
//! [`crate::rng`]), runs on the rayon pool, and is collected back in index
//! order, so every result is a pure function of the configuration.

pub mod estimators;
mod report;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::harmonic;
use crate::automaton::{Algorithm, Automaton, TieBreak};
use crate::environment::ActionEnvironment;
use crate::error::{check_open_unit, Error, Result};
use crate::rng::{replicate_rng, replicate_seed, StreamPurpose};
use crate::schedule::LambdaSchedule;
use crate::trace::{Snapshot, Trace, TraceRecord};

pub use report::{
    build_report, gap_demo, CheckpointEstimates, ConvergenceSummary, CountSummary,
    EpsilonEstimate, EstimateReport, GapReport,
};

pub const DEFAULT_INIT_PULLS: u32 = 10;
pub const DEFAULT_STRIDE: u64 = 10;

/// Relative slack allowed when re-checking `π_i(t) >= π_i(0) θ^{γ(t)}`,
/// which the simulator reaches by a different rounding path.
const LOWER_BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: ActionEnvironment,
    pub algorithm: Algorithm,
    pub schedule: LambdaSchedule,
    pub horizon: u64,
    pub replicates: u64,
    pub master_seed: u64,
    /// Keep every `stride`-th iteration in [`Trace::records`]; `None` keeps none.
    pub trace_stride: Option<u64>,
    pub epsilons: Vec<f64>,
    /// Half-gap used for `h = η²/8`; defaults to half the top-two gap.
    pub eta: Option<f64>,
    /// Iterations at which full snapshots are stored. The horizon is always
    /// available through [`Trace::terminal`].
    pub checkpoints: Vec<u64>,
    pub init_pulls: u32,
    pub tie_break: TieBreak,
}

impl ExperimentConfig {
    /// Pursuit with the given schedule and defaults elsewhere: horizon 1000,
    /// 100 replicates, seed 0, stride 10, `ε = 0.05`, checkpoints from
    /// [`default_checkpoints`].
    pub fn new(environment: ActionEnvironment, schedule: LambdaSchedule) -> Self {
        let horizon = 1000;
        Self {
            environment,
            algorithm: Algorithm::Pursuit,
            schedule,
            horizon,
            replicates: 100,
            master_seed: 0,
            trace_stride: Some(DEFAULT_STRIDE),
            epsilons: vec![0.05],
            eta: None,
            checkpoints: default_checkpoints(horizon),
            init_pulls: DEFAULT_INIT_PULLS,
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        ActionEnvironment::new(self.environment.reward_probs().to_vec())?;
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::NoReplicates);
        }
        if self.trace_stride == Some(0) {
            return Err(Error::Config("trace stride must be at least 1".into()));
        }
        if self.init_pulls == 0 {
            return Err(Error::Config("init_pulls must be at least 1".into()));
        }
        for &eps in &self.epsilons {
            check_open_unit("epsilon", eps)?;
        }
        if let Some(eta) = self.eta {
            check_open_unit("eta", eta)?;
        }
        if let Some(&t) = self
            .checkpoints
            .iter()
            .find(|&&t| t == 0 || t > self.horizon)
        {
            return Err(Error::Config(format!(
                "checkpoint {t} lies outside [1, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Sorted, deduplicated checkpoints.
    pub fn sorted_checkpoints(&self) -> Vec<u64> {
        let mut c = self.checkpoints.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn automaton(&self) -> Automaton {
        Automaton {
            algorithm: self.algorithm,
            schedule: self.schedule,
            tie_break: self.tie_break,
        }
    }
}

/// `1, 2, 5, 10, 20, 50, ...` up to the horizon, plus the horizon itself.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let t = decade.saturating_mul(m);
            if t >= horizon {
                break 'outer;
            }
            out.push(t);
        }
        decade = decade.saturating_mul(10);
    }
    out.push(horizon);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub traces: Vec<Trace>,
    pub report: EstimateReport,
}

/// Runs every replicate and aggregates the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    let traces = run_replicates(config)?;
    let report = build_report(config, &traces)?;
    Ok(ExperimentRun { traces, report })
}

pub fn run_replicates(config: &ExperimentConfig) -> Result<Vec<Trace>> {
    config.validate()?;
    let checkpoints = config.sorted_checkpoints();
    (0..config.replicates)
        .into_par_iter()
        .map(|k| run_replicate(config, &checkpoints, k))
        .collect()
}

/// One replicate. `checkpoints` must be sorted and deduplicated.
pub fn run_replicate(config: &ExperimentConfig, checkpoints: &[u64], replicate: u64) -> Result<Trace> {
    let env = &config.environment;
    let automaton = config.automaton();
    let mut init_rng = replicate_rng(config.master_seed, replicate, StreamPurpose::Initialization);
    let mut rng = replicate_rng(config.master_seed, replicate, StreamPurpose::Iteration);
    let mut state = automaton.initialize(env, config.init_pulls, &mut init_rng)?;

    let thresholds: Vec<f64> = config.epsilons.iter().map(|e| 1.0 - e).collect();
    let mut first_passage = vec![None; thresholds.len()];
    let mut sustained_passage: Vec<Option<u64>> = vec![None; thresholds.len()];

    let floor = LowerBoundCheck::new(config, state.pi());
    let mut violations = floor.as_ref().map(|_| 0u64);
    let mut gamma = 0.0;

    let mut records = Vec::new();
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = checkpoints.iter().peekable();

    for t in 1..=config.horizon {
        let outcome = automaton.step(&mut state, env, &mut rng);
        let pi1 = state.pi()[0];

        for (k, &threshold) in thresholds.iter().enumerate() {
            if pi1 > threshold {
                first_passage[k].get_or_insert(t);
                sustained_passage[k].get_or_insert(t);
            } else {
                sustained_passage[k] = None;
            }
        }

        if let (Some(check), Some(count)) = (&floor, violations.as_mut()) {
            gamma += 1.0 / t as f64;
            *count += check.violations(state.pi(), gamma);
        }

        if config.trace_stride.is_some_and(|s| t % s == 0) {
            records.push(TraceRecord::new(&outcome, &state));
        }
        if next_checkpoint.next_if_eq(&&t).is_some() {
            snapshots.push(Snapshot::from(&state));
        }
    }

    Ok(Trace {
        replicate,
        seed: replicate_seed(config.master_seed, replicate),
        schedule: config.schedule,
        reward_probs: env.reward_probs().to_vec(),
        stride: config.trace_stride,
        records,
        checkpoints: snapshots,
        first_passage,
        sustained_passage,
        lower_bound_violations: violations,
        terminal: Snapshot::from(&state),
    })
}

/// Per-path floor `π_i(t) >= π_i(0) θ^{γ(t)}`, valid for pursuit under the
/// harmonic schedule.
struct LowerBoundCheck {
    pi0: Vec<f64>,
    ln_theta: f64,
}

impl LowerBoundCheck {
    fn new(config: &ExperimentConfig, pi0: &[f64]) -> Option<Self> {
        match (config.algorithm, config.schedule) {
            (Algorithm::Pursuit, LambdaSchedule::HarmonicTheta { theta }) => Some(Self {
                pi0: pi0.to_vec(),
                ln_theta: theta.ln(),
            }),
            _ => None,
        }
    }

    fn violations(&self, pi: &[f64], gamma: f64) -> u64 {
        let decay = (gamma * self.ln_theta).exp() * (1.0 - LOWER_BOUND_SLACK);
        pi.iter()
            .zip(&self.pi0)
            .filter(|(p, p0)| **p < **p0 * decay)
            .count() as u64
    }
}

/// `π₁(0) θ^{γ(t)}` with `π₁(0) = 1/r`, the floor every path stays above.
pub fn pi_floor(theta: f64, actions: usize, t: u64) -> f64 {
    (harmonic(t) * theta.ln()).exp() / actions as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(d: Vec<f64>, schedule: LambdaSchedule) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ActionEnvironment::new(d).unwrap(), schedule);
        c.horizon = 200;
        c.replicates = 8;
        c.checkpoints = vec![10, 50, 200];
        c.master_seed = 11;
        c
    }

    #[test]
    fn checkpoint_grid() {
        assert_eq!(default_checkpoints(1000), vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]);
        assert_eq!(default_checkpoints(1), vec![1]);
        assert_eq!(default_checkpoints(7), vec![1, 2, 5, 7]);
    }

    #[test]
    fn validation() {
        let base = config(vec![0.8, 0.4], LambdaSchedule::harmonic(0.8).unwrap());
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.replicates = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.checkpoints.push(201);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.checkpoints.push(0);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.trace_stride = Some(0);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.horizon = 0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.epsilons = vec![1.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn trace_shape() {
        let c = config(vec![0.8, 0.4], LambdaSchedule::harmonic(0.8).unwrap());
        let traces = run_replicates(&c).unwrap();
        assert_eq!(traces.len(), 8);
        for (k, tr) in traces.iter().enumerate() {
            assert_eq!(tr.replicate, k as u64);
            assert_eq!(tr.records.len(), 20);
            assert_eq!(tr.records.last().unwrap().t, 200);
            assert_eq!(tr.checkpoints.iter().map(|s| s.t).collect::<Vec<_>>(), vec![10, 50, 200]);
            assert_eq!(tr.terminal.t, 200);
            assert_eq!(tr.terminal.counts.iter().sum::<u64>(), 200);
            assert_eq!(tr.lower_bound_violations, Some(0));
            assert!(tr.records.iter().all(|r| (0.0..=1.0).contains(&r.pi1)));
        }
    }

    #[test]
    fn deterministic_and_order_free() {
        let c = config(vec![0.7, 0.5, 0.3], LambdaSchedule::harmonic(0.9).unwrap());
        let a = run_replicates(&c).unwrap();
        let b = run_replicates(&c).unwrap();
        assert_eq!(a, b);
        // a lone replicate matches its slot in the batch
        let alone = run_replicate(&c, &c.sorted_checkpoints(), 5).unwrap();
        assert_eq!(alone, a[5]);
    }

    #[test]
    fn forced_winner_never_decreases() {
        let mut c = config(vec![1.0, 0.0], LambdaSchedule::harmonic(0.8).unwrap());
        c.replicates = 1;
        c.trace_stride = Some(1);
        let tr = &run_replicates(&c).unwrap()[0];
        let pi1: Vec<f64> = tr.records.iter().map(|r| r.pi1).collect();
        assert!(pi1.windows(2).all(|w| w[1] >= w[0]));
        assert!(pi1[0] > 0.5);
    }

    #[test]
    fn passage_times_consistent() {
        let mut c = config(vec![0.9, 0.1], LambdaSchedule::constant(0.05).unwrap());
        c.trace_stride = Some(1);
        c.epsilons = vec![0.3, 0.05];
        for tr in run_replicates(&c).unwrap() {
            for (k, eps) in c.epsilons.iter().enumerate() {
                let above: Vec<bool> = tr.records.iter().map(|r| r.pi1 > 1.0 - eps).collect();
                let first = above.iter().position(|&x| x).map(|i| i as u64 + 1);
                assert_eq!(tr.first_passage[k], first);
                let sustained = if *above.last().unwrap() {
                    let start = above.iter().rposition(|&x| !x).map_or(0, |i| i + 1);
                    Some(start as u64 + 1)
                } else {
                    None
                };
                assert_eq!(tr.sustained_passage[k], sustained);
            }
            assert!(tr.first_passage[0] <= tr.first_passage[1] || tr.first_passage[1].is_none());
        }
    }

    #[test]
    fn floor_formula() {
        assert!((pi_floor(0.8, 2, 1) - 0.4).abs() < 1e-15);
        assert!((pi_floor(0.8, 4, 2) - 0.25 * 0.8f64.powf(1.5)).abs() < 1e-15);
    }
}
