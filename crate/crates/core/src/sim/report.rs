use serde::{Deserialize, Serialize};

use super::estimators::{
    event_b, eps_optimality, lower_bound_violations, mgf, passage_percentile, wrong_lock,
};
use super::stats::{two_proportion_z, MeanEstimate, Proportion};
use super::{run_replicates, ExperimentConfig};
use crate::analysis::{eta_from_gap, MgfParams};
use crate::automaton::Algorithm;
use crate::error::{Error, Result};
use crate::schedule::LambdaSchedule;
use crate::trace::Trace;

/// Spread of `min_i N_i(t)` across replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSummary {
    pub min: u64,
    pub median: u64,
    pub max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub optimality: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEstimates {
    pub t: u64,
    pub optimality: Vec<EpsilonEstimate>,
    pub min_count: CountSummary,
    /// `P̂{|d̂₁(t) - d₁| < η}`, when `η` is known.
    pub event_b: Option<Proportion>,
    /// `ψ̂_t(-h)`, when `h` is known.
    pub psi: Option<MeanEstimate>,
    /// `φ_t(-h)`, reported for pursuit under the harmonic schedule only.
    pub phi_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub epsilon: f64,
    /// Replicates whose `π₁` exceeded `1 - ε` at some iteration.
    pub reached: Proportion,
    pub p50: Option<u64>,
    pub p95: Option<u64>,
    pub sustained_p50: Option<u64>,
    pub sustained_p95: Option<u64>,
    /// Locked above `1 - ε` on a suboptimal action at the horizon. `None`
    /// when the environment has no unique best action.
    pub wrong_lock: Option<Proportion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub replicates: u64,
    pub horizon: u64,
    pub eta: Option<f64>,
    pub h: Option<f64>,
    pub checkpoints: Vec<CheckpointEstimates>,
    pub convergence: Vec<ConvergenceSummary>,
    pub lower_bound_violations: Option<u64>,
}

/// Aggregates the traces of one experiment. The horizon is always included
/// among the checkpoints.
pub fn build_report(config: &ExperimentConfig, traces: &[Trace]) -> Result<EstimateReport> {
    if traces.is_empty() {
        return Err(Error::NoReplicates);
    }
    let env = &config.environment;
    let eta = config.eta.or_else(|| eta_from_gap(env).ok());
    let h = eta.map(|e| e * e / 8.0);
    let mgf_params = match (config.algorithm, config.schedule, h) {
        (Algorithm::Pursuit, LambdaSchedule::HarmonicTheta { theta }, Some(h)) if h > 0.0 => {
            Some(MgfParams::new(theta, 1.0 / env.num_actions() as f64, h)?)
        }
        _ => None,
    };

    let mut times = config.sorted_checkpoints();
    if times.last() != Some(&config.horizon) {
        times.push(config.horizon);
    }

    let checkpoints = times
        .iter()
        .map(|&t| {
            let optimality = config
                .epsilons
                .iter()
                .map(|&epsilon| {
                    Ok(EpsilonEstimate {
                        epsilon,
                        optimality: eps_optimality(traces, epsilon, t)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CheckpointEstimates {
                t,
                optimality,
                min_count: min_count_summary(traces, t)?,
                event_b: eta.map(|e| event_b(traces, e, t)).transpose()?,
                psi: h.map(|h| mgf(traces, t, -h)).transpose()?,
                phi_bound: mgf_params.map(|p| p.phi(t)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let dominant = env.dominant();
    let convergence = config
        .epsilons
        .iter()
        .enumerate()
        .map(|(k, &epsilon)| {
            Ok(ConvergenceSummary {
                epsilon,
                reached: Proportion::from_flags(traces.iter().map(|tr| tr.first_passage[k].is_some())),
                p50: passage_percentile(traces, k, 0.5, false),
                p95: passage_percentile(traces, k, 0.95, false),
                sustained_p50: passage_percentile(traces, k, 0.5, true),
                sustained_p95: passage_percentile(traces, k, 0.95, true),
                wrong_lock: dominant.map(|d| wrong_lock(traces, epsilon, d)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EstimateReport {
        replicates: traces.len() as u64,
        horizon: config.horizon,
        eta,
        h,
        checkpoints,
        convergence,
        lower_bound_violations: lower_bound_violations(traces),
    })
}

fn min_count_summary(traces: &[Trace], t: u64) -> Result<CountSummary> {
    let mut mins = traces
        .iter()
        .map(|tr| {
            tr.snapshot_at(t)
                .map(|s| s.counts.iter().copied().min().unwrap_or(0))
                .ok_or(Error::CheckpointMissing(t))
        })
        .collect::<Result<Vec<_>>>()?;
    mins.sort_unstable();
    Ok(CountSummary {
        min: mins[0],
        median: mins[(mins.len() - 1) / 2],
        max: mins[mins.len() - 1],
    })
}

/// Two schedules run on the same environment and the same replicate seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub schedules: [LambdaSchedule; 2],
    pub reports: [EstimateReport; 2],
    /// Per epsilon, the pooled statistic for "first schedule locks on a
    /// suboptimal action more often than the second".
    pub wrong_lock_z: Vec<Option<f64>>,
}

/// Runs `base` once under each schedule. Per-iteration records are not kept.
pub fn gap_demo(
    base: &ExperimentConfig,
    first: LambdaSchedule,
    second: LambdaSchedule,
) -> Result<GapReport> {
    let run = |schedule| {
        let config = ExperimentConfig {
            schedule,
            trace_stride: None,
            ..base.clone()
        };
        let traces = run_replicates(&config)?;
        build_report(&config, &traces)
    };
    let a = run(first)?;
    let b = run(second)?;
    let wrong_lock_z = a
        .convergence
        .iter()
        .zip(&b.convergence)
        .map(|(x, y)| match (x.wrong_lock, y.wrong_lock) {
            (Some(p), Some(q)) => Some(two_proportion_z(&p, &q)),
            _ => None,
        })
        .collect();
    Ok(GapReport {
        schedules: [first, second],
        reports: [a, b],
        wrong_lock_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::ActionEnvironment;

    fn config() -> ExperimentConfig {
        let env = ActionEnvironment::new(vec![0.8, 0.4]).unwrap();
        let mut c = ExperimentConfig::new(env, LambdaSchedule::harmonic(0.8).unwrap());
        c.horizon = 300;
        c.replicates = 64;
        c.master_seed = 5;
        c.epsilons = vec![0.3, 0.05];
        c.checkpoints = vec![10, 100];
        c
    }

    #[test]
    fn report_shape_and_ranges() {
        let c = config();
        let traces = run_replicates(&c).unwrap();
        let rep = build_report(&c, &traces).unwrap();
        assert_eq!(rep.checkpoints.iter().map(|r| r.t).collect::<Vec<_>>(), vec![10, 100, 300]);
        assert_eq!(rep.eta, Some(0.2));
        assert!((rep.h.unwrap() - 0.005).abs() < 1e-18);
        for row in &rep.checkpoints {
            let [loose, tight] = [row.optimality[0].optimality, row.optimality[1].optimality];
            assert!(tight.p_hat <= loose.p_hat);
            for p in [loose, tight, row.event_b.unwrap()] {
                assert!((0.0..=1.0).contains(&p.p_hat));
                assert!((p.stderr - (p.p_hat * (1.0 - p.p_hat) / 64.0).sqrt()).abs() < 1e-15);
            }
            let psi = row.psi.unwrap().mean;
            assert!(psi > 0.0 && psi <= 1.0);
            assert!(row.phi_bound.unwrap() > 0.0);
            assert!(row.min_count.min <= row.min_count.median);
            assert!(row.min_count.median <= row.min_count.max);
        }
        assert_eq!(rep.lower_bound_violations, Some(0));
        assert_eq!(rep, build_report(&c, &traces).unwrap());
    }

    #[test]
    fn phi_only_for_harmonic_pursuit() {
        let mut c = config();
        c.schedule = LambdaSchedule::constant(0.1).unwrap();
        let traces = run_replicates(&c).unwrap();
        let rep = build_report(&c, &traces).unwrap();
        assert!(rep.checkpoints.iter().all(|r| r.phi_bound.is_none() && r.psi.is_some()));
        assert_eq!(rep.lower_bound_violations, None);
    }

    #[test]
    fn tied_environment_has_no_eta() {
        let mut c = config();
        c.environment = ActionEnvironment::new(vec![0.5, 0.5]).unwrap();
        let traces = run_replicates(&c).unwrap();
        let rep = build_report(&c, &traces).unwrap();
        assert_eq!(rep.eta, None);
        assert!(rep.convergence.iter().all(|s| s.wrong_lock.is_none()));
    }

    #[test]
    fn identical_schedules_give_identical_sides() {
        let c = config();
        let s = LambdaSchedule::constant(0.3).unwrap();
        let gap = gap_demo(&c, s, s).unwrap();
        assert_eq!(gap.reports[0], gap.reports[1]);
        assert!(gap.wrong_lock_z.iter().all(|z| *z == Some(0.0)));
    }

    #[test]
    fn tiny_constant_step_never_locks() {
        let mut c = config();
        c.horizon = 50;
        c.checkpoints = vec![50];
        let tiny = LambdaSchedule::constant(1e-6).unwrap();
        let gap = gap_demo(&c, tiny, tiny).unwrap();
        for s in &gap.reports[0].convergence {
            assert_eq!(s.wrong_lock.unwrap().successes, 0);
            assert_eq!(s.reached.successes, 0);
        }
    }
}
