//! Estimators over a set of replicate traces.
//!
//! Every estimator reads the snapshot stored at a checkpoint and fails with
//! [`Error::CheckpointMissing`] if any trace lacks it. Aggregation only counts
//! or sums in sorted order, so results are invariant under reordering the
//! traces.

use serde::{Deserialize, Serialize};

use super::stats::{censored_percentile, MeanEstimate, Proportion};
use crate::error::{Error, Result};
use crate::trace::{Snapshot, Trace};

pub const DEFAULT_MIN_BUCKET: usize = 100;

fn snapshots(traces: &[Trace], t: u64) -> Result<Vec<&Snapshot>> {
    if traces.is_empty() {
        return Err(Error::NoReplicates);
    }
    traces
        .iter()
        .map(|tr| tr.snapshot_at(t).ok_or(Error::CheckpointMissing(t)))
        .collect()
}

/// `P̂{π₁(t) > 1 - ε}`.
pub fn eps_optimality(traces: &[Trace], epsilon: f64, t: u64) -> Result<Proportion> {
    let snaps = snapshots(traces, t)?;
    Ok(Proportion::from_flags(
        snaps.iter().map(|s| s.pi[0] > 1.0 - epsilon),
    ))
}

/// `max_i P̂{N_i(t) <= K}`.
pub fn counts_divergence(traces: &[Trace], k: u64, t: u64) -> Result<Proportion> {
    let snaps = snapshots(traces, t)?;
    let r = snaps[0].counts.len();
    Ok((0..r)
        .map(|i| Proportion::from_flags(snaps.iter().map(|s| s.counts[i] <= k)))
        .max_by(|a, b| a.successes.cmp(&b.successes))
        .expect("at least two actions"))
}

/// `max_i P̂{|d̂_i(t) - d_i| > η}`.
pub fn estimate_accuracy(traces: &[Trace], eta: f64, t: u64) -> Result<Proportion> {
    let snaps = snapshots(traces, t)?;
    let r = snaps[0].d_hat.len();
    Ok((0..r)
        .map(|i| {
            Proportion::from_flags(
                snaps
                    .iter()
                    .zip(traces)
                    .map(|(s, tr)| (s.d_hat[i] - tr.reward_probs[i]).abs() > eta),
            )
        })
        .max_by(|a, b| a.successes.cmp(&b.successes))
        .expect("at least two actions"))
}

/// `P̂{B(t)} = P̂{|d̂₁(t) - d₁| < η}`.
pub fn event_b(traces: &[Trace], eta: f64, t: u64) -> Result<Proportion> {
    let snaps = snapshots(traces, t)?;
    Ok(Proportion::from_flags(
        snaps
            .iter()
            .zip(traces)
            .map(|(s, tr)| (s.d_hat[0] - tr.reward_probs[0]).abs() < eta),
    ))
}

/// `ψ̂_t(u)`, the sample mean of `e^{u N₁(t)}` for `u <= 0`.
pub fn mgf(traces: &[Trace], t: u64, u: f64) -> Result<MeanEstimate> {
    if !(u <= 0.0) {
        return Err(Error::Domain {
            name: "u",
            value: u,
            domain: "(-inf, 0]",
        });
    }
    let snaps = snapshots(traces, t)?;
    Ok(MeanEstimate::from_values(
        snaps.iter().map(|s| (u * s.counts[0] as f64).exp()).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingEstimate {
    /// Inclusive range of `N₁(t)` conditioned on.
    pub bucket: (u64, u64),
    pub deviation: Proportion,
    /// `e^{-h n}` at the bucket's lower edge, the largest bound in the bucket.
    pub bound: f64,
}

/// `P̂{|d̂₁(t) - d₁| >= η | N₁(t) in [lo, hi]}` against `e^{-h lo}`.
pub fn hoeffding(
    traces: &[Trace],
    eta: f64,
    bucket: (u64, u64),
    t: u64,
    min_samples: usize,
) -> Result<HoeffdingEstimate> {
    let snaps = snapshots(traces, t)?;
    let (lo, hi) = bucket;
    let deviation = Proportion::from_flags(
        snaps
            .iter()
            .zip(traces)
            .filter(|(s, _)| (lo..=hi).contains(&s.counts[0]))
            .map(|(s, tr)| (s.d_hat[0] - tr.reward_probs[0]).abs() >= eta),
    );
    if (deviation.trials as usize) < min_samples {
        return Err(Error::InsufficientSamples {
            found: deviation.trials as usize,
            required: min_samples,
        });
    }
    Ok(HoeffdingEstimate {
        bucket,
        deviation,
        bound: (-eta * eta / 8.0 * lo as f64).exp(),
    })
}

/// Fraction of replicates whose terminal `π` puts more than `1 - ε` on an
/// action other than `dominant`.
pub fn wrong_lock(traces: &[Trace], epsilon: f64, dominant: usize) -> Result<Proportion> {
    if traces.is_empty() {
        return Err(Error::NoReplicates);
    }
    Ok(Proportion::from_flags(traces.iter().map(|tr| {
        tr.terminal
            .pi
            .iter()
            .enumerate()
            .any(|(i, &p)| i != dominant && p > 1.0 - epsilon)
    })))
}

/// Nearest-rank percentile of the first passage above `1 - ε_k`, where `k`
/// indexes the configured epsilons; `sustained` selects the final-entry time.
/// Runs that never pass count as infinite.
pub fn passage_percentile(traces: &[Trace], k: usize, q: f64, sustained: bool) -> Option<u64> {
    let times: Vec<Option<u64>> = traces
        .iter()
        .map(|tr| {
            if sustained {
                tr.sustained_passage[k]
            } else {
                tr.first_passage[k]
            }
        })
        .collect();
    censored_percentile(&times, q)
}

/// Total floor violations across traces, `None` if the floor was not tracked.
pub fn lower_bound_violations(traces: &[Trace]) -> Option<u64> {
    traces
        .iter()
        .map(|tr| tr.lower_bound_violations)
        .sum::<Option<u64>>()
}
