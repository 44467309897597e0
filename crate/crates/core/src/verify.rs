//! Self-checks of the series, integral, MGF and Hoeffding bounds.
//!
//! Each suite returns a list of [`Check`]s. `margin` is the slack between
//! the bound and the measured quantity, positive when the check passes.

use serde::{Deserialize, Serialize};

use crate::analysis::quadrature::stretched_exp_integral_by_quadrature;
use crate::analysis::{
    series_tail, stretched_exp_tail, upper_incomplete_gamma, zeta, zeta_envelope, MgfParams,
    SeriesParams,
};
use crate::environment::ActionEnvironment;
use crate::error::{Error, Result};
use crate::schedule::LambdaSchedule;
use crate::sim::estimators::{self, DEFAULT_MIN_BUCKET};
use crate::sim::{run_replicates, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

impl Check {
    fn new(suite: &str, name: String, margin: f64, detail: String) -> Self {
        Self {
            suite: suite.to_owned(),
            name,
            passed: margin >= 0.0,
            margin,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Series,
    Integral,
    Mgf,
    Hoeffding,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Series, Suite::Integral, Suite::Mgf, Suite::Hoeffding];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Series => "series",
            Suite::Integral => "integral",
            Suite::Mgf => "mgf",
            Suite::Hoeffding => "hoeffding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub a_grid: Vec<f64>,
    pub b_grid: Vec<f64>,
    /// The envelope is checked on `1..=t_max`, which is also the brute-force
    /// summation range.
    pub t_max: u64,
    pub tail_starts: Vec<u64>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        let grid = vec![0.1, 0.3, 0.5, 0.7, 0.9];
        Self {
            a_grid: grid.clone(),
            b_grid: grid,
            t_max: 1_000_000,
            tail_starts: vec![1, 10, 100],
        }
    }
}

/// `ζ(t) <= exp(-a t^{1-b})` on the whole range, and the tail bound covers
/// the brute-force sums `Σ_{t=T}^{t_max} ζ(t)` and `S(2T) - S(T)`.
pub fn series(opts: &SeriesOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &a in &opts.a_grid {
        for &b in &opts.b_grid {
            let params = SeriesParams::new(a, b)?;
            let mut worst_gap = f64::INFINITY;
            let mut worst_t = 1;
            let mut terms = Vec::with_capacity(opts.t_max as usize);
            for t in 1..=opts.t_max {
                let z = zeta(t, &params);
                let gap = zeta_envelope(t, &params) - z;
                if gap < worst_gap {
                    worst_gap = gap;
                    worst_t = t;
                }
                terms.push(z);
            }
            checks.push(Check::new(
                "series",
                format!("envelope a={a} b={b}"),
                worst_gap,
                format!("min envelope - zeta over 1..={} at t={worst_t}", opts.t_max),
            ));

            // suffix sums, added smallest first
            let mut suffix = vec![0.0; terms.len() + 1];
            for i in (0..terms.len()).rev() {
                suffix[i] = suffix[i + 1] + terms[i];
            }
            for &start in &opts.tail_starts {
                if start > opts.t_max {
                    continue;
                }
                let bound = series_tail(&params, start);
                let idx = (start - 1) as usize;
                let brute = suffix[idx];
                checks.push(Check::new(
                    "series",
                    format!("tail a={a} b={b} T={start}"),
                    bound - brute,
                    format!("bound {bound:.6e} vs sum to {} {brute:.6e}", opts.t_max),
                ));
                let end = (2 * start).min(opts.t_max) as usize;
                let block = suffix[idx] - suffix[end];
                checks.push(Check::new(
                    "series",
                    format!("block a={a} b={b} T={start}"),
                    bound - block,
                    format!("S(2T) - S(T) = {block:.6e}"),
                ));
            }
        }
    }
    Ok(checks)
}

pub const INTEGRAL_TOLERANCE: f64 = 1e-6;

/// `∫_1^∞ e^{-a t^c} dt = Γ(1/c; a) / (c a^{1/c})` against quadrature, and the
/// recurrence `Γ(s+1; x) = s Γ(s; x) + x^s e^{-x}`.
pub fn integral() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for a in [0.1, 0.5, 0.9] {
        for c in [0.2, 0.5, 0.8] {
            let closed = stretched_exp_tail(a, c, 1.0)?;
            let quad = stretched_exp_integral_by_quadrature(a, c, 1.0, 1e-10)?.value;
            let rel = ((closed - quad) / quad).abs();
            checks.push(Check::new(
                "integral",
                format!("identity a={a} c={c}"),
                INTEGRAL_TOLERANCE - rel,
                format!("closed {closed:.12e} quadrature {quad:.12e} rel {rel:.2e}"),
            ));
        }
    }
    let mut worst: f64 = 0.0;
    for s in [0.05, 0.3, 1.0, 1.7, 4.2, 12.5, 60.0] {
        for x in [0.0, 0.01, 0.5, 1.0, 2.5, 7.0, 20.0, 80.0] {
            let lhs = upper_incomplete_gamma(s + 1.0, x)?;
            let power = if x == 0.0 { 0.0 } else { (s * f64::ln(x) - x).exp() };
            let rhs = s * upper_incomplete_gamma(s, x)? + power;
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
    }
    checks.push(Check::new(
        "integral",
        "gamma recurrence".into(),
        1e-9 - worst,
        format!("max relative error {worst:.2e} on a 7x8 grid"),
    ));
    Ok(checks)
}

/// One Monte Carlo setting: pursuit with the harmonic schedule on `reward_probs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfSetting {
    pub theta: f64,
    pub reward_probs: Vec<f64>,
    /// Defaults to half the top-two gap.
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfOptions {
    pub settings: Vec<MgfSetting>,
    pub times: Vec<u64>,
    pub replicates: u64,
    pub seed: u64,
    /// Allowed excess of `ψ̂` over `φ`, in standard errors.
    pub sigmas: f64,
}

impl Default for MgfOptions {
    fn default() -> Self {
        Self {
            settings: vec![
                MgfSetting {
                    theta: 0.8,
                    reward_probs: vec![0.8, 0.4],
                    eta: None,
                },
                MgfSetting {
                    theta: 0.9,
                    reward_probs: vec![0.7, 0.5, 0.3],
                    eta: Some(0.5),
                },
            ],
            times: vec![10, 50, 100],
            replicates: 10_000,
            seed: 1,
            sigmas: 3.0,
        }
    }
}

fn harmonic_config(
    reward_probs: &[f64],
    theta: f64,
    times: &[u64],
    replicates: u64,
    seed: u64,
) -> Result<ExperimentConfig> {
    let env = ActionEnvironment::with_dominant_first(reward_probs.to_vec())?;
    let mut config = ExperimentConfig::new(env, LambdaSchedule::harmonic(theta)?);
    config.horizon = times.iter().copied().max().ok_or_else(|| {
        Error::Config("at least one checkpoint time is required".into())
    })?;
    config.checkpoints = times.to_vec();
    config.replicates = replicates;
    config.master_seed = seed;
    config.trace_stride = None;
    Ok(config)
}

/// `ψ̂_t(-h) <= φ_t(-h) + k SE` at each time and setting.
pub fn mgf(opts: &MgfOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for setting in &opts.settings {
        let config = harmonic_config(
            &setting.reward_probs,
            setting.theta,
            &opts.times,
            opts.replicates,
            opts.seed,
        )?;
        let eta = match setting.eta {
            Some(e) => e,
            None => crate::analysis::eta_from_gap(&config.environment)?,
        };
        let h = crate::analysis::hoeffding_h(eta)?;
        let params = MgfParams::new(setting.theta, 1.0 / config.environment.num_actions() as f64, h)?;
        let traces = run_replicates(&config)?;
        for &t in &opts.times {
            let psi = estimators::mgf(&traces, t, -h)?;
            let phi = params.phi(t);
            checks.push(Check::new(
                "mgf",
                format!("theta={} eta={eta} t={t}", setting.theta),
                phi + opts.sigmas * psi.stderr - psi.mean,
                format!("psi {:.6e} (se {:.2e}) phi {phi:.6e}", psi.mean, psi.stderr),
            ));
        }
    }
    Ok(checks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingOptions {
    pub reward_probs: Vec<f64>,
    pub theta: f64,
    pub eta: f64,
    /// The time at which `N₁` and `d̂₁` are read.
    pub time: u64,
    pub buckets: Vec<(u64, u64)>,
    pub replicates: u64,
    pub seed: u64,
    pub min_samples: usize,
    pub sigmas: f64,
}

impl Default for HoeffdingOptions {
    fn default() -> Self {
        Self {
            reward_probs: vec![0.8, 0.4],
            theta: 0.8,
            eta: 0.2,
            time: 60,
            buckets: vec![(20, 40), (41, 50), (51, 60)],
            replicates: 10_000,
            seed: 2,
            min_samples: DEFAULT_MIN_BUCKET,
            sigmas: 3.0,
        }
    }
}

/// Conditional deviation frequencies stay below `e^{-h n}` per bucket and do
/// not increase from one bucket to the next beyond sampling noise.
pub fn hoeffding(opts: &HoeffdingOptions) -> Result<Vec<Check>> {
    let config = harmonic_config(
        &opts.reward_probs,
        opts.theta,
        &[opts.time],
        opts.replicates,
        opts.seed,
    )?;
    let traces = run_replicates(&config)?;
    let mut checks = Vec::new();
    let mut previous: Option<estimators::HoeffdingEstimate> = None;
    for &bucket in &opts.buckets {
        let est = match estimators::hoeffding(&traces, opts.eta, bucket, opts.time, opts.min_samples) {
            Ok(est) => est,
            Err(Error::InsufficientSamples { found, required }) => {
                checks.push(Check {
                    suite: "hoeffding".into(),
                    name: format!("bucket {}..={}", bucket.0, bucket.1),
                    passed: true,
                    margin: f64::NAN,
                    detail: format!("skipped: {found} samples, {required} required"),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let p = est.deviation;
        checks.push(Check::new(
            "hoeffding",
            format!("bucket {}..={}", bucket.0, bucket.1),
            est.bound + opts.sigmas * p.stderr - p.p_hat,
            format!(
                "p_hat {:.4} (se {:.4}, n {}) bound {:.4}",
                p.p_hat, p.stderr, p.trials, est.bound
            ),
        ));
        if let Some(prev) = previous {
            let q = prev.deviation;
            let se = (p.stderr.powi(2) + q.stderr.powi(2)).sqrt();
            checks.push(Check::new(
                "hoeffding",
                format!("trend {}..={} -> {}..={}", prev.bucket.0, prev.bucket.1, bucket.0, bucket.1),
                q.p_hat + opts.sigmas * se - p.p_hat,
                format!("{:.4} -> {:.4}", q.p_hat, p.p_hat),
            ));
        }
        previous = Some(est);
    }
    Ok(checks)
}

/// Runs the selected suites with default options.
pub fn run_suites(suites: &[Suite]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for suite in suites {
        out.extend(match suite {
            Suite::Series => series(&SeriesOptions::default())?,
            Suite::Integral => integral()?,
            Suite::Mgf => mgf(&MgfOptions::default())?,
            Suite::Hoeffding => hoeffding(&HoeffdingOptions::default())?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_series_grid_passes() {
        let opts = SeriesOptions {
            a_grid: vec![0.5, 0.9],
            b_grid: vec![0.5],
            t_max: 10_000,
            tail_starts: vec![1, 10],
        };
        let checks = series(&opts).unwrap();
        assert_eq!(checks.len(), 2 * (1 + 2 * 2));
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
    }

    #[test]
    fn integral_suite_passes() {
        let checks = integral().unwrap();
        assert_eq!(checks.len(), 10);
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
    }

    #[test]
    fn small_mgf_run_passes() {
        let opts = MgfOptions {
            replicates: 500,
            ..MgfOptions::default()
        };
        let checks = mgf(&opts).unwrap();
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
    }

    #[test]
    fn sparse_buckets_are_skipped() {
        let opts = HoeffdingOptions {
            replicates: 200,
            buckets: vec![(0, 0), (20, 60)],
            ..HoeffdingOptions::default()
        };
        let checks = hoeffding(&opts).unwrap();
        assert!(checks[0].detail.starts_with("skipped"));
        assert!(checks.iter().all(|c| c.passed));
    }
}
