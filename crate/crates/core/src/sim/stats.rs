//! Binomial proportions and the normal-approximation tests used on them.

use serde::{Deserialize, Serialize};

/// Upper 1% point of the standard normal.
pub const Z_99: f64 = 2.326_347_874_040_841;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / trials)`
    pub stderr: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        assert!(successes <= trials, "more successes than trials");
        let (p_hat, stderr) = if trials == 0 {
            (0.0, 0.0)
        } else {
            let n = trials as f64;
            let p = successes as f64 / n;
            (p, (p * (1.0 - p) / n).sqrt())
        };
        Self {
            successes,
            trials,
            p_hat,
            stderr,
        }
    }

    pub fn from_flags<I: IntoIterator<Item = bool>>(flags: I) -> Self {
        let (hits, total) = flags
            .into_iter()
            .fold((0u64, 0u64), |(h, n), f| (h + u64::from(f), n + 1));
        Self::new(hits, total)
    }

    /// Wilson score lower bound at normal quantile `z`.
    pub fn wilson_lower(&self, z: f64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let n = self.trials as f64;
        let p = self.p_hat;
        let z2 = z * z;
        let center = p + z2 / (2.0 * n);
        let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ((center - spread) / (1.0 + z2 / n)).max(0.0)
    }

    /// Score statistic for `H0: p = p0`, using the null variance.
    pub fn z_against(&self, p0: f64) -> f64 {
        let n = self.trials as f64;
        (self.p_hat - p0) / (p0 * (1.0 - p0) / n).sqrt()
    }
}

/// Pooled two-proportion statistic for `H1: p_a > p_b`. Zero when both
/// samples are all failures or all successes.
pub fn two_proportion_z(a: &Proportion, b: &Proportion) -> f64 {
    let (na, nb) = (a.trials as f64, b.trials as f64);
    let pooled = (a.successes + b.successes) as f64 / (na + nb);
    let var = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);
    if var <= 0.0 {
        return 0.0;
    }
    (a.p_hat - b.p_hat) / var.sqrt()
}

/// Sample mean with standard error. The values are summed in sorted order so
/// the result does not depend on the order replicates arrive in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl MeanEstimate {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                stderr: 0.0,
                samples: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            samples: n as u64,
        }
    }
}

/// Nearest-rank percentile of possibly censored values (`None` ranks above
/// every finite value). Returns `None` if the rank lands on a censored value.
pub fn censored_percentile(values: &[Option<u64>], q: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut finite: Vec<u64> = values.iter().flatten().copied().collect();
    finite.sort_unstable();
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    finite.get(rank - 1).copied()
}
