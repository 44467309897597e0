//! Tuning-parameter schedules `t -> lambda_t`.
//!
//! Besides a constant step, three vanishing families are provided, all of the
//! form `lambda_t = 1 - theta^{v(t)}` with `theta` in `(1/e, 1)`:
//!
//! * harmonic: `v(t) = 1/t`
//! * cutoff: `v(t) = 1 / (1 + (t - t0)^+)`, constant until `t0`, harmonic after
//! * general: `v(t) = t^(-p)` with `p` in `(0, 1]`, vanishing more slowly
//!
//! `1 - theta^v` is evaluated as `-expm1(v ln theta)` so that tiny steps at
//! large `t` keep full relative precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};

/// Lower end of the admissible `theta` range, `1/e`.
pub fn theta_floor() -> f64 {
    (-1.0f64).exp()
}

pub fn check_theta(theta: f64) -> Result<f64> {
    if theta > theta_floor() && theta < 1.0 {
        Ok(theta)
    } else {
        Err(Error::Domain {
            name: "theta",
            value: theta,
            domain: "(1/e, 1)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSchedule {
    Constant { lambda: f64 },
    HarmonicTheta { theta: f64 },
    CutoffTheta { theta: f64, cutoff: u64 },
    GeneralTheta { theta: f64, decay: f64 },
}

impl LambdaSchedule {
    pub fn constant(lambda: f64) -> Result<Self> {
        check_open_unit("lambda", lambda)?;
        Ok(Self::Constant { lambda })
    }

    pub fn harmonic(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self::HarmonicTheta { theta })
    }

    pub fn cutoff(theta: f64, cutoff: u64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self::CutoffTheta { theta, cutoff })
    }

    /// `v(t) = t^(-decay)`; `decay = 1` coincides with [`Self::harmonic`].
    pub fn general(theta: f64, decay: f64) -> Result<Self> {
        check_theta(theta)?;
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::Domain {
                name: "decay",
                value: decay,
                domain: "(0, 1]",
            });
        }
        Ok(Self::GeneralTheta { theta, decay })
    }

    /// Re-runs the constructor checks, for values built from the public variants.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant { lambda } => Self::constant(lambda),
            Self::HarmonicTheta { theta } => Self::harmonic(theta),
            Self::CutoffTheta { theta, cutoff } => Self::cutoff(theta, cutoff),
            Self::GeneralTheta { theta, decay } => Self::general(theta, decay),
        }
        .map(|_| ())
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            Self::Constant { .. } => None,
            Self::HarmonicTheta { theta }
            | Self::CutoffTheta { theta, .. }
            | Self::GeneralTheta { theta, .. } => Some(theta),
        }
    }

    /// `lambda_t` for `t >= 1`.
    pub fn lambda_at(&self, t: u64) -> f64 {
        debug_assert!(t >= 1, "schedules start at t = 1");
        let t = t.max(1);
        match *self {
            Self::Constant { lambda } => lambda,
            Self::HarmonicTheta { theta } => one_minus_pow(theta, 1.0 / t as f64),
            Self::CutoffTheta { theta, cutoff } => {
                let shifted = 1 + t.saturating_sub(cutoff);
                one_minus_pow(theta, 1.0 / shifted as f64)
            }
            Self::GeneralTheta { theta, decay } => {
                one_minus_pow(theta, (t as f64).powf(-decay))
            }
        }
    }
}

fn one_minus_pow(theta: f64, exponent: f64) -> f64 {
    -(exponent * theta.ln()).exp_m1()
}

/// `constant:L`, `harmonic:THETA`, `cutoff:THETA:T0`, `general:THETA:P`.
impl FromStr for LambdaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Config(format!("schedule '{s}' is missing a field")))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("schedule '{s}': {e}")))
        };
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "schedule '{s}' expects {} parameter(s)",
                    n - 1
                )))
            }
        };
        match parts[0] {
            "constant" => {
                arity(2)?;
                Self::constant(num(1)?)
            }
            "harmonic" => {
                arity(2)?;
                Self::harmonic(num(1)?)
            }
            "cutoff" => {
                arity(3)?;
                let t0 = parts[2]
                    .parse::<u64>()
                    .map_err(|e| Error::Config(format!("schedule '{s}': {e}")))?;
                Self::cutoff(num(1)?, t0)
            }
            "general" => {
                arity(3)?;
                Self::general(num(1)?, num(2)?)
            }
            other => Err(Error::Config(format!(
                "unknown schedule kind '{other}' (expected constant, harmonic, cutoff or general)"
            ))),
        }
    }
}

impl fmt::Display for LambdaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { lambda } => write!(f, "constant:{lambda}"),
            Self::HarmonicTheta { theta } => write!(f, "harmonic:{theta}"),
            Self::CutoffTheta { theta, cutoff } => write!(f, "cutoff:{theta}:{cutoff}"),
            Self::GeneralTheta { theta, decay } => write!(f, "general:{theta}:{decay}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn harmonic_values() {
        // the formula itself is defined for any theta; the constructor is not
        assert!(LambdaSchedule::harmonic(0.25).is_err());
        let s = LambdaSchedule::HarmonicTheta { theta: 0.25 };
        assert!((s.lambda_at(2) - 0.5).abs() < 1e-15);
        let s = LambdaSchedule::harmonic(0.8).unwrap();
        assert!((s.lambda_at(1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn cutoff_is_flat_before_t0() {
        let s = LambdaSchedule::cutoff(0.5, 10).unwrap();
        for t in 1..=10 {
            assert!((s.lambda_at(t) - 0.5).abs() < 1e-15);
        }
        // t = 12: 1 - 0.5^(1/3)
        assert!((s.lambda_at(12) - (1.0 - 0.5f64.powf(1.0 / 3.0))).abs() < 1e-15);
        assert!((s.lambda_at(7) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_is_constant() {
        let s = LambdaSchedule::constant(0.01).unwrap();
        assert_eq!(s.lambda_at(1), 0.01);
        assert_eq!(s.lambda_at(1_000_000), 0.01);
    }

    #[test]
    fn general_with_unit_decay_is_harmonic() {
        let g = LambdaSchedule::general(0.7, 1.0).unwrap();
        let h = LambdaSchedule::harmonic(0.7).unwrap();
        for t in [1, 2, 17, 1000] {
            assert!((g.lambda_at(t) - h.lambda_at(t)).abs() < 1e-16);
        }
        // slower decay gives a larger step
        let slow = LambdaSchedule::general(0.7, 0.5).unwrap();
        assert!(slow.lambda_at(100) > h.lambda_at(100));
    }

    #[test]
    fn domain_checks() {
        assert!(LambdaSchedule::harmonic(0.3).is_err());
        assert!(LambdaSchedule::harmonic(theta_floor()).is_err());
        assert!(LambdaSchedule::harmonic(1.0).is_err());
        assert!(LambdaSchedule::constant(0.0).is_err());
        assert!(LambdaSchedule::constant(1.0).is_err());
        assert!(LambdaSchedule::general(0.8, 0.0).is_err());
        assert!(LambdaSchedule::general(0.8, 1.5).is_err());
        assert!(LambdaSchedule::HarmonicTheta { theta: 0.2 }.validate().is_err());
    }

    #[test]
    fn parse_and_display() {
        for text in ["constant:0.5", "harmonic:0.8", "cutoff:0.8:100", "general:0.9:0.5"] {
            let s: LambdaSchedule = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("harmonic".parse::<LambdaSchedule>().is_err());
        assert!("harmonic:0.2".parse::<LambdaSchedule>().is_err());
        assert!("zigzag:0.5".parse::<LambdaSchedule>().is_err());
        assert!("cutoff:0.8:x".parse::<LambdaSchedule>().is_err());
    }

    proptest! {
        #[test]
        fn every_lambda_is_in_open_unit_interval(
            theta in 0.3679f64..0.9999,
            decay in 0.01f64..=1.0,
            cutoff in 0u64..1000,
            t in 1u64..10_000_000,
        ) {
            for s in [
                LambdaSchedule::harmonic(theta).unwrap(),
                LambdaSchedule::cutoff(theta, cutoff).unwrap(),
                LambdaSchedule::general(theta, decay).unwrap(),
            ] {
                let l = s.lambda_at(t);
                prop_assert!(l > 0.0 && l < 1.0, "{s} at {t}: {l}");
            }
        }
    }
}
