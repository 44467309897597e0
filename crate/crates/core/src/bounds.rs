//! Deterministic iteration bound `T* = T₃* + T₄*`.
//!
//! `T₄*` is the smallest `T` whose rigorous tail bound on `Σ_{t≥T} φ_t(-h)`
//! drops to `δ`. `T₃*` is the number of further iterations after which a path
//! whose estimates stay correctly ordered has `1 - π₁ ≤ ε`: on such a path
//! `1 - π₁(T₄* + t) = (1 - π₁(T₄*)) θ^{γ(T₄* + t) - γ(T₄*)}`, so `T₃*` is the
//! smallest integer with `θ^{γ(T₄* + T₃* + 1) - γ(T₄*)} ≤ ε`.
//!
//! Both searches bracket exponentially and then bisect on a monotone
//! predicate, so the cost is logarithmic in the answer.

use serde::{Deserialize, Serialize};

use crate::analysis::{harmonic_diff, hoeffding_h, phi_tail, MgfParams};
use crate::error::{check_open_unit, Error, Result};
use crate::schedule::check_theta;

pub const DEFAULT_CEILING: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoeffdingExponent {
    /// Half-gap `η`, giving `h = η²/8`.
    Eta(f64),
    /// `h` given directly.
    H(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub epsilon: f64,
    pub delta: f64,
    pub theta: f64,
    pub actions: usize,
    pub exponent: HoeffdingExponent,
    pub ceiling: u64,
}

impl BoundSpec {
    pub fn new(epsilon: f64, delta: f64, theta: f64, actions: usize, eta: f64) -> Result<Self> {
        Self {
            epsilon,
            delta,
            theta,
            actions,
            exponent: HoeffdingExponent::Eta(eta),
            ceiling: DEFAULT_CEILING,
        }
        .validated()
    }

    pub fn with_h(epsilon: f64, delta: f64, theta: f64, actions: usize, h: f64) -> Result<Self> {
        Self {
            epsilon,
            delta,
            theta,
            actions,
            exponent: HoeffdingExponent::H(h),
            ceiling: DEFAULT_CEILING,
        }
        .validated()
    }

    pub fn with_ceiling(mut self, ceiling: u64) -> Self {
        self.ceiling = ceiling.max(1);
        self
    }

    pub fn validated(self) -> Result<Self> {
        check_open_unit("epsilon", self.epsilon)?;
        check_open_unit("delta", self.delta)?;
        check_theta(self.theta)?;
        if self.actions < 2 {
            return Err(Error::TooFewActions(self.actions));
        }
        match self.exponent {
            HoeffdingExponent::Eta(eta) => {
                hoeffding_h(eta)?;
            }
            HoeffdingExponent::H(h) => {
                if !(h > 0.0) || !h.is_finite() {
                    return Err(Error::Domain {
                        name: "h",
                        value: h,
                        domain: "(0, inf)",
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn h(&self) -> f64 {
        match self.exponent {
            HoeffdingExponent::Eta(eta) => eta * eta / 8.0,
            HoeffdingExponent::H(h) => h,
        }
    }

    /// `π₁(0) = 1/r`
    pub fn pi1_0(&self) -> f64 {
        1.0 / self.actions as f64
    }

    pub fn mgf_params(&self) -> MgfParams {
        MgfParams::new(self.theta, self.pi1_0(), self.h()).expect("validated spec")
    }

    /// Upper bound on `Σ_{t≥T} φ_t(-h)`.
    pub fn tail(&self, from: u64) -> f64 {
        phi_tail(&self.mgf_params(), from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub h: f64,
    /// `π₁(0) (1 - e^{-h})`
    pub a: f64,
    /// `(1 + ln θ)^{-1}`
    pub b: f64,
    /// Coefficient `aθ` of the envelope `exp(-aθ t^{1/b})` used for the tail.
    pub envelope_coefficient: f64,
    pub t4: u64,
    pub t3: u64,
    pub t_star: u64,
    pub tail_at_t4: f64,
}

/// Smallest `n >= 0` with `pred(n)`, for a predicate that is monotone
/// (false...false true...true). Fails if no `n <= ceiling` qualifies.
fn first_true<P: Fn(u64) -> bool>(
    start: u64,
    ceiling: u64,
    quantity: &'static str,
    pred: P,
) -> Result<u64> {
    if pred(start) {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = start.max(1);
    loop {
        hi = hi.saturating_mul(2).min(ceiling);
        if pred(hi) {
            break;
        }
        if hi >= ceiling {
            return Err(Error::CeilingExceeded { quantity, ceiling });
        }
        lo = hi;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest `T >= 1` with `tail(T) <= δ`.
pub fn solve_t4(spec: &BoundSpec) -> Result<u64> {
    let params = spec.mgf_params();
    first_true(1, spec.ceiling, "T4", |t| phi_tail(&params, t) <= spec.delta)
}

/// Smallest `T₃ >= 0` with `γ(T₄ + T₃ + 1) - γ(T₄) >= ln ε / ln θ`.
pub fn solve_t3(spec: &BoundSpec, t4: u64) -> Result<u64> {
    let needed = spec.epsilon.ln() / spec.theta.ln();
    first_true(0, spec.ceiling, "T3", |n| {
        harmonic_diff(t4, t4 + n + 1) >= needed
    })
}

pub fn compute_bound(spec: &BoundSpec) -> Result<BoundResult> {
    let spec = spec.validated()?;
    let params = spec.mgf_params();
    let t4 = solve_t4(&spec)?;
    let t3 = solve_t3(&spec, t4)?;
    Ok(BoundResult {
        h: spec.h(),
        a: params.a(),
        b: 1.0 / params.envelope_exponent(),
        envelope_coefficient: params.envelope_coefficient(),
        t4,
        t3,
        t_star: t3 + t4,
        tail_at_t4: phi_tail(&params, t4),
    })
}
