//! Deterministic mathematics behind the convergence argument: harmonic sums,
//! the sequence `ζ(t) = (1 - a/t^b)^t` and its envelope, the dominating
//! binomial MGF `φ_t`, the Hoeffding exponent, and rigorous tail bounds.
//!
//! Both tail bounds follow the same pattern. For a sequence `f` dominated by a
//! decreasing envelope `g(t) = exp(-k t^c)`,
//!
//! ```text
//! Σ_{t≥T} f(t) ≤ f(T) + Σ_{t>T} g(t) ≤ f(T) + ∫_T^∞ g(t) dt
//!              = f(T) + Γ(1/c; k T^c) / (c k^{1/c})
//! ```

pub mod gamma;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::environment::ActionEnvironment;
use crate::error::{check_open_unit, Error, Result};
use crate::schedule::check_theta;

pub use gamma::{ln_gamma, ln_upper_incomplete_gamma, upper_incomplete_gamma};

/// Below this the harmonic sum is added up term by term.
const ASYMPTOTIC_FROM: u64 = 64;
/// Harmonic differences spanning at most this many terms are summed directly.
const DIRECT_DIFF_LIMIT: u64 = 1_000_000;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated sum of `1/s` for `s` in `(lo, hi]`, smallest terms first.
fn reciprocal_sum(lo: u64, hi: u64) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for s in (lo + 1..=hi).rev() {
        let term = 1.0 / s as f64;
        let next = sum + term;
        if sum.abs() >= term {
            carry += (sum - next) + term;
        } else {
            carry += (term - next) + sum;
        }
        sum = next;
    }
    sum + carry
}

/// `H(x) - ln x - γ_E`, the asymptotic remainder; exact to f64 for `x >= 64`.
fn harmonic_remainder(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    1.0 / (2.0 * x)
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// `γ(t) = Σ_{s=1}^t 1/s`, with `γ(0) = 0`.
pub fn harmonic(t: u64) -> f64 {
    if t < ASYMPTOTIC_FROM {
        reciprocal_sum(0, t)
    } else {
        let x = t as f64;
        x.ln() + EULER_GAMMA + harmonic_remainder(x)
    }
}

/// `γ(hi) - γ(lo) = Σ_{s=lo+1}^{hi} 1/s` without cancellation; 0 when `hi <= lo`.
pub fn harmonic_diff(lo: u64, hi: u64) -> f64 {
    if hi <= lo {
        0.0
    } else if hi - lo <= DIRECT_DIFF_LIMIT {
        reciprocal_sum(lo, hi)
    } else if lo < ASYMPTOTIC_FROM {
        harmonic(hi) - harmonic(lo)
    } else {
        let (l, h) = (lo as f64, hi as f64);
        ((hi - lo) as f64 / l).ln_1p() + harmonic_remainder(h) - harmonic_remainder(l)
    }
}

/// `(ln(t + 1), 1 + ln t)`, which bracket `γ(t)` for every `t >= 1`.
pub fn harmonic_bounds(t: u64) -> (f64, f64) {
    let x = t as f64;
    (x.ln_1p(), 1.0 + x.ln())
}

/// `(a, b)` of the sequence `ζ(t) = (1 - a t^{-b})^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    a: f64,
    b: f64,
}

impl SeriesParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_open_unit("a", a)?;
        check_open_unit("b", b)?;
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Envelope exponent `c = 1 - b`.
    pub fn c(&self) -> f64 {
        1.0 - self.b
    }
}

pub fn zeta(t: u64, params: &SeriesParams) -> f64 {
    let x = t as f64;
    (x * (-params.a * x.powf(-params.b)).ln_1p()).exp()
}

/// `exp(-a t^{1-b})`, which dominates `ζ(t)` pointwise.
pub fn zeta_envelope(t: u64, params: &SeriesParams) -> f64 {
    (-params.a * (t as f64).powf(params.c())).exp()
}

/// `ln ∫_lower^∞ exp(-coef t^power) dt`, through the incomplete gamma function.
pub fn ln_stretched_exp_tail(coef: f64, power: f64, lower: f64) -> Result<f64> {
    let s = 1.0 / power;
    let x = coef * lower.powf(power);
    Ok(ln_upper_incomplete_gamma(s, x)? - power.ln() - s * coef.ln())
}

pub fn stretched_exp_tail(coef: f64, power: f64, lower: f64) -> Result<f64> {
    ln_stretched_exp_tail(coef, power, lower).map(f64::exp)
}

/// Upper bound on `Σ_{t≥T} ζ(t)`; nonincreasing in `T`.
pub fn series_tail(params: &SeriesParams, from: u64) -> f64 {
    let from = from.max(1);
    let integral = stretched_exp_tail(params.a, params.c(), from as f64)
        .expect("a and c lie in (0, 1)");
    zeta(from, params) + integral
}

/// `h = η² / 8`.
pub fn hoeffding_h(eta: f64) -> Result<f64> {
    check_open_unit("eta", eta)?;
    Ok(eta * eta / 8.0)
}

/// Half the gap between the best and second-best reward probabilities.
pub fn eta_from_gap(env: &ActionEnvironment) -> Result<f64> {
    if env.dominant().is_none() {
        return Err(Error::TiedMaximum);
    }
    let mut d = env.reward_probs().to_vec();
    d.sort_by(|x, y| y.total_cmp(x));
    Ok((d[0] - d[1]) / 2.0)
}

/// `[1 - ω (1 - e^u)]^t`, the MGF of Binomial(t, ω) at `u <= 0`.
pub fn binomial_mgf(t: u64, omega: f64, u: f64) -> Result<f64> {
    if !(u <= 0.0) {
        return Err(Error::Domain {
            name: "u",
            value: u,
            domain: "(-inf, 0]",
        });
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::Domain {
            name: "omega",
            value: omega,
            domain: "[0, 1]",
        });
    }
    Ok((t as f64 * (omega * u.exp_m1()).ln_1p()).exp())
}

/// Parameters of the dominating binomial `(t, ω_t)` with
/// `ω_t = π₁(0) θ^{γ(t)}`, evaluated at `u = -h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfParams {
    theta: f64,
    pi1_0: f64,
    h: f64,
}

impl MgfParams {
    pub fn new(theta: f64, pi1_0: f64, h: f64) -> Result<Self> {
        check_theta(theta)?;
        check_open_unit("pi1(0)", pi1_0)?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain {
                name: "h",
                value: h,
                domain: "(0, inf)",
            });
        }
        Ok(Self { theta, pi1_0, h })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pi1_0(&self) -> f64 {
        self.pi1_0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `ω_t = π₁(0) θ^{γ(t)}`
    pub fn omega(&self, t: u64) -> f64 {
        self.pi1_0 * (harmonic(t) * self.theta.ln()).exp()
    }

    /// `a = π₁(0) (1 - e^{-h})`
    pub fn a(&self) -> f64 {
        -self.pi1_0 * (-self.h).exp_m1()
    }

    /// `k = a θ`: with `γ(t) ≤ 1 + ln t`, `φ_t(-h) ≤ exp(-k t^c)` for all `t >= 1`.
    pub fn envelope_coefficient(&self) -> f64 {
        self.a() * self.theta
    }

    /// `c = 1 + ln θ`, in `(0, 1)`.
    pub fn envelope_exponent(&self) -> f64 {
        1.0 + self.theta.ln()
    }

    /// `φ_t(-h)`
    pub fn phi(&self, t: u64) -> f64 {
        binomial_mgf(t, self.omega(t), -self.h).expect("omega in [0, 1] and u < 0")
    }

    pub fn phi_envelope(&self, t: u64) -> f64 {
        (-self.envelope_coefficient() * (t as f64).powf(self.envelope_exponent())).exp()
    }
}

/// Upper bound on `Σ_{t≥T} φ_t(-h)`; nonincreasing in `T`.
pub fn phi_tail(params: &MgfParams, from: u64) -> f64 {
    let from = from.max(1);
    let integral = stretched_exp_tail(
        params.envelope_coefficient(),
        params.envelope_exponent(),
        from as f64,
    )
    .expect("coefficient and exponent are positive");
    params.phi(from) + integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::quadrature::stretched_exp_integral_by_quadrature;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn harmonic_small_values() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert_eq!(harmonic(2), 1.5);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_switch_is_seamless() {
        // direct summation against the asymptotic branch around and past the switch
        for t in [63, 64, 65, 100, 1000, 123_456, 1_000_000] {
            let direct = reciprocal_sum(0, t);
            assert!(rel(harmonic(t), direct) < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn harmonic_diff_paths_agree() {
        let cases = [(0, 10), (5, 5), (10, 3), (100, 2_000_000), (10, 3_000_000), (1_000, 5_000_000)];
        for (lo, hi) in cases {
            let d = harmonic_diff(lo, hi);
            let reference = if hi > lo { reciprocal_sum(lo, hi) } else { 0.0 };
            assert!((d - reference).abs() < 1e-13, "({lo}, {hi}): {d} vs {reference}");
        }
        // far past the direct range: differences of huge arguments
        let d = harmonic_diff(1_000_000_000_000, 3_000_000_000_000);
        assert!(rel(d, 3f64.ln()) < 1e-12);
    }

    #[test]
    fn harmonic_bracket() {
        for t in (1..2000).chain([10_000, 1_000_000, 1_000_000_000_000]) {
            let (lo, hi) = harmonic_bounds(t);
            let g = harmonic(t);
            assert!(lo <= g && g <= hi + 1e-15, "t = {t}");
        }
    }

    #[test]
    fn zeta_values() {
        let p = SeriesParams::new(0.5, 0.5).unwrap();
        assert!((zeta(1, &p) - 0.5).abs() < 1e-15);
        assert!((zeta(4, &p) - 0.316_406_25).abs() < 1e-15);
        assert!((zeta_envelope(4, &p) - (-1.0f64).exp()).abs() < 1e-15);

        let q = SeriesParams::new(0.9, 0.9).unwrap();
        let t = 1_000_000;
        assert!(zeta(t, &q) <= (-0.9 * (t as f64).powf(0.1)).exp());
    }

    #[test]
    fn series_params_domain() {
        assert!(SeriesParams::new(1.0 - 1e-9, 0.5).is_ok());
        assert!(SeriesParams::new(1.0, 0.5).is_err());
        assert!(SeriesParams::new(0.5, 0.0).is_err());
        assert!(SeriesParams::new(0.0, 0.5).is_err());
    }

    #[test]
    fn envelope_integral_matches_quadrature() {
        for &k in &[0.1, 0.5, 0.9] {
            for &c in &[0.2, 0.5, 0.8] {
                let closed = stretched_exp_tail(k, c, 1.0).unwrap();
                let q = stretched_exp_integral_by_quadrature(k, c, 1.0, 1e-10).unwrap();
                assert!(rel(closed, q.value) < 1e-6, "k = {k}, c = {c}");
            }
        }
    }

    #[test]
    fn series_tail_dominates_partial_sums() {
        let p = SeriesParams::new(0.5, 0.5).unwrap();
        let mut partial = 0.0;
        for t in 1..=1_000_000 {
            partial += zeta(t, &p);
        }
        assert!(series_tail(&p, 1) >= partial);
        let mut prev = series_tail(&p, 1);
        for t in 2..=10_000 {
            let next = series_tail(&p, t);
            assert!(next <= prev, "T = {t}");
            prev = next;
        }
        assert!(series_tail(&p, 100_000) < 1e-50);
    }

    #[test]
    fn hoeffding_exponent() {
        assert!((hoeffding_h(0.2).unwrap() - 0.005).abs() < 1e-17);
        assert!((hoeffding_h(0.1).unwrap() - 0.00125).abs() < 1e-17);
        assert!((hoeffding_h(1.0 - 1e-12).unwrap() - 0.125).abs() < 1e-12);
        assert!(hoeffding_h(0.0).is_err());
        assert!(hoeffding_h(1.0).is_err());
    }

    #[test]
    fn eta_is_half_gap() {
        let env = ActionEnvironment::new(vec![0.8, 0.4]).unwrap();
        assert!((eta_from_gap(&env).unwrap() - 0.2).abs() < 1e-15);
        let env = ActionEnvironment::new(vec![0.7, 0.5, 0.3]).unwrap();
        assert!((eta_from_gap(&env).unwrap() - 0.1).abs() < 1e-15);
        let env = ActionEnvironment::new(vec![0.6, 0.6]).unwrap();
        assert_eq!(eta_from_gap(&env), Err(Error::TiedMaximum));
    }

    #[test]
    fn omega_values() {
        let p = MgfParams::new(0.5, 0.5, 0.01).unwrap();
        assert!((p.omega(1) - 0.25).abs() < 1e-15);
        assert!((p.omega(2) - 0.5 * 0.5f64.powf(1.5)).abs() < 1e-15);
        for t in 1..500 {
            assert!(p.omega(t + 1) < p.omega(t));
        }
    }

    #[test]
    fn mgf_values() {
        assert_eq!(binomial_mgf(17, 0.3, 0.0).unwrap(), 1.0);
        assert_eq!(binomial_mgf(17, 0.0, -2.0).unwrap(), 1.0);
        assert!((binomial_mgf(1, 1.0, -(2f64.ln())).unwrap() - 0.5).abs() < 1e-15);
        assert!(binomial_mgf(3, 0.5, 0.1).is_err());
    }

    #[test]
    fn phi_under_envelope_and_tail_bounds_sum() {
        let p = MgfParams::new(0.8, 0.25, 0.005).unwrap();
        let horizon = 1_000_000u64;
        let terms: Vec<f64> = (1..=horizon).map(|t| p.phi(t)).collect();
        for (i, &phi) in terms.iter().enumerate() {
            let t = i as u64 + 1;
            assert!(phi <= p.phi_envelope(t), "t = {t}");
        }
        // suffix sums, smallest terms first
        for from in [1u64, 10, 100] {
            let direct: f64 = terms[(from - 1) as usize..].iter().rev().sum();
            assert!(phi_tail(&p, from) >= direct, "T = {from}");
        }
        let mut prev = phi_tail(&p, 1);
        for t in (2..200_000).step_by(37) {
            let next = phi_tail(&p, t);
            assert!(next <= prev, "T = {t}");
            prev = next;
        }
        assert!(phi_tail(&p, 100_000_000) < 1e-100);
    }
}
