//! Monte Carlo behaviour of the estimators on small, fixed-seed runs.

use pursuit_core::sim::estimators::{
    counts_divergence, eps_optimality, estimate_accuracy, hoeffding, mgf, DEFAULT_MIN_BUCKET,
};
use pursuit_core::sim::{gap_demo, run_experiment, run_replicates, ExperimentConfig};
use pursuit_core::trace::Trace;
use pursuit_core::{ActionEnvironment, LambdaSchedule};

fn two_armed(replicates: u64, horizon: u64, checkpoints: Vec<u64>, seed: u64) -> ExperimentConfig {
    let env = ActionEnvironment::with_dominant_first(vec![0.8, 0.4]).unwrap();
    let mut c = ExperimentConfig::new(env, LambdaSchedule::harmonic(0.8).unwrap());
    c.replicates = replicates;
    c.horizon = horizon;
    c.checkpoints = checkpoints;
    c.master_seed = seed;
    c.trace_stride = None;
    c
}

fn traces(c: &ExperimentConfig) -> Vec<Trace> {
    run_replicates(c).unwrap()
}

#[test]
fn optimality_regression_at_500() {
    // the floor 1 - π₁(t) >= 0.5 * 0.8^{γ(t)} is 0.126 at t = 500
    let c = two_armed(2000, 500, vec![500], 2024);
    let p = eps_optimality(&traces(&c), 0.05, 500).unwrap();
    assert_eq!(p.successes, 0);
    assert_eq!(p.p_hat, 0.0);
}

#[test]
fn optimality_crosses_on_a_longer_horizon() {
    let checkpoints: Vec<u64> = (1..=25).map(|k| k * 1000).collect();
    let c = two_armed(400, 25_000, checkpoints.clone(), 2024);
    let tr = traces(&c);
    let curve: Vec<f64> = checkpoints
        .iter()
        .map(|&t| eps_optimality(&tr, 0.05, t).unwrap().p_hat)
        .collect();
    let crossing = curve.iter().position(|&p| p >= 0.95).expect("crosses by 25000");
    assert_eq!(checkpoints[crossing], 18_000);
    assert!(curve[crossing..].iter().all(|&p| p >= 0.95), "{curve:?}");
    assert!(curve[..crossing].iter().all(|&p| p == 0.0));
}

#[test]
fn zero_count_probability_shrinks() {
    let times = vec![2, 5, 10, 20, 50];
    let c = two_armed(1000, 50, times.clone(), 3);
    let tr = traces(&c);
    let p: Vec<f64> = times
        .iter()
        .map(|&t| counts_divergence(&tr, 0, t).unwrap().p_hat)
        .collect();
    assert!(p.windows(2).all(|w| w[1] <= w[0]), "{p:?}");
    assert!(p[0] > p[4]);
    for &t in &times {
        assert_eq!(counts_divergence(&tr, t, t).unwrap().p_hat, 1.0);
        assert!(counts_divergence(&tr, 1, t).unwrap().p_hat >= counts_divergence(&tr, 0, t).unwrap().p_hat);
    }
}

#[test]
fn estimate_deviation_trend() {
    let times = [50, 200, 800];
    let c = two_armed(2000, 800, times.to_vec(), 4);
    let tr = traces(&c);
    let est: Vec<_> = times
        .iter()
        .map(|&t| estimate_accuracy(&tr, 0.2, t).unwrap())
        .collect();
    for w in est.windows(2) {
        let se = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[1].p_hat <= w[0].p_hat + 2.0 * se, "{est:?}");
    }
    assert_eq!(estimate_accuracy(&tr, 1.0, 800).unwrap().p_hat, 0.0);

    // d = (1, 0): every observation equals its mean
    let env = ActionEnvironment::new(vec![1.0, 0.0]).unwrap();
    let mut c = ExperimentConfig::new(env, LambdaSchedule::harmonic(0.8).unwrap());
    c.horizon = 40;
    c.checkpoints = vec![40];
    assert_eq!(estimate_accuracy(&traces(&c), 1e-9, 40).unwrap().p_hat, 0.0);
}

#[test]
fn mgf_decreases_in_time() {
    let times = [10, 50, 100, 200];
    let c = two_armed(2000, 200, times.to_vec(), 5);
    let tr = traces(&c);
    let psi: Vec<f64> = times.iter().map(|&t| mgf(&tr, t, -0.005).unwrap().mean).collect();
    assert!(psi.windows(2).all(|w| w[1] < w[0]), "{psi:?}");
    assert_eq!(mgf(&tr, 100, 0.0).unwrap().mean, 1.0);
}

#[test]
fn hoeffding_bucket_below_bound() {
    let c = two_armed(4000, 60, vec![60], 6);
    let tr = traces(&c);
    let est = hoeffding(&tr, 0.2, (20, 40), 60, DEFAULT_MIN_BUCKET).unwrap();
    let p = est.deviation;
    assert!(p.p_hat <= est.bound + 3.0 * p.stderr, "{est:?}");
    let later = hoeffding(&tr, 0.2, (41, 60), 60, DEFAULT_MIN_BUCKET).unwrap();
    let se = (p.stderr.powi(2) + later.deviation.stderr.powi(2)).sqrt();
    assert!(later.deviation.p_hat <= p.p_hat + 3.0 * se);
    assert_eq!(hoeffding(&tr, 1.0, (0, 60), 60, 1).unwrap().deviation.successes, 0);
}

#[test]
fn gap_demo_separates_schedules() {
    let mut c = two_armed(5000, 500, vec![500], 7);
    c.init_pulls = 3;
    let constant = LambdaSchedule::constant(0.5).unwrap();
    let harmonic = LambdaSchedule::harmonic(0.8).unwrap();
    let gap = gap_demo(&c, constant, harmonic).unwrap();
    let fixed = gap.reports[0].convergence[0].wrong_lock.unwrap();
    let vanishing = gap.reports[1].convergence[0].wrong_lock.unwrap();
    assert!(fixed.successes > 0);
    assert!(vanishing.p_hat < fixed.p_hat);
}

#[test]
fn degenerate_environment_run() {
    let env = ActionEnvironment::new(vec![1.0, 0.0]).unwrap();
    let mut c = ExperimentConfig::new(env, LambdaSchedule::harmonic(0.8).unwrap());
    c.replicates = 1;
    c.horizon = 300;
    c.checkpoints = vec![100, 300];
    c.trace_stride = Some(1);
    let run = run_experiment(&c).unwrap();
    let pi1: Vec<f64> = run.traces[0].records.iter().map(|r| r.pi1).collect();
    assert!(pi1.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(run, run_experiment(&c).unwrap());
}
