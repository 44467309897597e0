//! Pursuit learning automata with vanishing step-size schedules.
//!
//! The crate covers the automaton itself ([`automaton`], [`schedule`],
//! [`environment`]), the deterministic mathematics behind its convergence
//! guarantees ([`analysis`], [`bounds`]), and a seeded Monte Carlo harness
//! with estimators for the probabilistic statements ([`sim`], [`verify`]).

pub mod analysis;
pub mod automaton;
pub mod bounds;
pub mod environment;
mod error;
pub mod rng;
pub mod schedule;
pub mod sim;
pub mod trace;
pub mod verify;

pub use automaton::{Algorithm, Automaton, AutomatonState, StepOutcome, TieBreak};
pub use bounds::{compute_bound, BoundResult, BoundSpec};
pub use environment::ActionEnvironment;
pub use error::{Error, Result};
pub use schedule::LambdaSchedule;
pub use sim::{run_experiment, ExperimentConfig, ExperimentRun};
pub use trace::{Snapshot, Trace, TraceRecord};
