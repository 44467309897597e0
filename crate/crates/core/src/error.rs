use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter fell outside its admissible domain.
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("an environment needs at least 2 actions, got {0}")]
    TooFewActions(usize),

    #[error("reward probabilities have no unique maximum")]
    TiedMaximum,

    #[error("iteration {0} was not recorded as a checkpoint")]
    CheckpointMissing(u64),

    #[error("no replicates to aggregate")]
    NoReplicates,

    /// The iteration bound did not fit below the solver ceiling.
    #[error("{quantity} exceeds the solver ceiling of {ceiling} iterations")]
    CeilingExceeded { quantity: &'static str, ceiling: u64 },

    #[error("bucket holds {found} samples, at least {required} required")]
    InsufficientSamples { found: usize, required: usize },

    #[error("{0}")]
    Config(String),

    #[error("{quantity} did not converge within {iterations} iterations")]
    NoConvergence {
        quantity: &'static str,
        iterations: usize,
    },
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "(0, 1)",
        })
    }
}
