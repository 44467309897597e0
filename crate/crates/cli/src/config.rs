//! Run configuration: TOML file, command-line overrides and built-in defaults.
//!
//! Every key is optional in both the file and the flags. A flag wins over the
//! file, the file wins over the default. The output directory falls back to
//! `PURSUIT_OUT_DIR` before the built-in default.

use std::path::{Path, PathBuf};

use serde::de::value::{Error as ValueError, StrDeserializer};
use serde::de::IntoDeserializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pursuit_core::sim::{default_checkpoints, DEFAULT_INIT_PULLS, DEFAULT_STRIDE};
use pursuit_core::{ActionEnvironment, Algorithm, ExperimentConfig, LambdaSchedule, TieBreak};

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "PURSUIT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "pursuit-out";
pub const DEFAULT_REWARD_PROBS: [f64; 2] = [0.8, 0.4];
pub const DEFAULT_SCHEDULE: &str = "harmonic:0.8";
pub const DEFAULT_HORIZON: u64 = 1000;
pub const DEFAULT_REPLICATES: u64 = 100;
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub reward_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// `constant:L`, `harmonic:THETA`, `cutoff:THETA:T0` or `general:THETA:P`.
    pub lambda: Option<String>,
    pub algorithm: Option<Algorithm>,
    pub tie_break: Option<TieBreak>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: Option<u64>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub init_pulls: Option<u32>,
    pub epsilons: Option<Vec<f64>>,
    pub checkpoints: Option<Vec<u64>>,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub stride: Option<u64>,
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A partial configuration. Used both for the file and for the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            environment: EnvironmentSection {
                reward_probs: over.environment.reward_probs.or(self.environment.reward_probs),
            },
            schedule: ScheduleSection {
                lambda: over.schedule.lambda.or(self.schedule.lambda),
                algorithm: over.schedule.algorithm.or(self.schedule.algorithm),
                tie_break: over.schedule.tie_break.or(self.schedule.tie_break),
            },
            run: RunSection {
                horizon: over.run.horizon.or(self.run.horizon),
                replicates: over.run.replicates.or(self.run.replicates),
                seed: over.run.seed.or(self.run.seed),
                init_pulls: over.run.init_pulls.or(self.run.init_pulls),
                epsilons: over.run.epsilons.or(self.run.epsilons),
                checkpoints: over.run.checkpoints.or(self.run.checkpoints),
                eta: over.run.eta.or(self.run.eta),
            },
            output: OutputSection {
                stride: over.output.stride.or(self.output.stride),
                dir: over.output.dir.or(self.output.dir),
                format: over.output.format.or(self.output.format),
            },
        }
    }

    /// Fills every missing key with its default and validates the result.
    pub fn resolve(self, env_out_dir: Option<PathBuf>) -> Result<RunConfig, CliError> {
        let reward_probs = self
            .environment
            .reward_probs
            .unwrap_or_else(|| DEFAULT_REWARD_PROBS.to_vec());
        let environment = ActionEnvironment::new(reward_probs)?;
        let schedule: LambdaSchedule = self
            .schedule
            .lambda
            .as_deref()
            .unwrap_or(DEFAULT_SCHEDULE)
            .parse()?;
        let horizon = self.run.horizon.unwrap_or(DEFAULT_HORIZON);
        let experiment = ExperimentConfig {
            environment,
            algorithm: self.schedule.algorithm.unwrap_or_default(),
            schedule,
            horizon,
            replicates: self.run.replicates.unwrap_or(DEFAULT_REPLICATES),
            master_seed: self.run.seed.unwrap_or(0),
            trace_stride: Some(self.output.stride.unwrap_or(DEFAULT_STRIDE)),
            epsilons: self.run.epsilons.unwrap_or_else(|| vec![DEFAULT_EPSILON]),
            eta: self.run.eta,
            checkpoints: self
                .run
                .checkpoints
                .unwrap_or_else(|| default_checkpoints(horizon)),
            init_pulls: self.run.init_pulls.unwrap_or(DEFAULT_INIT_PULLS),
            tie_break: self.schedule.tie_break.unwrap_or_default(),
        };
        experiment.validate()?;
        if experiment.epsilons.is_empty() {
            return Err(CliError::Usage("run.epsilons must not be empty".into()));
        }
        Ok(RunConfig {
            experiment,
            out_dir: self
                .output
                .dir
                .or(env_out_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            format: self.output.format.unwrap_or_default(),
        })
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// The resolved settings that determine the output contents, as JSON with
    /// sorted keys. The output directory is left out.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::json!({
            "experiment": self.experiment,
            "format": self.format,
        });
        // serde_json::Value keeps object keys in a BTreeMap
        serde_json::to_string(&value).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Parses a snake_case enum value the same way the config file does.
pub fn parse_enum<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, String> {
    let de: StrDeserializer<'_, ValueError> = s.into_deserializer();
    T::deserialize(de).map_err(|e| e.to_string())
}
