//! The experiment document.
//!
//! A TOML file such as
//!
//! ```toml
//! means = [1.0, 0.0]
//! sigma = 0.1
//! learner = "ucb"
//! attack = "adaptive"
//! horizon = [1000, 10000, 100000]
//! replications = 100
//! seed = 7
//! ```
//!
//! `target` is a 1-based arm id and defaults to the last arm. Unknown keys
//! are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, AttackParams};
use crate::env::EnvironmentConfig;
use crate::harness::SimulationSpec;
use crate::learners::{EGreedyParams, LearnerKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerChoice {
    Ucb,
    Egreedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackChoice {
    None,
    Adaptive,
    Oracle,
    Margin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Single(u64),
    Sweep(Vec<u64>),
}

impl Horizon {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Horizon::Single(t) => vec![*t],
            Horizon::Sweep(ts) => ts.clone(),
        }
    }
}

fn default_c_eps() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.05
}
fn default_theta() -> f64 {
    1.1
}
fn default_c_oracle() -> f64 {
    3.0
}
fn default_replications() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub means: Vec<f64>,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    pub learner: LearnerChoice,
    #[serde(default = "default_c_eps")]
    pub c_eps: f64,
    pub attack: AttackChoice,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Defaults to `0.1 * sigma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default = "default_c_oracle")]
    pub c_oracle: f64,
    pub horizon: Horizon,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(with = "seed_repr")]
    pub seed: u64,
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written as
/// decimal strings. Both forms are accepted on input.
mod seed_repr {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Single-line JSON rendering for file headers.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes to JSON")
    }

    pub fn horizons(&self) -> Vec<u64> {
        self.horizon.values()
    }

    pub fn environment(&self) -> Result<EnvironmentConfig> {
        let target = match self.target {
            Some(0) => return Err(Error::Config("target is a 1-based arm id".into())),
            Some(t) => Some(t - 1),
            None => None,
        };
        EnvironmentConfig::new(self.means.clone(), self.sigma, target)
    }

    pub fn attack_params(&self) -> AttackParams {
        AttackParams {
            delta: self.delta,
            theta: self.theta,
            margin: self.margin.unwrap_or(0.1 * self.sigma),
            c_oracle: self.c_oracle,
        }
    }

    pub fn learner_kind(&self) -> Result<LearnerKind> {
        Ok(match self.learner {
            LearnerChoice::Ucb => LearnerKind::Ucb,
            LearnerChoice::Egreedy => LearnerKind::EGreedy(EGreedyParams::new(self.c_eps)?),
        })
    }

    /// Simulation at one horizon. The oracle attacker is given that horizon.
    pub fn simulation_spec(&self, horizon: u64) -> Result<SimulationSpec> {
        let attack = match self.attack {
            AttackChoice::None => AttackKind::None,
            AttackChoice::Adaptive => AttackKind::Adaptive,
            AttackChoice::Oracle => AttackKind::Oracle {
                known_horizon: Some(horizon),
            },
            AttackChoice::Margin => AttackKind::Margin,
        };
        let spec = SimulationSpec {
            env: self.environment()?,
            horizon,
            learner: self.learner_kind()?,
            attack,
            params: self.attack_params(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let env = self.environment()?;
        self.learner_kind()?;
        self.attack_params().validate()?;
        let horizons = self.horizons();
        if horizons.is_empty() {
            return Err(Error::Config("horizon list is empty".into()));
        }
        let k = env.num_arms() as u64;
        if let Some(&t) = horizons.iter().find(|&&t| t < k) {
            return Err(Error::Config(format!(
                "horizon {t} is shorter than the {k}-round initialization"
            )));
        }
        if self.attack == AttackChoice::Oracle && horizons.iter().any(|&t| t < 2) {
            return Err(Error::Config("oracle attack needs horizon >= 2".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        Ok(())
    }
}
