//! Reward-poisoning attacks against stochastic bandit learners.
//!
//! The crate simulates an adversary sitting between a bandit learner and its
//! environment. Each round the learner picks an arm, the environment draws a
//! pre-attack reward, the adversary subtracts a perturbation `alpha` and the
//! learner only sees the corrupted reward. The attack cost is `|alpha|`.
//!
//! Modules:
//!
//! - [`env`]: arm means, gaps, seeded Gaussian rewards.
//! - [`learners`]: anytime UCB and epsilon-greedy arm selection.
//! - [`attacks`]: the concentration radius `beta`, the adaptive `sqrt(log T)`
//!   attack, the known-horizon oracle attack, a constant-margin baseline and
//!   the null attacker.
//! - [`harness`]: the interaction loop, online guarantee monitors,
//!   replications, horizon sweeps and scaling fits.
//! - [`config`]: the TOML experiment document.
//! - [`output`]: trace CSV, summary JSONL and sweep CSV writers.
//!
//! Arms are 0-based inside the library. The experiment document and every
//! serialized artifact use 1-based arm ids.

pub mod attacks;
pub mod config;
pub mod env;
mod error;
pub mod harness;
pub mod learners;
pub mod output;
pub mod stats;

pub use attacks::{beta, AttackDecision, AttackKind, AttackParams, AttackerState};
pub use config::{AttackChoice, ExperimentConfig, Horizon, LearnerChoice};
pub use env::{EnvironmentConfig, RngStream, GENERATOR_ID};
pub use error::{Error, Result};
pub use harness::{
    fit_cost_scaling, lemma2_bound, run_replications, run_round, run_simulation, run_sweep,
    theorem1_cost_bound, ucb_lower_bound_value, AggregateStats, LinearFit, MonitorReport,
    ReplicationSummary, RoundRecord, ScalingFit, SimulationSpec, Trace,
};
pub use learners::{EGreedyParams, LearnerKind, LearnerState};
