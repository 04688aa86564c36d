//! The attack interaction loop, guarantee monitors and replication runner.
//!
//! Each round runs in a fixed order: the learner selects `I_t`, the
//! environment draws `r0`, the attacker picks `alpha` from `(I_t, r0)` and
//! both states, and the learner observes `r0 - alpha`.

mod monitor;
mod replicate;

pub use crate::stats::LinearFit;
pub use monitor::{
    check_lemma2, lemma2_bound, monitor_event_e, theorem1_bound_from_pulls, theorem1_cost_bound,
    ucb_lower_bound_value, Lemma2Check, Monitor, MonitorReport,
};
pub use replicate::{
    fit_cost_scaling, run_replications, run_sweep, summarize, AggregateStats, ReplicationSummary,
    ScalingFit,
};

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, AttackParams, AttackerState};
use crate::env::{EnvironmentConfig, RngStream};
use crate::learners::{LearnerKind, LearnerState};
use crate::{Error, Result};

/// Everything needed to run one simulation apart from the random stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub env: EnvironmentConfig,
    pub horizon: u64,
    pub learner: LearnerKind,
    pub attack: AttackKind,
    pub params: AttackParams,
}

impl SimulationSpec {
    /// Same experiment at another horizon. An oracle attacker is told the new
    /// horizon.
    pub fn at_horizon(&self, horizon: u64) -> Self {
        let mut spec = self.clone();
        spec.horizon = horizon;
        if let AttackKind::Oracle { .. } = spec.attack {
            spec.attack = AttackKind::Oracle {
                known_horizon: Some(horizon),
            };
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.env.num_arms() as u64;
        if self.horizon < k {
            return Err(Error::Config(format!(
                "horizon {} is shorter than the {k}-round initialization",
                self.horizon
            )));
        }
        self.params.validate()
    }
}

/// One round of the interaction. Arm ids are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub arm: usize,
    pub pre_reward: f64,
    pub alpha: f64,
    pub post_reward: f64,
    pub cum_cost: f64,
    pub target_pulls: u64,
}

/// A complete simulation history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub spec: SimulationSpec,
    pub master_seed: u64,
    pub stream_index: u64,
    pub records: Vec<RoundRecord>,
}

impl Trace {
    pub fn horizon(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn total_cost(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_cost)
    }

    /// Rounds in which `arm` was pulled.
    pub fn rounds_of(&self, arm: usize) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.arm == arm)
            .map(|r| r.t)
            .collect()
    }

    pub fn pulls(&self) -> Vec<u64> {
        let mut pulls = vec![0; self.spec.env.num_arms()];
        for r in &self.records {
            pulls[r.arm] += 1;
        }
        pulls
    }
}

/// Learner and attacker states of one simulation in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub learner: LearnerState,
    pub attacker: AttackerState,
}

impl Simulation {
    pub fn new(spec: &SimulationSpec) -> Result<Self> {
        spec.validate()?;
        let env = &spec.env;
        Ok(Self {
            learner: LearnerState::new(env.num_arms(), env.target()),
            attacker: AttackerState::new(spec.attack, spec.params, env)?,
        })
    }
}

/// Plays a single round and updates both states.
pub fn run_round(
    env: &EnvironmentConfig,
    learner_kind: &LearnerKind,
    learner: &mut LearnerState,
    attacker: &mut AttackerState,
    rng: &mut RngStream,
) -> Result<RoundRecord> {
    let t = learner.round() + 1;
    let arm = learner.select(learner_kind, env.sigma(), rng);
    let pre_reward = env.sample_reward(arm, rng)?;
    let decision = attacker.attack(learner, arm, pre_reward, t)?;
    let post_reward = pre_reward - decision.alpha;
    learner.observe(arm, post_reward);
    Ok(RoundRecord {
        t,
        arm,
        pre_reward,
        alpha: decision.alpha,
        post_reward,
        cum_cost: attacker.total_cost(),
        target_pulls: learner.pulls()[env.target()],
    })
}

/// Runs `spec.horizon` rounds, handing every record to `sink` instead of
/// storing it.
pub fn simulate_with<F>(
    spec: &SimulationSpec,
    rng: &mut RngStream,
    mut sink: F,
) -> Result<Simulation>
where
    F: FnMut(&RoundRecord),
{
    let mut sim = Simulation::new(spec)?;
    for _ in 0..spec.horizon {
        let rec = run_round(
            &spec.env,
            &spec.learner,
            &mut sim.learner,
            &mut sim.attacker,
            rng,
        )?;
        sink(&rec);
    }
    Ok(sim)
}

/// Runs a full simulation on stream `(master_seed, stream_index)` and keeps
/// the trace.
pub fn run_simulation(spec: &SimulationSpec, master_seed: u64, stream_index: u64) -> Result<Trace> {
    let mut rng = RngStream::new(master_seed, stream_index);
    let mut records = Vec::with_capacity(spec.horizon as usize);
    simulate_with(spec, &mut rng, |r| records.push(*r))?;
    Ok(Trace {
        spec: spec.clone(),
        master_seed,
        stream_index,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spec(attack: AttackKind, horizon: u64) -> SimulationSpec {
        let env = EnvironmentConfig::new(vec![1.0, 0.0], 0.1, None).unwrap();
        SimulationSpec {
            params: AttackParams::with_sigma(env.sigma()),
            env,
            horizon,
            learner: LearnerKind::Ucb,
            attack,
        }
    }

    #[test]
    fn null_attack_passes_rewards_through() {
        let trace = run_simulation(&spec(AttackKind::None, 500), 3, 1).unwrap();
        for r in &trace.records {
            assert_eq!(r.post_reward.to_bits(), r.pre_reward.to_bits());
            assert_eq!(r.cum_cost, 0.0);
        }
    }

    #[test]
    fn adaptive_never_touches_target_rounds() {
        let trace = run_simulation(&spec(AttackKind::Adaptive, 2000), 3, 1).unwrap();
        for r in trace.records.iter().filter(|r| r.arm == 1) {
            assert_eq!(r.alpha, 0.0);
        }
    }

    #[test]
    fn adaptive_round_lands_on_threshold() {
        let s = spec(AttackKind::Adaptive, 200);
        let mut sim = Simulation::new(&s).unwrap();
        let mut rng = RngStream::new(9, 4);
        let mut checked = 0;
        for _ in 0..s.horizon {
            let before = sim.learner.clone();
            let rec = run_round(
                &s.env,
                &s.learner,
                &mut sim.learner,
                &mut sim.attacker,
                &mut rng,
            )
            .unwrap();
            if rec.arm != 1 && rec.alpha > 0.0 {
                let tau = sim.attacker.adaptive_threshold(
                    before.post_mean(1).unwrap(),
                    before.pulls()[1],
                    sim.learner.pulls()[rec.arm],
                );
                assert!((sim.learner.post_mean(rec.arm).unwrap() - tau).abs() < 1e-9);
                checked += 1;
            }
        }
        assert!(checked >= 1);
    }

    #[test]
    fn horizon_equal_to_arms_is_initialization_only() {
        let env = EnvironmentConfig::new(vec![0.3, 0.1, 0.2, 0.0], 0.1, Some(1)).unwrap();
        let s = SimulationSpec {
            params: AttackParams::with_sigma(0.1),
            env,
            horizon: 4,
            learner: LearnerKind::Ucb,
            attack: AttackKind::Adaptive,
        };
        let trace = run_simulation(&s, 1, 1).unwrap();
        let arms: Vec<_> = trace.records.iter().map(|r| r.arm).collect();
        assert_eq!(arms, vec![1, 0, 2, 3]);
    }

    #[test]
    fn short_horizon_rejected() {
        assert!(matches!(
            run_simulation(&spec(AttackKind::None, 1), 1, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn same_seed_same_trace() {
        let s = spec(AttackKind::Adaptive, 3000);
        assert_eq!(
            run_simulation(&s, 42, 7).unwrap(),
            run_simulation(&s, 42, 7).unwrap()
        );
        assert_ne!(
            run_simulation(&s, 42, 7).unwrap().records,
            run_simulation(&s, 42, 8).unwrap().records
        );
    }

    #[test]
    fn at_horizon_updates_oracle() {
        let s = spec(
            AttackKind::Oracle {
                known_horizon: Some(10),
            },
            10,
        )
        .at_horizon(500);
        assert_eq!(
            s.attack,
            AttackKind::Oracle {
                known_horizon: Some(500)
            }
        );
        assert_eq!(s.horizon, 500);
    }
}
