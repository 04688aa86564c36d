//! Reward-poisoning adversaries.
//!
//! Every attacker sees the pulled arm and its pre-attack reward, then picks a
//! perturbation `alpha` that is subtracted before the learner observes the
//! reward. All attackers here only ever push non-target arms down, so
//! `alpha >= 0` and the round's cost is `alpha`.
//!
//! The attacks differ in the threshold they drive a non-target arm's
//! post-attack mean to:
//!
//! | attack   | threshold                                             |
//! |----------|-------------------------------------------------------|
//! | adaptive | `mu_K - 2 beta(N_K) - 3 sigma theta^n`                |
//! | margin   | `mu_K - 2 beta(N_K) - margin`                         |
//! | oracle   | `mu_K - c sigma - 3 sigma sqrt(ln T)` (init pulls only) |
//!
//! where `mu_K` is the target's post-attack empirical mean and `n` counts the
//! current pull. The margin attack is a reconstruction of the classic
//! `O(log T)` attack on UCB: the adaptive attack with a constant in place of
//! the geometric term.

use serde::{Deserialize, Serialize};

use crate::env::EnvironmentConfig;
use crate::learners::LearnerState;
use crate::{Error, Result};

/// Concentration radius `sqrt(2 sigma^2 / n * ln(pi^2 K n^2 / (3 delta)))`.
///
/// With probability `1 - delta` every arm's pre-attack empirical mean stays
/// within `beta(N_i)` of its true mean for all rounds simultaneously.
pub fn beta(n: u64, sigma: f64, num_arms: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("beta(n) is undefined for n = 0".into()));
    }
    Ok(beta_unchecked(n, sigma, num_arms, delta))
}

#[inline]
pub(crate) fn beta_unchecked(n: u64, sigma: f64, num_arms: usize, delta: f64) -> f64 {
    let n = n as f64;
    let log_term = (std::f64::consts::PI.powi(2) * num_arms as f64 * n * n / (3.0 * delta)).ln();
    (2.0 * sigma * sigma / n * log_term).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttackKind {
    /// Control: never perturbs.
    None,
    /// Anytime attack with geometric margin `3 sigma theta^n`.
    Adaptive,
    /// Attacks only the initialization pulls; needs the horizon up front.
    Oracle { known_horizon: Option<u64> },
    /// Constant-margin baseline.
    Margin,
}

/// Tunables shared by the attackers. Each attack reads the subset it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    pub delta: f64,
    pub theta: f64,
    pub margin: f64,
    pub c_oracle: f64,
}

impl AttackParams {
    /// Defaults: `delta = 0.05`, `theta = 1.1`, `margin = 0.1 sigma`,
    /// `c_oracle = 3`.
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            delta: 0.05,
            theta: 1.1,
            margin: 0.1 * sigma,
            c_oracle: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::Config(format!(
                "delta must lie in (0, 0.5], got {}",
                self.delta
            )));
        }
        if !(self.theta.is_finite() && self.theta > 1.0) {
            return Err(Error::Config(format!(
                "theta must be > 1, got {}",
                self.theta
            )));
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return Err(Error::Config(format!(
                "margin must be >= 0, got {}",
                self.margin
            )));
        }
        if !(self.c_oracle.is_finite() && self.c_oracle > 0.0) {
            return Err(Error::Config(format!(
                "c_oracle must be > 0, got {}",
                self.c_oracle
            )));
        }
        Ok(())
    }
}

/// One round's perturbation. `cost == alpha.abs()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackDecision {
    pub alpha: f64,
    pub cost: f64,
}

impl AttackDecision {
    pub fn none() -> Self {
        Self {
            alpha: 0.0,
            cost: 0.0,
        }
    }

    fn new(alpha: f64) -> Self {
        Self {
            alpha,
            cost: alpha.abs(),
        }
    }
}

/// The adversary's bookkeeping: pre-attack sums and per-arm spend.
#[derive(Debug, Clone)]
pub struct AttackerState {
    kind: AttackKind,
    params: AttackParams,
    sigma: f64,
    target: usize,
    pre_sums: Vec<f64>,
    spend: Vec<f64>,
    total_cost: f64,
}

impl AttackerState {
    pub fn new(kind: AttackKind, params: AttackParams, env: &EnvironmentConfig) -> Result<Self> {
        params.validate()?;
        if let AttackKind::Oracle { known_horizon } = kind {
            match known_horizon {
                None => {
                    return Err(Error::Config(
                        "oracle attack requires a known horizon".into(),
                    ))
                }
                Some(t) if t < 2 => {
                    return Err(Error::Config(format!(
                        "oracle attack horizon must be >= 2, got {t}"
                    )))
                }
                Some(_) => {}
            }
        }
        let k = env.num_arms();
        Ok(Self {
            kind,
            params,
            sigma: env.sigma(),
            target: env.target(),
            pre_sums: vec![0.0; k],
            spend: vec![0.0; k],
            total_cost: 0.0,
        })
    }

    pub fn kind(&self) -> AttackKind {
        self.kind
    }

    pub fn params(&self) -> &AttackParams {
        &self.params
    }

    pub fn pre_sums(&self) -> &[f64] {
        &self.pre_sums
    }

    pub fn spend(&self) -> &[f64] {
        &self.spend
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    fn num_arms(&self) -> usize {
        self.pre_sums.len()
    }

    fn target_stats(&self, learner: &LearnerState) -> Result<(f64, u64)> {
        let n_target = learner.pulls()[self.target];
        match learner.post_mean(self.target) {
            Some(mean) => Ok((mean, n_target)),
            None => Err(Error::Contract(
                "target arm must be pulled before any non-target arm is attacked".into(),
            )),
        }
    }

    /// Smallest `alpha >= 0` that brings the post-attack mean of `arm`
    /// (including this round's reward) down to `threshold`.
    fn alpha_to_threshold(
        learner: &LearnerState,
        arm: usize,
        pre_reward: f64,
        threshold: f64,
    ) -> f64 {
        let n = (learner.pulls()[arm] + 1) as f64;
        (learner.post_sums()[arm] + pre_reward - n * threshold).max(0.0)
    }

    /// Post-attack threshold of the adaptive attack for the `n`-th pull.
    pub fn adaptive_threshold(&self, target_mean: f64, target_pulls: u64, n: u64) -> f64 {
        let p = &self.params;
        let geometric = if self.sigma == 0.0 {
            0.0
        } else {
            3.0 * self.sigma * p.theta.powf(n as f64)
        };
        target_mean
            - 2.0 * beta_unchecked(target_pulls, self.sigma, self.num_arms(), p.delta)
            - geometric
    }

    /// Post-attack threshold of the constant-margin baseline.
    pub fn margin_threshold(&self, target_mean: f64, target_pulls: u64) -> f64 {
        let p = &self.params;
        target_mean
            - 2.0 * beta_unchecked(target_pulls, self.sigma, self.num_arms(), p.delta)
            - p.margin
    }

    /// Post-attack threshold of the oracle attack for horizon `horizon`.
    pub fn oracle_threshold(&self, target_mean: f64, horizon: u64) -> f64 {
        target_mean
            - self.params.c_oracle * self.sigma
            - 3.0 * self.sigma * (horizon as f64).ln().sqrt()
    }

    /// Adaptive attack. `learner` is the state before this round's reward is
    /// observed; the current pull counts toward `n`.
    pub fn adaptive_alpha(
        &self,
        learner: &LearnerState,
        arm: usize,
        pre_reward: f64,
    ) -> Result<AttackDecision> {
        if arm == self.target {
            return Ok(AttackDecision::none());
        }
        let (target_mean, target_pulls) = self.target_stats(learner)?;
        let n = learner.pulls()[arm] + 1;
        let tau = self.adaptive_threshold(target_mean, target_pulls, n);
        Ok(AttackDecision::new(Self::alpha_to_threshold(
            learner, arm, pre_reward, tau,
        )))
    }

    /// Known-horizon attack: acts on the initialization pull of each
    /// non-target arm (`t <= K`) and never afterwards.
    pub fn oracle_alpha(
        &self,
        learner: &LearnerState,
        arm: usize,
        pre_reward: f64,
        t: u64,
    ) -> Result<AttackDecision> {
        let horizon = match self.kind {
            AttackKind::Oracle {
                known_horizon: Some(h),
            } => h,
            _ => {
                return Err(Error::Config(
                    "oracle attack requires a known horizon".into(),
                ))
            }
        };
        if arm == self.target || t > self.num_arms() as u64 {
            return Ok(AttackDecision::none());
        }
        let (target_mean, _) = self.target_stats(learner)?;
        let threshold = self.oracle_threshold(target_mean, horizon);
        Ok(AttackDecision::new(Self::alpha_to_threshold(
            learner, arm, pre_reward, threshold,
        )))
    }

    pub fn margin_alpha(
        &self,
        learner: &LearnerState,
        arm: usize,
        pre_reward: f64,
    ) -> Result<AttackDecision> {
        if arm == self.target {
            return Ok(AttackDecision::none());
        }
        let (target_mean, target_pulls) = self.target_stats(learner)?;
        let tau = self.margin_threshold(target_mean, target_pulls);
        Ok(AttackDecision::new(Self::alpha_to_threshold(
            learner, arm, pre_reward, tau,
        )))
    }

    /// Computes this round's perturbation and books it. Call before
    /// `learner.observe`.
    pub fn attack(
        &mut self,
        learner: &LearnerState,
        arm: usize,
        pre_reward: f64,
        t: u64,
    ) -> Result<AttackDecision> {
        let decision = match self.kind {
            AttackKind::None => AttackDecision::none(),
            AttackKind::Adaptive => self.adaptive_alpha(learner, arm, pre_reward)?,
            AttackKind::Oracle { .. } => self.oracle_alpha(learner, arm, pre_reward, t)?,
            AttackKind::Margin => self.margin_alpha(learner, arm, pre_reward)?,
        };
        self.pre_sums[arm] += pre_reward;
        self.spend[arm] += decision.alpha;
        self.total_cost += decision.cost;
        Ok(decision)
    }
}
