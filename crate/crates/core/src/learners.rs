//! Arm-selection rules for the learner: anytime UCB and epsilon-greedy.
//!
//! Both learners spend the first `K` rounds pulling every arm once, target
//! arm first and then the remaining arms in ascending order. After that they
//! act only on post-attack empirical means.

use serde::{Deserialize, Serialize};

use crate::env::RngStream;
use crate::{Error, Result};

/// Exploration scale `c` of the epsilon-greedy rate `eps_t = min(1, c K / t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EGreedyParams {
    c: f64,
}

impl EGreedyParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("c_eps must be > 0, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Exploration probability at round `t` with `k` arms, clamped at 1.
    pub fn epsilon(&self, k: usize, t: u64) -> f64 {
        (self.c * k as f64 / t as f64).min(1.0)
    }
}

impl Default for EGreedyParams {
    fn default() -> Self {
        Self { c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LearnerKind {
    Ucb,
    EGreedy(EGreedyParams),
}

/// Exploration bonus of the UCB rule is `3 sigma sqrt(ln t / n)`.
pub fn ucb_index(post_mean: f64, n: u64, t: u64, sigma: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Contract(
            "UCB index queried for an unpulled arm".into(),
        ));
    }
    Ok(index_unchecked(post_mean, n, (t as f64).ln(), sigma))
}

#[inline]
fn index_unchecked(post_mean: f64, n: u64, ln_t: f64, sigma: f64) -> f64 {
    post_mean + 3.0 * sigma * (ln_t / n as f64).sqrt()
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Round counter, pull counts and post-attack reward sums.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    t: u64,
    pulls: Vec<u64>,
    post_sums: Vec<f64>,
    init_order: Vec<usize>,
}

impl LearnerState {
    /// Fresh state with the default initialization order: `target`, then the
    /// other arms ascending.
    pub fn new(num_arms: usize, target: usize) -> Self {
        let mut init_order = Vec::with_capacity(num_arms);
        init_order.push(target);
        init_order.extend((0..num_arms).filter(|&i| i != target));
        Self {
            t: 0,
            pulls: vec![0; num_arms],
            post_sums: vec![0.0; num_arms],
            init_order,
        }
    }

    /// Replaces the initialization schedule. `order` must be a permutation of
    /// the arms.
    pub fn with_init_order(mut self, order: Vec<usize>) -> Result<Self> {
        let k = self.pulls.len();
        let mut seen = vec![false; k];
        if order.len() != k
            || order
                .iter()
                .any(|&a| a >= k || std::mem::replace(&mut seen[a], true))
        {
            return Err(Error::Config(format!(
                "initialization order {order:?} is not a permutation of {k} arms"
            )));
        }
        self.init_order = order;
        Ok(self)
    }

    /// Completed rounds.
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn post_sums(&self) -> &[f64] {
        &self.post_sums
    }

    pub fn init_order(&self) -> &[usize] {
        &self.init_order
    }

    /// Post-attack empirical mean of `arm`, `None` before its first pull.
    pub fn post_mean(&self, arm: usize) -> Option<f64> {
        match self.pulls[arm] {
            0 => None,
            n => Some(self.post_sums[arm] / n as f64),
        }
    }

    /// Arm scheduled for the next round if it is still an initialization
    /// round.
    fn init_arm(&self) -> Option<usize> {
        self.init_order.get(self.t as usize).copied()
    }

    /// UCB choice for the next round (round `t + 1`).
    pub fn ucb_select(&self, sigma: f64) -> usize {
        if let Some(arm) = self.init_arm() {
            return arm;
        }
        let ln_t = ((self.t + 1) as f64).ln();
        argmax(
            self.pulls
                .iter()
                .zip(&self.post_sums)
                .map(|(&n, &s)| index_unchecked(s / n as f64, n, ln_t, sigma)),
        )
    }

    /// Epsilon-greedy choice for the next round. Consumes one uniform draw
    /// for the explore coin and, when exploring, one for the arm.
    pub fn egreedy_select(&self, params: &EGreedyParams, rng: &mut RngStream) -> usize {
        if let Some(arm) = self.init_arm() {
            return arm;
        }
        let k = self.num_arms();
        if rng.uniform() < params.epsilon(k, self.t + 1) {
            return rng.index(k);
        }
        argmax(
            self.pulls
                .iter()
                .zip(&self.post_sums)
                .map(|(&n, &s)| s / n as f64),
        )
    }

    pub fn select(&self, kind: &LearnerKind, sigma: f64, rng: &mut RngStream) -> usize {
        match kind {
            LearnerKind::Ucb => self.ucb_select(sigma),
            LearnerKind::EGreedy(params) => self.egreedy_select(params, rng),
        }
    }

    /// Records the (post-attack) reward for the arm pulled this round.
    pub fn observe(&mut self, arm: usize, reward: f64) {
        self.pulls[arm] += 1;
        self.post_sums[arm] += reward;
        self.t += 1;
    }
}
