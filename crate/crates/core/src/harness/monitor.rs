//! Guarantee monitors. These read the true arm means and are test oracles;
//! no attacker ever sees them.
//!
//! [`Monitor`] checks a run online, one record at a time. The free functions
//! re-derive the same checks from a stored [`Trace`] in batch.

use serde::{Deserialize, Serialize};

use super::{RoundRecord, Trace};
use crate::attacks::beta_unchecked;
use crate::env::EnvironmentConfig;

/// Cap on non-target pulls after `t` rounds under the adaptive attack:
/// `ceil(log_theta sqrt(ln t))`. `None` when `ln t <= 1` (t < 3), where the
/// cap is not meaningful.
pub fn lemma2_bound(t: f64, theta: f64) -> Option<u64> {
    let ln_t = t.ln();
    if ln_t.is_nan() || ln_t <= 1.0 {
        return None;
    }
    let x = ln_t.sqrt().ln() / theta.ln();
    // Snap values within rounding noise of an integer onto it.
    Some((x - 1e-9).ceil().max(0.0) as u64)
}

/// `sum_{i != target} N_i (gap_i^+ + 4 beta(N_i) + 3 theta sigma sqrt(ln T))`.
pub fn theorem1_bound_from_pulls(
    pulls: &[u64],
    env: &EnvironmentConfig,
    delta: f64,
    theta: f64,
    horizon: u64,
) -> f64 {
    let sigma = env.sigma();
    let k = env.num_arms();
    let growth = 3.0 * theta * sigma * (horizon as f64).ln().sqrt();
    pulls
        .iter()
        .enumerate()
        .filter(|&(i, &n)| i != env.target() && n > 0)
        .map(|(i, &n)| {
            let gap_plus = (env.means()[i] - env.means()[env.target()]).max(0.0);
            n as f64 * (gap_plus + 4.0 * beta_unchecked(n, sigma, k, delta) + growth)
        })
        .sum()
}

/// Cost upper bound for the adaptive attack evaluated at the end of `trace`.
pub fn theorem1_cost_bound(trace: &Trace, env: &EnvironmentConfig, delta: f64, theta: f64) -> f64 {
    theorem1_bound_from_pulls(&trace.pulls(), env, delta, theta, trace.horizon())
}

/// Minimum cost any successful attack on two-arm UCB must pay:
/// `gap + 0.5 sigma sqrt(ln(0.99 T))`.
pub fn ucb_lower_bound_value(gap: f64, sigma: f64, horizon: u64) -> f64 {
    gap + 0.5 * sigma * (0.99 * horizon as f64).ln().sqrt()
}

/// True iff every arm's pre-attack empirical mean stayed strictly within
/// `beta(N_i(t))` of its true mean at every round.
pub fn monitor_event_e(trace: &Trace, env: &EnvironmentConfig, delta: f64) -> bool {
    let k = env.num_arms();
    let mut sums = vec![0.0; k];
    let mut pulls = vec![0u64; k];
    for r in &trace.records {
        sums[r.arm] += r.pre_reward;
        pulls[r.arm] += 1;
        // Only the pulled arm's mean moves, so checking it suffices.
        let dev = (sums[r.arm] / pulls[r.arm] as f64 - env.means()[r.arm]).abs();
        if dev.is_nan() || dev >= beta_unchecked(pulls[r.arm], env.sigma(), k, delta) {
            // sigma = 0 gives zero deviation and zero radius.
            if !(env.sigma() == 0.0 && dev == 0.0) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Check {
    pub ok: bool,
    pub first_violation: Option<u64>,
}

/// Checks `max_{i != target} N_i(t) <= lemma2_bound(t)` at every round `t >= 3`.
pub fn check_lemma2(trace: &Trace, theta: f64) -> Lemma2Check {
    let target = trace.spec.env.target();
    let mut pulls = vec![0u64; trace.spec.env.num_arms()];
    for r in &trace.records {
        pulls[r.arm] += 1;
        let Some(cap) = lemma2_bound(r.t as f64, theta) else {
            continue;
        };
        let worst = pulls
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != target)
            .map(|(_, &n)| n)
            .max()
            .unwrap_or(0);
        if worst > cap {
            return Lemma2Check {
                ok: false,
                first_violation: Some(r.t),
            };
        }
    }
    Lemma2Check {
        ok: true,
        first_violation: None,
    }
}

/// Outcome of all monitors on one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub horizon: u64,
    pub total_cost: f64,
    pub target_pulls: u64,
    pub max_nontarget_pulls: u64,
    pub event_e_held: bool,
    pub lemma2_ok: bool,
    pub lemma2_first_violation: Option<u64>,
    pub theorem1_ok: bool,
    pub theorem1_bound: f64,
    pub lower_bound_value: f64,
}

impl MonitorReport {
    /// A guarantee was broken (pull cap or cost bound).
    pub fn violated(&self) -> bool {
        !(self.lemma2_ok && self.theorem1_ok)
    }
}

/// Online monitor fed one [`RoundRecord`] at a time.
#[derive(Debug, Clone)]
pub struct Monitor<'a> {
    env: &'a EnvironmentConfig,
    delta: f64,
    theta: f64,
    pre_sums: Vec<f64>,
    pulls: Vec<u64>,
    max_nontarget: u64,
    event_e: bool,
    lemma2_violation: Option<u64>,
    rounds: u64,
    total_cost: f64,
}

impl<'a> Monitor<'a> {
    pub fn new(env: &'a EnvironmentConfig, delta: f64, theta: f64) -> Self {
        let k = env.num_arms();
        Self {
            env,
            delta,
            theta,
            pre_sums: vec![0.0; k],
            pulls: vec![0; k],
            max_nontarget: 0,
            event_e: true,
            lemma2_violation: None,
            rounds: 0,
            total_cost: 0.0,
        }
    }

    pub fn observe(&mut self, r: &RoundRecord) {
        let arm = r.arm;
        self.pre_sums[arm] += r.pre_reward;
        self.pulls[arm] += 1;
        self.rounds = r.t;
        self.total_cost = r.cum_cost;

        if self.event_e {
            let n = self.pulls[arm];
            let dev = (self.pre_sums[arm] / n as f64 - self.env.means()[arm]).abs();
            let radius = beta_unchecked(n, self.env.sigma(), self.env.num_arms(), self.delta);
            if !(dev < radius || (self.env.sigma() == 0.0 && dev == 0.0)) {
                self.event_e = false;
            }
        }

        if arm != self.env.target() {
            self.max_nontarget = self.max_nontarget.max(self.pulls[arm]);
        }
        if self.lemma2_violation.is_none() {
            if let Some(cap) = lemma2_bound(r.t as f64, self.theta) {
                if self.max_nontarget > cap {
                    self.lemma2_violation = Some(r.t);
                }
            }
        }
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn report(&self) -> MonitorReport {
        let theorem1_bound =
            theorem1_bound_from_pulls(&self.pulls, self.env, self.delta, self.theta, self.rounds);
        MonitorReport {
            horizon: self.rounds,
            total_cost: self.total_cost,
            target_pulls: self.pulls[self.env.target()],
            max_nontarget_pulls: self.max_nontarget,
            event_e_held: self.event_e,
            lemma2_ok: self.lemma2_violation.is_none(),
            lemma2_first_violation: self.lemma2_violation,
            theorem1_ok: self.total_cost <= theorem1_bound,
            theorem1_bound,
            lower_bound_value: ucb_lower_bound_value(
                self.env.max_gap_plus(),
                self.env.sigma(),
                self.rounds,
            ),
        }
    }

    /// Replays a stored trace.
    pub fn run(trace: &'a Trace, delta: f64, theta: f64) -> MonitorReport {
        let mut m = Monitor::new(&trace.spec.env, delta, theta);
        trace.records.iter().for_each(|r| m.observe(r));
        m.report()
    }
}
