//! Seed-swept replications, horizon sweeps and cost-scaling fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::monitor::{lemma2_bound, Monitor, MonitorReport};
use super::{simulate_with, SimulationSpec};
use crate::env::RngStream;
use crate::stats::{self, LinearFit};
use crate::{Error, Result};

/// Per-replication summary record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub seed: u64,
    pub replication: u64,
    pub horizon: u64,
    pub total_cost: f64,
    pub target_pulls: u64,
    pub max_nontarget_pulls: u64,
    pub event_e_held: bool,
    pub lemma2_ok: bool,
    pub theorem1_ok: bool,
    pub theorem1_bound: f64,
    pub lower_bound_value: f64,
}

impl ReplicationSummary {
    pub fn from_report(master_seed: u64, replication: u64, report: &MonitorReport) -> Self {
        Self {
            seed: master_seed,
            replication,
            horizon: report.horizon,
            total_cost: report.total_cost,
            target_pulls: report.target_pulls,
            max_nontarget_pulls: report.max_nontarget_pulls,
            event_e_held: report.event_e_held,
            lemma2_ok: report.lemma2_ok,
            theorem1_ok: report.theorem1_ok,
            theorem1_bound: report.theorem1_bound,
            lower_bound_value: report.lower_bound_value,
        }
    }

    /// Every non-target arm stayed within the pull cap at the horizon.
    pub fn success(&self, theta: f64) -> bool {
        match lemma2_bound(self.horizon as f64, theta) {
            Some(cap) => self.max_nontarget_pulls <= cap,
            None => true,
        }
    }
}

/// Runs one replication on stream `(master_seed, replication)` with online
/// monitoring; the trace is not kept.
pub fn summarize(
    spec: &SimulationSpec,
    master_seed: u64,
    replication: u64,
) -> Result<ReplicationSummary> {
    let mut rng = RngStream::new(master_seed, replication);
    let mut monitor = Monitor::new(&spec.env, spec.params.delta, spec.params.theta);
    simulate_with(spec, &mut rng, |r| monitor.observe(r))?;
    Ok(ReplicationSummary::from_report(
        master_seed,
        replication,
        &monitor.report(),
    ))
}

/// Cross-replication statistics at one horizon.
///
/// Quantiles use the nearest-rank rule. Violation counts only include
/// replications where event E held, since the guarantees are conditional
/// on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub horizon: u64,
    pub replications: u64,
    pub success_rate: f64,
    pub event_e_rate: f64,
    pub cost_mean: f64,
    pub cost_median: f64,
    pub cost_p95: f64,
    pub theorem1_bound_mean: f64,
    pub lower_bound_value: f64,
    pub lemma2_violations: u64,
    pub theorem1_violations: u64,
    pub lower_bound_violations: u64,
    pub summaries: Vec<ReplicationSummary>,
}

impl AggregateStats {
    pub fn from_summaries(horizon: u64, theta: f64, summaries: Vec<ReplicationSummary>) -> Self {
        let r = summaries.len() as f64;
        let costs: Vec<f64> = summaries.iter().map(|s| s.total_cost).collect();
        let under_e = || summaries.iter().filter(|s| s.event_e_held);
        let frac = |pred: &dyn Fn(&ReplicationSummary) -> bool| {
            summaries.iter().filter(|s| pred(s)).count() as f64 / r
        };
        Self {
            horizon,
            replications: summaries.len() as u64,
            success_rate: frac(&|s| s.success(theta)),
            event_e_rate: frac(&|s| s.event_e_held),
            cost_mean: stats::mean(&costs),
            cost_median: stats::quantile_nearest_rank(&costs, 0.5),
            cost_p95: stats::quantile_nearest_rank(&costs, 0.95),
            theorem1_bound_mean: stats::mean(
                &summaries
                    .iter()
                    .map(|s| s.theorem1_bound)
                    .collect::<Vec<_>>(),
            ),
            lower_bound_value: stats::mean(
                &summaries
                    .iter()
                    .map(|s| s.lower_bound_value)
                    .collect::<Vec<_>>(),
            ),
            lemma2_violations: under_e().filter(|s| !s.lemma2_ok).count() as u64,
            theorem1_violations: under_e().filter(|s| !s.theorem1_ok).count() as u64,
            lower_bound_violations: under_e()
                .filter(|s| s.total_cost < s.lower_bound_value)
                .count() as u64,
            summaries,
        }
    }
}

/// `replications` independent runs on streams `(master_seed, 1..=R)`.
/// Replications may run in parallel; results are kept in stream order.
pub fn run_replications(
    spec: &SimulationSpec,
    replications: u64,
    master_seed: u64,
) -> Result<AggregateStats> {
    if replications == 0 {
        return Err(Error::Config("replications must be >= 1".into()));
    }
    spec.validate()?;
    let summaries = (1..=replications)
        .into_par_iter()
        .map(|i| summarize(spec, master_seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(AggregateStats::from_summaries(
        spec.horizon,
        spec.params.theta,
        summaries,
    ))
}

/// [`run_replications`] at each horizon, reusing the same streams.
pub fn run_sweep(
    spec: &SimulationSpec,
    horizons: &[u64],
    replications: u64,
    master_seed: u64,
) -> Result<Vec<AggregateStats>> {
    horizons
        .iter()
        .map(|&h| run_replications(&spec.at_horizon(h), replications, master_seed))
        .collect()
}

/// Least-squares fits of cost against `sqrt(ln T)` and against `ln T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub sqrt_log: LinearFit,
    pub log: LinearFit,
}

pub fn fit_cost_scaling(points: &[(u64, f64)]) -> Result<ScalingFit> {
    let mut distinct: Vec<u64> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Domain(format!(
            "scaling fit needs at least 3 distinct horizons, got {}",
            distinct.len()
        )));
    }
    if let Some(&(t, _)) = points.iter().find(|p| p.0 < 2) {
        return Err(Error::Domain(format!(
            "horizon {t} is too small for a log fit"
        )));
    }
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let log_t: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let sqrt_log_t: Vec<f64> = log_t.iter().map(|x| x.sqrt()).collect();
    Ok(ScalingFit {
        sqrt_log: stats::linear_fit(&sqrt_log_t, &ys)?,
        log: stats::linear_fit(&log_t, &ys)?,
    })
}
