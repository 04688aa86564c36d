//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p poisonbandit-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use poisonbandit_core::attacks::beta;
use poisonbandit_core::config::ExperimentConfig;
use poisonbandit_core::harness::{lemma2_bound, run_round, simulate_with, Simulation};
use poisonbandit_core::output::write_trace_csv;
use poisonbandit_core::{
    fit_cost_scaling, run_replications, run_simulation, run_sweep, AggregateStats, AttackKind,
    AttackParams, EGreedyParams, EnvironmentConfig, LearnerKind, RngStream, SimulationSpec,
};

const MASTER_SEED: u64 = 20_240_601;
const GRID: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
const DELTA: f64 = 0.05;
const THETA: f64 = 1.1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(
    means: Vec<f64>,
    sigma: f64,
    horizon: u64,
    learner: LearnerKind,
    attack: AttackKind,
) -> SimulationSpec {
    let env = EnvironmentConfig::new(means, sigma, None).unwrap();
    let mut params = AttackParams::with_sigma(sigma);
    params.delta = DELTA;
    params.theta = THETA;
    SimulationSpec {
        env,
        horizon,
        learner,
        attack,
        params,
    }
}

fn two_arm(horizon: u64, learner: LearnerKind, attack: AttackKind) -> SimulationSpec {
    spec(vec![1.0, 0.0], 0.1, horizon, learner, attack)
}

fn ten_arm(horizon: u64) -> SimulationSpec {
    let means = (0..10)
        .map(|i| if i == 9 { 0.0 } else { 1.0 - 0.1 * i as f64 })
        .collect();
    spec(means, 0.1, horizon, LearnerKind::Ucb, AttackKind::Adaptive)
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

fn ratios(stats: &[AggregateStats], scale: impl Fn(f64) -> f64) -> Vec<f64> {
    stats
        .iter()
        .map(|s| s.cost_mean / scale((s.horizon as f64).ln()))
        .collect()
}

fn points(stats: &[AggregateStats]) -> Vec<(u64, f64)> {
    stats.iter().map(|s| (s.horizon, s.cost_mean)).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", cells.join(", "))
}

/// Pull cap, checked only in event-E replications.
fn lemma2_outcome(stats: &AggregateStats) -> (bool, String) {
    let under_e = stats.summaries.iter().filter(|s| s.event_e_held).count();
    let worst = stats
        .summaries
        .iter()
        .map(|s| s.max_nontarget_pulls)
        .max()
        .unwrap_or(0);
    (
        stats.lemma2_violations == 0,
        format!(
            "{} violations in {under_e} event-E runs, worst non-target pulls {worst}, cap at T {}",
            stats.lemma2_violations,
            lemma2_bound(stats.horizon as f64, THETA).unwrap()
        ),
    )
}

fn theorem1_outcome(stats: &AggregateStats) -> (bool, String) {
    let worst_ratio = stats
        .summaries
        .iter()
        .filter(|s| s.event_e_held)
        .map(|s| s.total_cost / s.theorem1_bound)
        .fold(0.0, f64::max);
    (
        stats.theorem1_violations == 0,
        format!(
            "{} violations, max cost/bound {worst_ratio:.3}",
            stats.theorem1_violations
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, outcome: Outcome| {
        println!(
            "[{}] {name}: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        results.push((name, outcome));
    };

    // 1-3: K = 2, adaptive attack, T = 1e5, 200 replications.
    let start = Instant::now();
    let k2 = run_replications(
        &two_arm(100_000, LearnerKind::Ucb, AttackKind::Adaptive),
        200,
        MASTER_SEED,
    )
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "C1 event E frequency (K=2, T=1e5, R=200) >= 0.92, under 60 s",
        Outcome {
            pass: k2.event_e_rate >= 1.0 - DELTA - 0.03 && elapsed < 60.0,
            detail: format!("rate {:.3}, {elapsed:.1} s", k2.event_e_rate),
        },
    );

    let k10 = run_replications(&ten_arm(100_000), 200, MASTER_SEED).unwrap();
    let (p2, d2) = lemma2_outcome(&k2);
    let (p10, d10) = lemma2_outcome(&k10);
    report(
        "C2 pull cap ceil(log_1.1 sqrt(ln t)) at every t >= 3 under event E",
        Outcome {
            pass: p2 && p10 && lemma2_bound(1e5, THETA) == Some(13),
            detail: format!("K=2: {d2}; K=10: {d10}"),
        },
    );

    let (t2, dt2) = theorem1_outcome(&k2);
    let (t10, dt10) = theorem1_outcome(&k10);
    report(
        "C3 total cost <= per-arm cost bound under event E (K=2 and K=10)",
        Outcome {
            pass: t2 && t10,
            detail: format!(
                "K=2: {dt2}; K=10: {dt10} (event E rate {:.3})",
                k10.event_e_rate
            ),
        },
    );

    // 4-5: adaptive sweep.
    let adaptive = run_sweep(
        &two_arm(1_000, LearnerKind::Ucb, AttackKind::Adaptive),
        &GRID,
        100,
        MASTER_SEED,
    )
    .unwrap();
    let sqrt_ratios = ratios(&adaptive, f64::sqrt);
    let fit = fit_cost_scaling(&points(&adaptive)).unwrap();
    report(
        "C4 adaptive cost/sqrt(ln T) spread <= 2 and sqrt(ln T) fit R^2 > ln T fit R^2",
        Outcome {
            pass: spread(&sqrt_ratios) <= 2.0 && fit.sqrt_log.r_squared > fit.log.r_squared,
            detail: format!(
                "mean costs {}, ratios {}, spread {:.3}, R^2 sqrt {:.4} vs log {:.4}",
                fmt_vec(&adaptive.iter().map(|s| s.cost_mean).collect::<Vec<_>>()),
                fmt_vec(&sqrt_ratios),
                spread(&sqrt_ratios),
                fit.sqrt_log.r_squared,
                fit.log.r_squared
            ),
        },
    );

    let lb_violations: u64 = adaptive.iter().map(|s| s.lower_bound_violations).sum();
    let min_margin = adaptive
        .iter()
        .flat_map(|s| s.summaries.iter().filter(|r| r.event_e_held))
        .map(|r| r.total_cost - r.lower_bound_value)
        .fold(f64::MAX, f64::min);
    report(
        "C5 cost >= gap + 0.5 sigma sqrt(ln 0.99T) in every event-E run of C4",
        Outcome {
            pass: lb_violations == 0,
            detail: format!("{lb_violations} violations, min cost - bound {min_margin:.3}"),
        },
    );

    // 6: constant-margin baseline on UCB and on epsilon-greedy (c = 1).
    let margin_ucb = run_sweep(
        &two_arm(1_000, LearnerKind::Ucb, AttackKind::Margin),
        &GRID,
        100,
        MASTER_SEED,
    )
    .unwrap();
    let ucb_ratios = ratios(&margin_ucb, |l| l);
    let ucb_fit = fit_cost_scaling(&points(&margin_ucb)).unwrap();
    let egreedy = LearnerKind::EGreedy(EGreedyParams::new(1.0).unwrap());
    let margin_eg = run_sweep(
        &two_arm(1_000, egreedy, AttackKind::Margin),
        &GRID,
        100,
        MASTER_SEED,
    )
    .unwrap();
    let eg_fit = fit_cost_scaling(&points(&margin_eg)).unwrap();
    let ucb_ok = spread(&ucb_ratios) <= 2.0 && ucb_fit.log.r_squared >= 0.9;
    let eg_ok = eg_fit.log.r_squared >= 0.9 && eg_fit.log.slope > 0.0;
    report(
        "C6 margin attack cost ~ ln T (UCB: spread <= 2, R^2 >= 0.9; eps-greedy: R^2 >= 0.9)",
        Outcome {
            pass: ucb_ok && eg_ok,
            detail: format!(
                "UCB {}: costs {}, cost/ln T {}, spread {:.3}, R^2 {:.4}; eps-greedy {}: costs {}, slope {:.3}, R^2 {:.4}",
                if ucb_ok { "ok" } else { "FAILED" },
                fmt_vec(&margin_ucb.iter().map(|s| s.cost_mean).collect::<Vec<_>>()),
                fmt_vec(&ucb_ratios),
                spread(&ucb_ratios),
                ucb_fit.log.r_squared,
                if eg_ok { "ok" } else { "FAILED" },
                fmt_vec(&margin_eg.iter().map(|s| s.cost_mean).collect::<Vec<_>>()),
                eg_fit.log.slope,
                eg_fit.log.r_squared
            ),
        },
    );

    // 7: oracle attack, K = 5.
    let horizon = 10_000u64;
    let oracle_spec = spec(
        vec![1.0, 0.75, 0.5, 0.25, 0.0],
        0.1,
        horizon,
        LearnerKind::Ucb,
        AttackKind::Oracle {
            known_horizon: Some(horizon),
        },
    );
    let oracle = run_replications(&oracle_spec, 200, MASTER_SEED).unwrap();
    let once = oracle
        .summaries
        .iter()
        .filter(|s| s.max_nontarget_pulls == 1)
        .count() as f64
        / 200.0;
    let k = 5.0;
    let cost_cap = 1.5 * (k - 1.0) * (1.0 + 3.0 * 0.1 + 3.0 * 0.1 * (horizon as f64).ln().sqrt());
    let worst_cost = oracle
        .summaries
        .iter()
        .map(|s| s.total_cost)
        .fold(0.0, f64::max);
    report(
        "C7 oracle attack: non-target arms pulled once in >= 95% of runs, cost <= 1.5(K-1)(gap + c sigma + 3 sigma sqrt(ln T))",
        Outcome {
            pass: once >= 0.95 && worst_cost <= cost_cap,
            detail: format!("once-rate {once:.3}, max cost {worst_cost:.3} vs cap {cost_cap:.3}"),
        },
    );

    // 8: determinism and accounting.
    report(
        "C8 byte-identical reruns and exact cost accounting",
        determinism_and_accounting(),
    );

    // 9: beta.
    let mut monotone = true;
    for &k in &[2usize, 10] {
        for &delta in &[0.05, 0.5] {
            let mut prev = beta(1, 1.0, k, delta).unwrap();
            for n in 2..=1_000_000u64 {
                let b = beta(n, 1.0, k, delta).unwrap();
                monotone &= b <= prev;
                prev = b;
            }
        }
    }
    let b1 = beta(1, 1.0, 2, 0.05).unwrap();
    report(
        "C9 beta non-increasing on [1, 1e6] and beta(1) = 3.1240 +- 1e-4",
        Outcome {
            pass: monotone && (b1 - 3.1240).abs() <= 1e-4,
            detail: format!("monotone {monotone}, beta(1) {b1:.6}"),
        },
    );

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn determinism_and_accounting() -> Outcome {
    let mut problems = Vec::new();
    let configs = [
        ("ucb", "adaptive"),
        ("ucb", "margin"),
        ("ucb", "oracle"),
        ("ucb", "none"),
        ("egreedy", "adaptive"),
        ("egreedy", "margin"),
    ];
    for (learner, attack) in configs {
        let text = format!(
            "means = [1.0, 0.4, 0.0]\nsigma = 0.2\nlearner = \"{learner}\"\nattack = \"{attack}\"\nhorizon = 20000\nseed = 77\n"
        );
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        let spec = cfg.simulation_spec(20_000).unwrap();

        let render = || {
            let trace = run_simulation(&spec, cfg.seed, 1).unwrap();
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &cfg, &trace).unwrap();
            buf
        };
        if render() != render() {
            problems.push(format!("{learner}/{attack}: rerun not byte-identical"));
        }

        // Accounting, checked after every round.
        let mut sim = Simulation::new(&spec).unwrap();
        let mut rng = RngStream::new(cfg.seed, 1);
        let mut abs_sum = 0.0;
        for _ in 0..spec.horizon {
            let rec = run_round(
                &spec.env,
                &spec.learner,
                &mut sim.learner,
                &mut sim.attacker,
                &mut rng,
            )
            .unwrap();
            abs_sum += rec.alpha.abs();
            if rec.cum_cost != abs_sum || rec.post_reward != rec.pre_reward - rec.alpha {
                problems.push(format!(
                    "{learner}/{attack}: cost bookkeeping off at t={}",
                    rec.t
                ));
                break;
            }
            let l = &sim.learner;
            let a = &sim.attacker;
            let bad = (0..spec.env.num_arms()).find(|&i| {
                let n = l.pulls()[i].max(1) as f64;
                (l.post_sums()[i] - (a.pre_sums()[i] - a.spend()[i])).abs() > 1e-9 * n
            });
            if let Some(i) = bad {
                problems.push(format!(
                    "{learner}/{attack}: post/pre/spend identity off for arm {} at t={}",
                    i + 1,
                    rec.t
                ));
                break;
            }
        }

        // The streaming path sees the same records as the stored trace.
        let stored = run_simulation(&spec, cfg.seed, 2).unwrap().records;
        let mut streamed = Vec::new();
        simulate_with(&spec, &mut RngStream::new(cfg.seed, 2), |r| {
            streamed.push(*r)
        })
        .unwrap();
        if stored != streamed {
            problems.push(format!(
                "{learner}/{attack}: streamed and stored traces differ"
            ));
        }
    }
    Outcome {
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            "6 configurations, 20000 rounds each".into()
        } else {
            problems.join("; ")
        },
    }
}
