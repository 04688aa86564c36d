use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use poisonbandit_core::config::{AttackChoice, ExperimentConfig, Horizon};
use poisonbandit_core::harness::Monitor;
use poisonbandit_core::output::{self, SweepRow};
use poisonbandit_core::{
    fit_cost_scaling, run_replications, run_simulation, run_sweep, AggregateStats, AttackKind,
    Error, ReplicationSummary, Result,
};

use crate::plot::render_svg;
use crate::ConfigArgs;

/// Stream used by `run`; replications use streams `1..=R`.
const RUN_STREAM: u64 = 1;

/// Reads the config and applies command-line overrides.
fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(h) = &args.horizon {
        cfg.horizon = match h.as_slice() {
            [t] => Horizon::Single(*t),
            many => Horizon::Sweep(many.to_vec()),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn run(args: &ConfigArgs, out: &Path, strict: bool) -> Result<ExitCode> {
    let cfg = load(args)?;
    let horizon = match cfg.horizons().as_slice() {
        [t] => *t,
        _ => {
            return Err(Error::Config(
                "`run` takes a single horizon; use `sweep` for a horizon list".into(),
            ))
        }
    };
    let spec = cfg.simulation_spec(horizon)?;
    let trace = run_simulation(&spec, cfg.seed, RUN_STREAM)?;
    let report = Monitor::run(&trace, spec.params.delta, spec.params.theta);
    let summary = ReplicationSummary::from_report(cfg.seed, RUN_STREAM, &report);

    let mut w = create(out, "trace.csv")?;
    output::write_trace_csv(&mut w, &cfg, &trace)?;
    w.flush()?;
    let mut w = create(out, "summary.jsonl")?;
    output::write_summaries(&mut w, &cfg, std::slice::from_ref(&summary))?;
    w.flush()?;
    let mut w = create(out, "monitor.json")?;
    output::write_monitor_report(&mut w, &cfg, cfg.seed, RUN_STREAM, &report)?;
    w.flush()?;

    println!("{}", serde_json::to_string(&summary)?);
    if strict && report.violated() {
        eprintln!(
            "guarantee violated: lemma2_ok={} (first violation {:?}), theorem1_ok={}",
            report.lemma2_ok, report.lemma2_first_violation, report.theorem1_ok
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn sweep(args: &ConfigArgs, out: &Path) -> Result<ExitCode> {
    let cfg = load(args)?;
    let horizons = cfg.horizons();
    let spec = cfg.simulation_spec(horizons[0])?;
    let stats = run_sweep(&spec, &horizons, cfg.replications, cfg.seed)?;
    let mut baseline_spec = spec.clone();
    baseline_spec.attack = AttackKind::Margin;
    let baseline = run_sweep(&baseline_spec, &horizons, cfg.replications, cfg.seed)?;

    let rows: Vec<SweepRow> = stats
        .iter()
        .zip(&baseline)
        .map(|(s, b)| SweepRow::new(s, b))
        .collect();
    let mut w = create(out, "sweep.csv")?;
    output::write_sweep_csv(&mut w, &cfg, &rows)?;
    w.flush()?;

    let summaries: Vec<ReplicationSummary> = stats
        .iter()
        .flat_map(|s| s.summaries.iter().cloned())
        .collect();
    let mut w = create(out, "summaries.jsonl")?;
    output::write_summaries(&mut w, &cfg, &summaries)?;
    w.flush()?;

    println!("horizon  mean_cost  baseline_cost  success_rate  event_e_rate");
    for r in &rows {
        println!(
            "{:>7}  {:>9.4}  {:>13.4}  {:>12.3}  {:>12.3}",
            r.horizon, r.mean_cost, r.baseline_mean_cost, r.success_rate, r.event_e_rate
        );
    }

    let pts = |v: &[AggregateStats]| {
        v.iter()
            .map(|s| (s.horizon, s.cost_mean))
            .collect::<Vec<_>>()
    };
    match (
        fit_cost_scaling(&pts(&stats)),
        fit_cost_scaling(&pts(&baseline)),
    ) {
        (Ok(attack_fit), Ok(baseline_fit)) => {
            let doc = serde_json::json!({
                "attack": attack_fit,
                "baseline": baseline_fit,
            });
            let mut w = create(out, "fit.json")?;
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
            println!(
                "fit (attack): sqrt(ln T) R^2 {:.4}, ln T R^2 {:.4}",
                attack_fit.sqrt_log.r_squared, attack_fit.log.r_squared
            );
            println!(
                "fit (baseline): sqrt(ln T) R^2 {:.4}, ln T R^2 {:.4}",
                baseline_fit.sqrt_log.r_squared, baseline_fit.log.r_squared
            );
        }
        (Err(e), _) | (_, Err(e)) => eprintln!("skipping scaling fit: {e}"),
    }
    Ok(ExitCode::SUCCESS)
}

struct Check {
    name: String,
    pass: bool,
}

fn checks_for(cfg: &ExperimentConfig, stats: &AggregateStats) -> Vec<Check> {
    let mut checks = Vec::new();
    let threshold = 1.0 - cfg.delta - 0.03;
    checks.push(Check {
        name: format!("event E rate {:.3} >= {threshold:.3}", stats.event_e_rate),
        pass: stats.event_e_rate >= threshold,
    });
    match cfg.attack {
        AttackChoice::Adaptive => {
            checks.push(Check {
                name: format!("pull-cap violations under E: {}", stats.lemma2_violations),
                pass: stats.lemma2_violations == 0,
            });
            checks.push(Check {
                name: format!(
                    "cost-bound violations under E: {}",
                    stats.theorem1_violations
                ),
                pass: stats.theorem1_violations == 0,
            });
            if cfg.means.len() == 2 {
                checks.push(Check {
                    name: format!(
                        "lower-bound violations under E: {}",
                        stats.lower_bound_violations
                    ),
                    pass: stats.lower_bound_violations == 0,
                });
            }
        }
        AttackChoice::Oracle => {
            let r = stats.summaries.len() as f64;
            let once = stats
                .summaries
                .iter()
                .filter(|s| s.max_nontarget_pulls == 1)
                .count() as f64
                / r;
            checks.push(Check {
                name: format!("non-target arms pulled once in {once:.3} of runs (>= 0.95)"),
                pass: once >= 0.95,
            });
            let env = cfg.environment().expect("validated config");
            let k = env.num_arms() as f64;
            let cap = 1.5
                * (k - 1.0)
                * (env.max_gap_plus()
                    + cfg.c_oracle * cfg.sigma
                    + 3.0 * cfg.sigma * (stats.horizon as f64).ln().sqrt());
            let worst = stats
                .summaries
                .iter()
                .map(|s| s.total_cost)
                .fold(0.0, f64::max);
            checks.push(Check {
                name: format!("max cost {worst:.4} <= {cap:.4}"),
                pass: worst <= cap,
            });
        }
        AttackChoice::None | AttackChoice::Margin => {}
    }
    checks
}

pub fn validate(args: &ConfigArgs, out: Option<&Path>) -> Result<ExitCode> {
    let cfg = load(args)?;
    let mut all_pass = true;
    let mut summaries = Vec::new();
    for horizon in cfg.horizons() {
        let spec = cfg.simulation_spec(horizon)?;
        let stats = run_replications(&spec, cfg.replications, cfg.seed)?;
        println!(
            "T={horizon} R={} event_E_rate={:.3} success_rate={:.3} mean_cost={:.4} p95_cost={:.4} \
             lemma2_violations={} theorem1_violations={} lower_bound_violations={}",
            stats.replications,
            stats.event_e_rate,
            stats.success_rate,
            stats.cost_mean,
            stats.cost_p95,
            stats.lemma2_violations,
            stats.theorem1_violations,
            stats.lower_bound_violations
        );
        for c in checks_for(&cfg, &stats) {
            println!("  [{}] {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
            all_pass &= c.pass;
        }
        summaries.extend(stats.summaries);
    }
    if let Some(dir) = out {
        let mut w = create(dir, "summaries.jsonl")?;
        output::write_summaries(&mut w, &cfg, &summaries)?;
        w.flush()?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

pub fn plot(stats: &Path, out: &Path) -> Result<ExitCode> {
    let file = File::open(stats)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", stats.display())))?;
    let rows = output::read_sweep_csv(BufReader::new(file))?;
    if rows.is_empty() {
        return Err(Error::Config(format!(
            "{} has no data rows",
            stats.display()
        )));
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(out, render_svg(&rows))?;
    Ok(ExitCode::SUCCESS)
}
