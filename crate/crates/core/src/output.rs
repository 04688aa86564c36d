//! Serialized artifacts.
//!
//! Text outputs start with `#` comment lines carrying the tool version, the
//! generator identity and the config snapshot. Reals are written with 17
//! significant digits so they parse back to the same `f64`. Arm ids are
//! 1-based.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::env::GENERATOR_ID;
use crate::harness::{AggregateStats, MonitorReport, ReplicationSummary, Trace};
use crate::{Error, Result};

pub const TRACE_COLUMNS: [&str; 7] = [
    "round",
    "arm",
    "pre_reward",
    "alpha",
    "post_reward",
    "cum_cost",
    "target_pulls",
];

pub const SWEEP_COLUMNS: [&str; 13] = [
    "horizon",
    "replications",
    "mean_cost",
    "median_cost",
    "p95_cost",
    "success_rate",
    "event_e_rate",
    "theorem1_bound_mean",
    "lower_bound",
    "baseline_mean_cost",
    "lemma2_violations",
    "theorem1_violations",
    "lower_bound_violations",
];

/// 17 significant digits, round-trip exact.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the `#` header block shared by every text artifact.
pub fn write_header<W: Write>(
    w: &mut W,
    config: &ExperimentConfig,
    extra: &[(&str, String)],
) -> io::Result<()> {
    writeln!(w, "# poisonbandit {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# generator: {GENERATOR_ID}")?;
    writeln!(w, "# config: {}", config.to_json_line())?;
    for (k, v) in extra {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(
    w: &mut W,
    config: &ExperimentConfig,
    trace: &Trace,
) -> io::Result<()> {
    write_header(
        w,
        config,
        &[
            ("master_seed", trace.master_seed.to_string()),
            ("stream", trace.stream_index.to_string()),
        ],
    )?;
    writeln!(w, "{}", TRACE_COLUMNS.join(","))?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.t,
            r.arm + 1,
            fmt_real(r.pre_reward),
            fmt_real(r.alpha),
            fmt_real(r.post_reward),
            fmt_real(r.cum_cost),
            r.target_pulls
        )?;
    }
    Ok(())
}

/// One JSON object per line.
pub fn write_summaries<W: Write>(
    w: &mut W,
    config: &ExperimentConfig,
    summaries: &[ReplicationSummary],
) -> Result<()> {
    write_header(w, config, &[])?;
    for s in summaries {
        serde_json::to_writer(&mut *w, s)?;
        writeln!(w)?;
    }
    Ok(())
}

/// JSON cannot carry comments, so the report embeds the header fields.
#[derive(Debug, Serialize)]
struct MonitorDocument<'a> {
    tool: String,
    generator: &'a str,
    config: &'a ExperimentConfig,
    master_seed: u64,
    stream: u64,
    report: &'a MonitorReport,
}

pub fn write_monitor_report<W: Write>(
    w: &mut W,
    config: &ExperimentConfig,
    master_seed: u64,
    stream: u64,
    report: &MonitorReport,
) -> Result<()> {
    let doc = MonitorDocument {
        tool: format!("poisonbandit {}", env!("CARGO_PKG_VERSION")),
        generator: GENERATOR_ID,
        config,
        master_seed,
        stream,
        report,
    };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    Ok(())
}

/// One row of the per-horizon sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub horizon: u64,
    pub replications: u64,
    pub mean_cost: f64,
    pub median_cost: f64,
    pub p95_cost: f64,
    pub success_rate: f64,
    pub event_e_rate: f64,
    pub theorem1_bound_mean: f64,
    pub lower_bound: f64,
    pub baseline_mean_cost: f64,
    pub lemma2_violations: u64,
    pub theorem1_violations: u64,
    pub lower_bound_violations: u64,
}

impl SweepRow {
    pub fn new(stats: &AggregateStats, baseline: &AggregateStats) -> Self {
        Self {
            horizon: stats.horizon,
            replications: stats.replications,
            mean_cost: stats.cost_mean,
            median_cost: stats.cost_median,
            p95_cost: stats.cost_p95,
            success_rate: stats.success_rate,
            event_e_rate: stats.event_e_rate,
            theorem1_bound_mean: stats.theorem1_bound_mean,
            lower_bound: stats.lower_bound_value,
            baseline_mean_cost: baseline.cost_mean,
            lemma2_violations: stats.lemma2_violations,
            theorem1_violations: stats.theorem1_violations,
            lower_bound_violations: stats.lower_bound_violations,
        }
    }
}

pub fn write_sweep_csv<W: Write>(
    w: &mut W,
    config: &ExperimentConfig,
    rows: &[SweepRow],
) -> io::Result<()> {
    write_header(
        w,
        config,
        &[("baseline", "margin attack on the same streams".into())],
    )?;
    writeln!(w, "{}", SWEEP_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.horizon,
            r.replications,
            fmt_real(r.mean_cost),
            fmt_real(r.median_cost),
            fmt_real(r.p95_cost),
            fmt_real(r.success_rate),
            fmt_real(r.event_e_rate),
            fmt_real(r.theorem1_bound_mean),
            fmt_real(r.lower_bound),
            fmt_real(r.baseline_mean_cost),
            r.lemma2_violations,
            r.theorem1_violations,
            r.lower_bound_violations,
        )?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(cells: &[&str], idx: usize, name: &str, line: usize) -> Result<T> {
    cells
        .get(idx)
        .and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| Error::Config(format!("line {line}: bad or missing `{name}`")))
}

/// Reads a sweep table. Comment lines are skipped and columns are located by
/// header name.
pub fn read_sweep_csv<R: BufRead>(r: R) -> Result<Vec<SweepRow>> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let Some(cols) = &header else {
            header = Some(cells.iter().map(|c| c.trim().to_string()).collect());
            continue;
        };
        let col = |name: &str| {
            cols.iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Config(format!("sweep CSV has no `{name}` column")))
        };
        rows.push(SweepRow {
            horizon: field(&cells, col("horizon")?, "horizon", line_no)?,
            replications: field(&cells, col("replications")?, "replications", line_no)?,
            mean_cost: field(&cells, col("mean_cost")?, "mean_cost", line_no)?,
            median_cost: field(&cells, col("median_cost")?, "median_cost", line_no)?,
            p95_cost: field(&cells, col("p95_cost")?, "p95_cost", line_no)?,
            success_rate: field(&cells, col("success_rate")?, "success_rate", line_no)?,
            event_e_rate: field(&cells, col("event_e_rate")?, "event_e_rate", line_no)?,
            theorem1_bound_mean: field(
                &cells,
                col("theorem1_bound_mean")?,
                "theorem1_bound_mean",
                line_no,
            )?,
            lower_bound: field(&cells, col("lower_bound")?, "lower_bound", line_no)?,
            baseline_mean_cost: field(
                &cells,
                col("baseline_mean_cost")?,
                "baseline_mean_cost",
                line_no,
            )?,
            lemma2_violations: field(
                &cells,
                col("lemma2_violations")?,
                "lemma2_violations",
                line_no,
            )?,
            theorem1_violations: field(
                &cells,
                col("theorem1_violations")?,
                "theorem1_violations",
                line_no,
            )?,
            lower_bound_violations: field(
                &cells,
                col("lower_bound_violations")?,
                "lower_bound_violations",
                line_no,
            )?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_simulation;

    fn config() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            "means = [1.0, 0.0]\nsigma = 0.1\nlearner = \"ucb\"\nattack = \"adaptive\"\nhorizon = 50\nseed = 1\n",
        )
        .unwrap()
    }

    #[test]
    fn trace_csv_layout() {
        let cfg = config();
        let trace = run_simulation(&cfg.simulation_spec(50).unwrap(), 1, 1).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &cfg, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], TRACE_COLUMNS.join(","));
        assert_eq!(body.len(), 51);
        assert!(text.contains(GENERATOR_ID));
        // First round is the target arm, reported 1-based.
        assert!(body[1].starts_with("1,2,"));
        for (line, rec) in body[1..].iter().zip(&trace.records) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(
                cells[2].parse::<f64>().unwrap().to_bits(),
                rec.pre_reward.to_bits()
            );
            assert_eq!(
                cells[5].parse::<f64>().unwrap().to_bits(),
                rec.cum_cost.to_bits()
            );
        }
    }

    #[test]
    fn sweep_csv_reads_back() {
        let row = SweepRow {
            horizon: 1000,
            replications: 10,
            mean_cost: 1.0 / 3.0,
            median_cost: 0.3,
            p95_cost: 0.9,
            success_rate: 1.0,
            event_e_rate: 0.95,
            theorem1_bound_mean: 12.5,
            lower_bound: 1.1,
            baseline_mean_cost: 40.0,
            lemma2_violations: 0,
            theorem1_violations: 0,
            lower_bound_violations: 1,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &config(), std::slice::from_ref(&row)).unwrap();
        let rows = read_sweep_csv(&buf[..]).unwrap();
        assert_eq!(rows, vec![row]);
    }

    #[test]
    fn sweep_csv_missing_column() {
        let text = "horizon,mean_cost\n10,1.0\n";
        assert!(read_sweep_csv(text.as_bytes()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn reals_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            proptest::prop_assert_eq!(fmt_real(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
