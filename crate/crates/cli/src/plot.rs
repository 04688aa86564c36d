//! Hand-written SVG chart of a sweep table.
//!
//! Horizon runs along a log10 x axis, cost along a linear y axis. The
//! measured mean cost is drawn as point markers; three overlay polylines show
//! the cost upper bound, the lower bound and the margin-baseline mean cost.

use std::fmt::Write as _;

use poisonbandit_core::output::{fmt_real, SweepRow};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const SERIES: [(&str, &str, &str); 3] = [
    ("theorem1_bound", "cost upper bound", "#d62728"),
    ("lower_bound", "cost lower bound", "#2ca02c"),
    ("baseline_mean_cost", "margin baseline", "#ff7f0e"),
];

fn series_value(row: &SweepRow, name: &str) -> f64 {
    match name {
        "theorem1_bound" => row.theorem1_bound_mean,
        "lower_bound" => row.lower_bound,
        "baseline_mean_cost" => row.baseline_mean_cost,
        _ => unreachable!("unknown series {name}"),
    }
}

struct Scale {
    x_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Scale {
    fn x(&self, horizon: u64) -> f64 {
        let lx = (horizon as f64).log10();
        LEFT + (lx - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, value: f64) -> f64 {
        HEIGHT - BOTTOM - value / self.y_max * (HEIGHT - TOP - BOTTOM)
    }
}

/// Renders the chart. `rows` must be non-empty.
pub fn render_svg(rows: &[SweepRow]) -> String {
    assert!(!rows.is_empty(), "render_svg needs at least one row");
    let logs: Vec<f64> = rows.iter().map(|r| (r.horizon as f64).log10()).collect();
    let mut x_min = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x_max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if x_max - x_min < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let y_top = rows
        .iter()
        .flat_map(|r| {
            [
                r.mean_cost,
                r.theorem1_bound_mean,
                r.lower_bound,
                r.baseline_mean_cost,
            ]
        })
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let scale = Scale {
        x_min,
        x_max,
        y_max: if y_top > 0.0 { y_top * 1.05 } else { 1.0 },
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<!-- poisonbandit {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // Axes.
    let (x0, y0) = (LEFT, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{TOP}"/></g>"#,
        WIDTH - RIGHT
    );
    let _ = writeln!(
        s,
        r#"<g class="x-ticks" font-family="sans-serif" font-size="11" text-anchor="middle">"#
    );
    for r in rows {
        let x = scale.x(r.horizon);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{y0}" x2="{x:.3}" y2="{}" stroke="black"/><text x="{x:.3}" y="{}">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            r.horizon
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<g class="y-ticks" font-family="sans-serif" font-size="11" text-anchor="end">"#
    );
    for i in 0..=5 {
        let v = scale.y_max * i as f64 / 5.0;
        let y = scale.y(v);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.3}" x2="{x0}" y2="{y:.3}" stroke="black"/><text x="{}" y="{:.3}">{v:.3}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">horizon T (log scale)</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 {})">cumulative attack cost</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    // Overlays.
    for (i, (name, label, color)) in SERIES.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .map(|r| {
                format!(
                    "{:.3},{:.3}",
                    scale.x(r.horizon),
                    scale.y(series_value(r, name))
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-name="{name}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{label}</text></g>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0
        );
    }

    // Measured mean cost.
    let _ = writeln!(s, r#"<g class="data" fill="black">"#);
    for r in rows {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="4"><title>horizon={} mean_cost={}</title></circle>"#,
            scale.x(r.horizon),
            scale.y(r.mean_cost),
            r.horizon,
            fmt_real(r.mean_cost)
        );
    }
    let _ = writeln!(s, "</g>");
    let ly = TOP + 20.0 * SERIES.len() as f64;
    let lx = WIDTH - RIGHT + 15.0;
    let _ = writeln!(
        s,
        r#"<g class="legend"><circle cx="{}" cy="{ly}" r="4" fill="black"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">mean attack cost</text></g>"#,
        lx + 10.0,
        lx + 25.0,
        ly + 4.0
    );
    s.push_str("</svg>\n");
    s
}
