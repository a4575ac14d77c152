use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use degenpop::Trajectory;

use crate::error::{CliError, CliResult};

pub const POPULATION_COLUMNS: [&str; 5] = ["P1", "P2", "P3_per_state", "P3_total", "norm"];

/// Fixed 17-significant-digit scientific form; `-0` is written as `0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// `P1, P2, P3 per spectator, P3 summed over spectators, |a|`.
pub fn population_fields(pops: &[f64]) -> [f64; 5] {
    let n = pops.len();
    let p3_total: f64 = pops.iter().skip(2).sum();
    let p3 = if n > 2 { p3_total / (n - 2) as f64 } else { 0.0 };
    let norm = pops.iter().sum::<f64>().sqrt();
    [pops[0], pops.get(1).copied().unwrap_or(0.0), p3, p3_total, norm]
}

pub fn push_row(csv: &mut String, fields: impl IntoIterator<Item = String>) {
    let row: Vec<String> = fields.into_iter().collect();
    csv.push_str(&row.join(","));
    csv.push('\n');
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub values: Vec<f64>,
    pub dash: Option<&'a str>,
}

/// Population curves from a trajectory, styled as P1 long-dash, P2 solid,
/// and the summed spectators short-dash.
pub fn population_series(traj: &Trajectory) -> Vec<Series<'static>> {
    let fields: Vec<[f64; 5]> = traj.populations.iter().map(|p| population_fields(p)).collect();
    let column = |k: usize| fields.iter().map(|f| f[k]).collect();
    let mut series = vec![
        Series {
            label: "P1",
            values: column(0),
            dash: Some("12 6"),
        },
        Series {
            label: "P2",
            values: column(1),
            dash: None,
        },
    ];
    if traj.n_states() > 2 {
        series.push(Series {
            label: "(n-2) P3",
            values: column(3),
            dash: Some("3 3"),
        });
    }
    series
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Self-contained line plot of populations in `[0, 1]` against `x`.
pub fn svg_plot(x: &[f64], x_label: &str, series: &[Series]) -> String {
    let (x_min, x_max) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (x_min, x_max) = if x.is_empty() {
        (0.0, 1.0)
    } else if x_max > x_min {
        (x_min, x_max)
    } else {
        (x_min - 0.5, x_min + 0.5)
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (v - x_min) / (x_max - x_min) * plot_w;
    let py = |v: f64| TOP + (1.0 - v) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    for i in 0..=5 {
        let v = x_min + (x_max - x_min) * i as f64 / 5.0;
        let x = px(v);
        let y0 = TOP + plot_h;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">population</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, ser) in series.iter().enumerate() {
        let dash = ser
            .dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let points: Vec<String> = x
            .iter()
            .zip(&ser.values)
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b.clamp(-0.05, 1.05))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-width="1.5"{dash} points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="black" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 36.0,
            lx + 44.0,
            ly + 4.0,
            ser.label
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
