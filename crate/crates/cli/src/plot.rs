//! Line plots as standalone SVG. The first CSV column is the abscissa; every
//! requested column becomes one polyline.

use std::fmt::Write;

use crate::output::Table;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
/// Above this many points a series is reduced to per-pixel min/max pairs.
const MAX_POINTS: usize = 4000;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Keeps the first, the min, the max and the last point of each of `buckets`
/// consecutive slices, in their original order.
pub fn decimate(x: &[f64], y: &[f64], buckets: usize) -> Vec<(f64, f64)> {
    let n = x.len().min(y.len());
    if n <= 2 * buckets.max(1) {
        return x.iter().copied().zip(y.iter().copied()).take(n).collect();
    }
    let mut out = Vec::with_capacity(4 * buckets);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = ((b + 1) * n / buckets).max(lo + 1);
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if y[i] < y[imin] {
                imin = i;
            }
            if y[i] > y[imax] {
                imax = i;
            }
        }
        let mut picks = [lo, imin, imax, hi - 1];
        picks.sort_unstable();
        for (k, i) in picks.iter().enumerate() {
            if k == 0 || *i != picks[k - 1] {
                out.push((x[*i], y[*i]));
            }
        }
    }
    out
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1e-3 + lo.abs() * 1e-3);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders `columns` of `table` against its first column. Returns an error
/// message naming the first column that does not exist.
pub fn render(table: &Table, columns: &[String]) -> Result<String, String> {
    let x_name = table.headers.first().ok_or("empty CSV header")?;
    let x = &table.columns[0];
    let mut series = Vec::new();
    for name in columns {
        let y = table.column(name).ok_or_else(|| {
            format!(
                "no column `{name}` (available: {})",
                table.headers.join(", ")
            )
        })?;
        series.push((name.as_str(), decimate(x, y, MAX_POINTS / 4)));
    }
    if series.is_empty() {
        return Err("nothing to plot".into());
    }
    let (x0, x1) = range(x.iter().copied());
    let (y0, y1) = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}"/></g>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b5}" stroke="black"/><text x="{px:.2}" y="{bt}" text-anchor="middle">{}</text>"#,
            label(xv),
            b = TOP + ph,
            b5 = TOP + ph + 5.0,
            bt = TOP + ph + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{l5}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{lt}" y="{pyt:.2}" text-anchor="end">{}</text>"#,
            label(yv),
            l5 = LEFT - 5.0,
            lt = LEFT - 8.0,
            pyt = py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + 0.5 * pw,
        HEIGHT - 10.0,
        escape(x_name)
    );
    for (j, (name, points)) in series.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let mut pts = String::with_capacity(points.len() * 16);
        for (k, (xv, yv)) in points.iter().enumerate() {
            if k > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", sx(*xv), sy(*yv));
        }
        let _ = writeln!(
            svg,
            r#"<polyline data-column="{}" fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>"#,
            escape(name)
        );
    }
    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (j, (name, _)) in series.iter().enumerate() {
        let y = TOP + 12.0 + 16.0 * j as f64;
        let x = LEFT + pw - 110.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            COLORS[j % COLORS.len()],
            x + 26.0,
            y + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(svg, "</g>\n</svg>");
    Ok(svg)
}
