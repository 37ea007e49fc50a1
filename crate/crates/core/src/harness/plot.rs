//! Self-contained SVG chart of mean simple regret with a ±1 stderr band.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::csv::{read_csv, CsvRow};
use crate::error::{io_err, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Per-algorithm curve: `(t, mean, stderr)` sorted by `t`.
pub type Curve = Vec<(f64, f64, f64)>;

/// Averages regret across runs at each `t`, keyed by algorithm name.
pub fn aggregate(rows: &[CsvRow]) -> BTreeMap<String, Curve> {
    let mut acc: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        acc.entry(r.algo.clone())
            .or_default()
            .entry(r.t)
            .or_default()
            .push(r.simple_regret);
    }
    acc.into_iter()
        .map(|(algo, by_t)| {
            let curve = by_t
                .into_iter()
                .map(|(t, vals)| {
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let se = if vals.len() > 1 {
                        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                        (var / n).sqrt()
                    } else {
                        0.0
                    };
                    (t as f64, mean, se)
                })
                .collect();
            (algo, curve)
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the SVG document for already aggregated curves.
pub fn render_svg(curves: &BTreeMap<String, Curve>, log_y: bool) -> String {
    let points = curves.values().flatten();
    let t_max = points.clone().map(|p| p.0).fold(0.0, f64::max).max(1.0);
    let floor = points
        .clone()
        .flat_map(|p| [p.1 - p.2, p.1])
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1e-6 };
    let y_hi = points.clone().map(|p| p.1 + p.2).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = if log_y { floor } else { points.clone().map(|p| (p.1 - p.2).min(0.0)).fold(0.0, f64::min) };
    let y_hi = if y_hi.is_finite() && y_hi > y_lo { y_hi } else { y_lo + 1.0 };
    let ty = |v: f64| -> f64 {
        let (a, b, x) = if log_y {
            (y_lo.log10(), y_hi.log10(), v.max(floor).log10())
        } else {
            (y_lo, y_hi, v)
        };
        let span = if b > a { b - a } else { 1.0 };
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - (x - a) / span)
    };
    let tx = |t: f64| LEFT + (WIDTH - LEFT - RIGHT) * t / t_max;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        "<path d=\"M{x0},{y0} L{x0},{y1} L{x1},{y1}\" stroke=\"black\" fill=\"none\"/>"
    );
    for i in 0..=4 {
        let t = t_max * i as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            tx(t),
            y1 + 18.0,
            t.round()
        );
        let v = if log_y {
            10f64.powf(y_lo.log10() + (y_hi.log10() - y_lo.log10()) * i as f64 / 4.0)
        } else {
            y_lo + (y_hi - y_lo) * i as f64 / 4.0
        };
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{:.3e}</text>",
            x0 - 6.0,
            ty(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">t</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">simple regret</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (i, (algo, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper: Vec<String> = curve
            .iter()
            .map(|&(t, m, e)| format!("{:.2},{:.2}", tx(t), ty(m + e)))
            .collect();
        let lower: Vec<String> = curve
            .iter()
            .rev()
            .map(|&(t, m, e)| format!("{:.2},{:.2}", tx(t), ty(m - e)))
            .collect();
        let _ = writeln!(
            s,
            "<polygon points=\"{} {}\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"none\"/>",
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = curve
            .iter()
            .map(|&(t, m, _)| format!("{:.2},{:.2}", tx(t), ty(m)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline class=\"mean\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            line.join(" ")
        );
        let ly = TOP + 20.0 * i as f64 + 10.0;
        let _ = writeln!(
            s,
            "<g class=\"legend\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"14\" height=\"4\" fill=\"{color}\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\">{}</text></g>",
            x1 + 12.0,
            ly - 2.0,
            x1 + 32.0,
            ly + 4.0,
            escape(algo)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Reads a results CSV and writes the chart.
pub fn emit_plot(csv_path: &Path, out_path: &Path, log_y: bool) -> Result<()> {
    let rows = read_csv(csv_path)?;
    let svg = render_svg(&aggregate(&rows), log_y);
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(out_path, svg).map_err(|e| io_err(out_path, e))
}
