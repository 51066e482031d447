use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::Summary;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "svg" | "svg-plot" => Ok(OutputFormat::Svg),
            other => Err(Error::invalid(format!("unknown output format {other:?}"))),
        }
    }
}

/// Writes the summary to `path`. Nothing is created for an empty summary.
pub fn emit(summary: &Summary, format: OutputFormat, path: &Path, sweep_label: &str) -> Result<()> {
    if summary.is_empty() {
        return Err(Error::invalid("nothing to emit: summary is empty"));
    }
    let body = match format {
        OutputFormat::Csv => summary.to_csv(),
        OutputFormat::Svg => render_svg(summary, sweep_label)?,
    };
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const WIDTH: f64 = 680.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 80.0;

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Line chart of mean Hamming error against the sweep value, one polyline
/// per estimator. When the realized separation is known, its mean is
/// printed under each sweep tick.
pub fn render_svg(summary: &Summary, sweep_label: &str) -> Result<String> {
    if summary.is_empty() {
        return Err(Error::invalid("nothing to plot: summary is empty"));
    }
    let mut xs = summary.sweep_values();
    xs.sort_by(f64::total_cmp);
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let x_span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let y_max = summary.rows.iter().map(|r| r.mean_hamming).fold(0.0, f64::max).max(1e-3) * 1.05;
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| if x1 > x0 { LEFT + (x - x0) / x_span * pw } else { LEFT + pw / 2.0 };
    let py = |y: f64| TOP + ph - y / y_max * ph;

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(w, r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{0}"/></g>"#, TOP + ph, LEFT + pw).unwrap();

    for &x in &xs {
        let cx = px(x);
        writeln!(w, r#"<line x1="{cx:.2}" y1="{0}" x2="{cx:.2}" y2="{1}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0).unwrap();
        writeln!(w, r#"<text x="{cx:.2}" y="{0}" text-anchor="middle">{1}</text>"#, TOP + ph + 18.0, tick(x)).unwrap();
        if let Some(r) = summary.realized.iter().find(|r| r.sweep_value == x) {
            writeln!(w, r#"<text x="{cx:.2}" y="{0}" text-anchor="middle" fill="gray" font-size="10">κ̄≈{1}</text>"#, TOP + ph + 32.0, tick(r.mean_kappa_bar)).unwrap();
        }
    }
    for k in 0..=5 {
        let y = y_max * k as f64 / 5.0;
        let cy = py(y);
        writeln!(w, r#"<line x1="{0}" y1="{cy:.2}" x2="{LEFT}" y2="{cy:.2}" stroke="black"/>"#, LEFT - 5.0).unwrap();
        writeln!(w, r#"<text x="{0}" y="{1:.2}" text-anchor="end">{2}</text>"#, LEFT - 8.0, cy + 4.0, tick(y)).unwrap();
    }
    writeln!(w, r#"<text x="{0}" y="{1}" text-anchor="middle">{2}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, xml_escape(sweep_label)).unwrap();
    writeln!(w, r#"<text transform="translate(18 {0}) rotate(-90)" text-anchor="middle">mean Hamming error</text>"#, TOP + ph / 2.0).unwrap();

    for (k, est) in summary.estimators().into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = summary
            .rows
            .iter()
            .filter(|r| r.estimator == est)
            .map(|r| (r.sweep_value, r.mean_hamming))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#, coords.join(" "), xml_escape(est)).unwrap();
        for &(x, y) in &pts {
            writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y)).unwrap();
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 15.0;
        writeln!(w, r#"<line x1="{lx}" y1="{ly}" x2="{0}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{1}" y="{2}">{3}</text>"#, lx + 25.0, lx + 32.0, ly + 4.0, xml_escape(est)).unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
