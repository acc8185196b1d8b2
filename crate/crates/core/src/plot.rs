//! Minimal log-log SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const COLORS: [&str; 10] = [
    "#0072bd", "#d95319", "#edb120", "#7e2f8e", "#77ac30", "#4dbeee", "#a2142f", "#ff00bf",
    "#404040", "#00a080",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub ns: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, ns: Vec<f64>, values: Vec<f64>) -> Self {
        Series {
            label: label.into(),
            ns,
            values,
        }
    }
}

/// Dashed line `c * n^slope`, anchored at the first plotted point.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub label: String,
    pub slope: f64,
}

impl Reference {
    pub fn slope(slope: f64) -> Self {
        Reference {
            label: format!("n^{slope}"),
            slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOutcome {
    /// `None` when nothing was plottable and no file was written.
    pub svg: Option<String>,
    /// Points dropped for being nonpositive or non-finite.
    pub dropped: usize,
}

fn log_points(s: &Series) -> (Vec<(f64, f64)>, usize) {
    let mut dropped = 0;
    let mut pts = Vec::new();
    for (&n, &v) in s.ns.iter().zip(&s.values) {
        if n > 0.0 && v > 0.0 && n.is_finite() && v.is_finite() {
            pts.push((n.log10(), v.log10()));
        } else {
            dropped += 1;
        }
    }
    (pts, dropped)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the series on log-log axes.
pub fn render(title: &str, series: &[Series], references: &[Reference]) -> PlotOutcome {
    let mut dropped = 0;
    let logs: Vec<(&Series, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| {
            let (p, d) = log_points(s);
            dropped += d;
            (s, p)
        })
        .collect();
    let all: Vec<(f64, f64)> = logs.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    if all.is_empty() {
        return PlotOutcome { svg: None, dropped };
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| {
        all.iter().map(pick).fold(init, f)
    };
    let mut x0 = fold(f64::min, f64::INFINITY, |p| p.0).floor();
    let mut x1 = fold(f64::max, f64::NEG_INFINITY, |p| p.0).ceil();
    let mut y0 = fold(f64::min, f64::INFINITY, |p| p.1).floor();
    let mut y1 = fold(f64::max, f64::NEG_INFINITY, |p| p.1).ceil();
    if x1 <= x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 <= y0 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="plot"><rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    // decade grid
    for d in x0 as i64..=x1 as i64 {
        let x = sx(d as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            MARGIN_T + ph
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#,
            MARGIN_T + ph + 18.0
        );
    }
    for d in y0 as i64..=y1 as i64 {
        let y = sy(d as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            MARGIN_L + pw
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">n</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 8.0
    );

    let mut legend_y = MARGIN_T + 10.0;
    let legend_x = MARGIN_L + pw + 12.0;
    for (i, (s, pts)) in logs.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !pts.is_empty() {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let _ = writeln!(
            svg,
            r#"<line x1="{legend_x:.1}" y1="{legend_y:.1}" x2="{:.1}" y2="{legend_y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            legend_x + 20.0,
            legend_x + 26.0,
            legend_y + 4.0,
            escape(&s.label)
        );
        legend_y += 18.0;
    }

    let (ax, ay) = logs
        .iter()
        .find_map(|(_, p)| p.first().copied())
        .unwrap_or((x0, y1));
    for r in references {
        let ya = ay + r.slope * (x0 - ax);
        let yb = ay + r.slope * (x1 - ax);
        let _ = writeln!(
            svg,
            r#"<line clip-path="url(#plot)" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{legend_x:.1}" y1="{legend_y:.1}" x2="{:.1}" y2="{legend_y:.1}" stroke="black" stroke-dasharray="6,4"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            legend_x + 20.0,
            legend_x + 26.0,
            legend_y + 4.0,
            escape(&r.label)
        );
        legend_y += 18.0;
    }
    svg.push_str("</svg>\n");
    PlotOutcome {
        svg: Some(svg),
        dropped,
    }
}

/// Renders and writes the plot. Nothing is written when no point is plottable.
pub fn emit_plot(
    path: impl AsRef<Path>,
    title: &str,
    series: &[Series],
    references: &[Reference],
) -> Result<PlotOutcome> {
    let out = render(title, series, references);
    if out.dropped > 0 {
        log::warn!("{}: dropped {} nonpositive points", title, out.dropped);
    }
    match &out.svg {
        Some(svg) => std::fs::write(path, svg)?,
        None => log::warn!("{title}: nothing to plot, no file written"),
    }
    Ok(out)
}
