//! Standalone SVG line charts. No scripts, fonts or external references.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICK_LEN: f64 = 6.0;
const TARGET_TICKS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub x_label: String,
    pub y_label: String,
}

impl ChartSeries {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        ChartSeries {
            label: label.into(),
            points,
            x_label: String::new(),
            y_label: String::new(),
        }
    }

    pub fn with_axes(mut self, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        self.x_label = x_label.into();
        self.y_label = y_label.into();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidChart(format!("series '{}' has no points", self.label)));
        }
        if self.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidChart(format!("series '{}' has non-finite points", self.label)));
        }
        if self.points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidChart(format!(
                "series '{}': x must be strictly increasing",
                self.label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub title: String,
    pub width: f64,
    pub height: f64,
    /// Horizontal dashed line, e.g. at y = π.
    pub reference_y: Option<(f64, String)>,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            title: String::new(),
            width: 720.0,
            height: 440.0,
            reference_y: None,
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn nice_step(raw: f64) -> f64 {
    let exp = raw.log10().floor();
    let base = 10f64.powf(exp);
    let frac = raw / base;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * base
}

/// Axis covering `[lo, hi]` on a 1-2-5 grid. Returns (ticks, step).
pub(crate) fn axis_ticks(lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let (lo, hi) = if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let pad = (lo.abs() * 0.05).max(0.5);
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    };
    let step = nice_step((hi - lo) / (TARGET_TICKS - 1) as f64);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    let ticks = (first..=last).map(|k| k as f64 * step).collect();
    (ticks, step)
}

fn tick_label(value: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let text = format!("{:.*}", decimals, value);
    if text.starts_with('-') && text[1..].chars().all(|c| c == '0' || c == '.') {
        text[1..].to_string()
    } else {
        text
    }
}

/// Renders one polyline per series on shared axes.
pub fn render_line_chart(series: &[ChartSeries], opts: &ChartOptions) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidChart("no series to plot".into()));
    }
    for s in series {
        s.validate()?;
    }

    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if let Some((r, _)) = &opts.reference_y {
        y_min = y_min.min(*r);
        y_max = y_max.max(*r);
    }
    let (x_ticks, x_step) = axis_ticks(x_min, x_max);
    let (y_ticks, y_step) = axis_ticks(y_min, y_max);
    let (x_lo, x_hi) = (x_ticks[0], *x_ticks.last().unwrap());
    let (y_lo, y_hi) = (y_ticks[0], *y_ticks.last().unwrap());

    let plot_w = opts.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = opts.height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;
    let bottom = MARGIN_TOP + plot_h;

    let mut svg = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, opts.width, opts.height);
    if !opts.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text class="title" x="{:.2}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
            opts.width / 2.0,
            escape(&opts.title)
        );
    }

    let _ = writeln!(svg, r#"<g class="x-axis" stroke="black">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{bottom:.2}" x2="{:.2}" y2="{bottom:.2}"/>"#,
        MARGIN_LEFT,
        MARGIN_LEFT + plot_w
    );
    for &t in &x_ticks {
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            bottom + TICK_LEN
        );
        let _ = writeln!(
            svg,
            r#"<text class="tick-label" x="{x:.2}" y="{:.2}" text-anchor="middle" stroke="none">{}</text>"#,
            bottom + TICK_LEN + 14.0,
            tick_label(t, x_step)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="y-axis" stroke="black">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT:.2}" y1="{MARGIN_TOP:.2}" x2="{MARGIN_LEFT:.2}" y2="{bottom:.2}"/>"#
    );
    for &t in &y_ticks {
        let y = py(t);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT:.2}" y2="{y:.2}"/>"#,
            MARGIN_LEFT - TICK_LEN
        );
        let _ = writeln!(
            svg,
            r#"<text class="tick-label" x="{:.2}" y="{:.2}" text-anchor="end" stroke="none">{}</text>"#,
            MARGIN_LEFT - TICK_LEN - 4.0,
            y + 4.0,
            tick_label(t, y_step)
        );
    }
    let _ = writeln!(svg, "</g>");

    let first = &series[0];
    let _ = writeln!(
        svg,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        opts.height - 14.0,
        escape(&first.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text class="y-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&first.y_label)
    );

    if let Some((r, label)) = &opts.reference_y {
        let y = py(*r);
        let _ = writeln!(
            svg,
            r#"<line class="reference" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text class="reference-label" x="{:.2}" y="{:.2}" text-anchor="end" fill="gray">{}</text>"#,
            MARGIN_LEFT + plot_w - 4.0,
            y - 4.0,
            escape(label)
        );
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let legend_y = MARGIN_TOP + 8.0 + 16.0 * i as f64;
        let legend_x = MARGIN_LEFT + 12.0;
        let _ = writeln!(
            svg,
            r#"<rect class="legend-key" x="{legend_x:.2}" y="{:.2}" width="14" height="3" fill="{color}"/>"#,
            legend_y - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text class="legend" x="{:.2}" y="{legend_y:.2}">{}</text>"#,
            legend_x + 20.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
