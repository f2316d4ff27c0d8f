//! Minimal line plots: fixed 800×600 canvas, linear axes labeled with their
//! extremes, one polyline per series and a legend.

use std::fmt::Write as _;
use std::path::Path;

use super::manifest::TOOL_VERSION;
use crate::error::{Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 70.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            x,
            y,
        }
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 0.5 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn label(v: f64) -> String {
    format!("{v:.6}")
}

/// Renders the series to an SVG document. The second line is a version
/// comment; everything else depends only on the data.
pub fn render_svg(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Domain("nothing to plot".into()));
    }
    for s in series {
        if s.x.len() != s.y.len() || s.x.is_empty() {
            return Err(Error::Domain(format!(
                "series `{}` needs matching nonempty x and y",
                s.name
            )));
        }
        for (index, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite {
                    series: s.name.clone(),
                    index,
                });
            }
        }
    }
    let (x0, x1) = range(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = range(series.iter().flat_map(|s| s.y.iter().copied()));
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

    let mut o = String::new();
    let _ = writeln!(o, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(o, "<!-- {TOOL_VERSION} -->");
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right) = (MARGIN_LEFT, MARGIN_LEFT + pw);
    let (top, bottom) = (MARGIN_TOP, MARGIN_TOP + ph);
    let _ = writeln!(
        o,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    let text = |o: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            o,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="13" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    };
    text(&mut o, left, bottom + 20.0, "start", &label(x0));
    text(&mut o, right, bottom + 20.0, "end", &label(x1));
    text(&mut o, left - 6.0, bottom, "end", &label(y0));
    text(&mut o, left - 6.0, top + 10.0, "end", &label(y1));
    text(
        &mut o,
        0.5 * (left + right),
        HEIGHT - 20.0,
        "middle",
        x_label,
    );
    let _ = writeln!(
        o,
        r#"<text x="20" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom),
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut points = String::new();
        for (i, (x, y)) in s.x.iter().zip(&s.y).enumerate() {
            if i > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", px(*x), py(*y));
        }
        let _ = writeln!(
            o,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
        let ly = top + 18.0 * (k as f64 + 1.0);
        let _ = writeln!(
            o,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            right - 170.0,
            ly - 4.0,
            right - 145.0,
            ly - 4.0
        );
        text(&mut o, right - 140.0, ly, "start", &s.name);
    }
    o.push_str("</svg>\n");
    Ok(o)
}

pub fn write_svg(path: &Path, series: &[Series], x_label: &str, y_label: &str) -> Result<()> {
    std::fs::write(path, render_svg(series, x_label, y_label)?)?;
    Ok(())
}
