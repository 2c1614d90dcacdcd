//! Standalone SVG figures.

use std::fmt::Write;
use std::path::PathBuf;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Log-log scatter with one polyline per series.
    LogLog,
    /// A single curve in the plane, equal aspect.
    Trace,
    /// Circles given as `(x, y, radius)` triples, equal aspect.
    Circles,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    /// `(x, y)` points, or `(x, y, r)` for circles with `r` in `extra`.
    pub points: Vec<(f64, f64)>,
    pub extra: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, extra: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub series: Vec<Series>,
    pub x_label: String,
    pub y_label: String,
    pub output: PathBuf,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn scale(&self) -> f64 {
        (WIDTH - 2.0 * MARGIN) / (self.x1 - self.x0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(points: impl Iterator<Item = (f64, f64)>) -> Option<Frame> {
    let mut f = Frame { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
    let mut any = false;
    for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        any = true;
        f.x0 = f.x0.min(x);
        f.x1 = f.x1.max(x);
        f.y0 = f.y0.min(y);
        f.y1 = f.y1.max(y);
    }
    if !any {
        return None;
    }
    for (lo, hi) in [(&mut f.x0, &mut f.x1), (&mut f.y0, &mut f.y1)] {
        let pad = if *hi > *lo { 0.05 * (*hi - *lo) } else { 0.5 * lo.abs().max(1.0) };
        *lo -= pad;
        *hi += pad;
    }
    Some(f)
}

/// Widens the shorter side so one unit has the same length on both axes.
fn equal_aspect(mut f: Frame) -> Frame {
    let sx = (f.x1 - f.x0) / (WIDTH - 2.0 * MARGIN);
    let sy = (f.y1 - f.y0) / (HEIGHT - 2.0 * MARGIN);
    if sx > sy {
        let grow = (sx * (HEIGHT - 2.0 * MARGIN) - (f.y1 - f.y0)) / 2.0;
        f.y0 -= grow;
        f.y1 += grow;
    } else {
        let grow = (sy * (WIDTH - 2.0 * MARGIN) - (f.x1 - f.x0)) / 2.0;
        f.x0 -= grow;
        f.x1 += grow;
    }
    f
}

fn axes(out: &mut String, f: &Frame, spec: &PlotSpec, log: bool) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t);
    let tick = |v: f64| if log { format!("1e{}", v.round()) } else { format!("{v:.3}") };
    for (v, anchor) in [(f.x0, "start"), (f.x1, "end")] {
        let shown = if log { v.round() } else { v };
        if log && (shown < f.x0 || shown > f.x1) {
            continue;
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="{anchor}">{}</text>"#, f.px(shown), b + 16.0, tick(shown));
    }
    for v in [f.y0, f.y1] {
        let shown = if log { v.round() } else { v };
        if log && (shown < f.y0 || shown > f.y1) {
            continue;
        }
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, l - 4.0, f.py(shown), tick(shown));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(&spec.x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&spec.y_label)
    );
}

fn polyline(out: &mut String, f: &Frame, points: &[(f64, f64)], color: &str) {
    let coords: Vec<String> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
        .collect();
    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, coords.join(" "));
}

pub fn render(spec: &PlotSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    match spec.kind {
        PlotKind::LogLog => {
            let logged: Vec<Vec<(f64, f64)>> = spec
                .series
                .iter()
                .map(|s| s.points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect())
                .collect();
            if let Some(f) = bounds(logged.iter().flatten().copied()) {
                axes(&mut out, &f, spec, true);
                for (k, (s, pts)) in spec.series.iter().zip(&logged).enumerate() {
                    let color = COLORS[k % COLORS.len()];
                    polyline(&mut out, &f, pts, color);
                    for (x, y) in pts {
                        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(*x), f.py(*y));
                    }
                    let _ = writeln!(
                        out,
                        r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
                        WIDTH - MARGIN - 120.0,
                        MARGIN + 14.0 * (k as f64 + 1.0),
                        escape(&s.label)
                    );
                }
            }
        }
        PlotKind::Trace => {
            let all = spec.series.iter().flat_map(|s| s.points.iter().copied());
            if let Some(f) = bounds(all.chain([(0.0, 0.0)])) {
                let f = equal_aspect(f);
                axes(&mut out, &f, spec, false);
                let _ = writeln!(
                    out,
                    r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999"/>"##,
                    f.px(f.x0),
                    f.py(0.0),
                    f.px(f.x1),
                    f.py(0.0)
                );
                if let Some(s) = spec.series.first() {
                    polyline(&mut out, &f, &s.points, COLORS[0]);
                }
            }
        }
        PlotKind::Circles => {
            let extents = spec.series.iter().flat_map(|s| {
                s.points.iter().zip(&s.extra).flat_map(|(&(x, y), &r)| [(x - r, y - r), (x + r, y + r)])
            });
            if let Some(f) = bounds(extents.chain([(0.0, 0.0)])) {
                let f = equal_aspect(f);
                axes(&mut out, &f, spec, false);
                for (k, s) in spec.series.iter().enumerate() {
                    let color = COLORS[k % COLORS.len()];
                    for (&(x, y), &r) in s.points.iter().zip(&s.extra) {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="{color}" stroke-width="0.8"/>"#,
                            f.px(x),
                            f.py(y),
                            r * f.scale()
                        );
                    }
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn write(spec: &PlotSpec) -> std::io::Result<()> {
    std::fs::write(&spec.output, render(spec))
}
