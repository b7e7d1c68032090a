//! Minimal SVG charts: line/step plots and orbit galleries.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
    Steps,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Self {
            label: label.into(),
            points,
            style,
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round step for about `n` ticks over `span`.
fn tick_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn fmt_tick(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize;
    format!("{:.*}", digits, if v.abs() < step * 1e-6 { 0.0 } else { v })
}

/// An XY chart with axes, ticks and a legend.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (720.0, 440.0);
    let (l, r, t, b) = (80.0, 20.0, 40.0, 60.0);
    let (x0, x1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * (w - l - r);
    let sy = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, esc(title));
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - l - r,
        h - t - b
    );
    let xs = tick_step(x1 - x0, 8.0);
    let mut v = (x0 / xs).ceil() * xs;
    while v <= x1 {
        let px = sx(v);
        let _ = writeln!(out, r##"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{t}" stroke="#ddd"/>"##, h - b);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, h - b + 16.0, fmt_tick(v, xs));
        v += xs;
    }
    let ys = tick_step(y1 - y0, 6.0);
    let mut v = (y0 / ys).ceil() * ys;
    while v <= y1 {
        let py = sy(v);
        let _ = writeln!(out, r##"<line x1="{l}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/>"##, w - r);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 6.0, py + 4.0, fmt_tick(v, ys));
        v += ys;
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + w - r) / 2.0, h - 18.0, esc(x_label));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (t + h - b) / 2.0,
        esc(y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        match s.style {
            Style::Markers => {
                for (x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(*x), sy(*y));
                }
            }
            Style::Line | Style::Steps => {
                let mut d = String::new();
                for (i, (x, y)) in pts.iter().enumerate() {
                    if i == 0 {
                        let _ = write!(d, "M{:.2},{:.2}", sx(*x), sy(*y));
                    } else {
                        if s.style == Style::Steps {
                            let _ = write!(d, " H{:.2}", sx(*x));
                        }
                        let _ = write!(d, " L{:.2},{:.2}", sx(*x), sy(*y));
                    }
                }
                let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
            }
        }
        let ly = t + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            l + 10.0,
            ly - 9.0,
            l + 26.0,
            ly,
            esc(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// A grid of small closed-path panels with equal axis scaling inside each panel.
pub fn orbit_gallery(title: &str, unit_label: &str, panels: &[(String, Vec<[f64; 2]>)], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let cell = 120.0;
    let (w, h) = (columns as f64 * cell, rows as f64 * cell + 40.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, esc(title));
    let _ = writeln!(out, r#"<text x="{}" y="32" text-anchor="middle">{}</text>"#, w / 2.0, esc(unit_label));
    for (k, (label, pts)) in panels.iter().enumerate() {
        let (cx, cy) = ((k % columns) as f64 * cell, (k / columns) as f64 * cell + 40.0);
        let _ = writeln!(out, r##"<rect x="{cx}" y="{cy}" width="{cell}" height="{cell}" fill="none" stroke="#ccc"/>"##);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, cx + 4.0, cy + 12.0, esc(label));
        let finite: Vec<[f64; 2]> = pts.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
        if finite.len() < 2 {
            continue;
        }
        let (a0, a1) = padded_range(finite.iter().map(|p| p[0]));
        let (b0, b1) = padded_range(finite.iter().map(|p| p[1]));
        let span = (a1 - a0).max(b1 - b0);
        let scale = (cell - 24.0) / span;
        let (ma, mb) = ((a0 + a1) / 2.0, (b0 + b1) / 2.0);
        let mut d = String::new();
        for (i, p) in finite.iter().enumerate() {
            let x = cx + cell / 2.0 + (p[0] - ma) * scale;
            let y = cy + cell / 2.0 + 6.0 - (p[1] - mb) * scale;
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        let _ = writeln!(out, r##"<path d="{d}" fill="none" stroke="#1f77b4" stroke-width="1"/>"##);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed_and_deterministic() {
        let s = vec![Series::new("a<b", vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)], Style::Steps)];
        let a = line_plot("t", "x", "y", &s);
        assert_eq!(a, line_plot("t", "x", "y", &s));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains("a&lt;b"));
        let g = orbit_gallery("g", "mm", &[("1 Hz".into(), vec![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])], 4);
        assert!(g.contains("<path"));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(tick_step(10.0, 5.0), 2.0);
        assert!((tick_step(0.003, 6.0) - 5e-4).abs() < 1e-18);
    }
}
