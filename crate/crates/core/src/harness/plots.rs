//! Minimal SVG line plots of run diagnostics.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::asymptotics::ScaledProfile;
use crate::error::{Error, Result};
use crate::special::CriticalOuterSpec;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One labelled polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, x: &[f64], y: &[f64]) -> Self {
        Series {
            label: label.into(),
            points: x.iter().copied().zip(y.iter().copied()).collect(),
        }
    }
}

/// A plot: axes labels, series and an optional dashed horizontal reference.
#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub reference: Option<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo <= hi) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

/// Renders `plot` as a standalone SVG document. Every series needs at least
/// two points; non-finite values break the polyline.
pub fn render_svg(plot: &Plot) -> Result<String> {
    if plot.series.is_empty() {
        return Err(Error::ShortSeries { needed: 2, got: 0 });
    }
    for s in &plot.series {
        if s.points.len() < 2 {
            return Err(Error::ShortSeries {
                needed: 2,
                got: s.points.len(),
            });
        }
    }
    let xs = plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = plot.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).chain(plot.reference);
    let (x0, x1) = range(xs);
    let (y0, y1) = range(ys);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let (xv, yv) = (x0 + (x1 - x0) * k as f64 / 4.0, y0 + (y1 - y0) * k as f64 / 4.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="11">{:.3}</text>"#,
            px(xv),
            b + 16.0,
            xv
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{:.3}</text>"#,
            l - 4.0,
            py(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&plot.y_label)
    );
    if let Some(y) = plot.reference {
        let _ = writeln!(
            svg,
            r#"<path class="reference" d="M{l:.2},{:.2} L{r:.2},{:.2}" stroke="gray" stroke-dasharray="4 4"/>"#,
            py(y),
            py(y)
        );
    }
    for (i, s) in plot.series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y));
            pen_down = true;
        }
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            svg,
            r#"<path class="series" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            r - 150.0,
            t + 16.0 * (i as f64 + 1.0),
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Per-checkpoint diagnostic series of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub t: Vec<f64>,
    pub mass_ratio: Vec<f64>,
    pub support_minus: Vec<f64>,
    pub support_plus: Vec<f64>,
    pub weighted_error: Vec<f64>,
    pub outer_error: Vec<f64>,
}

/// Writes the four standard panels into `dir`: mass ratio, support ratios
/// and error functionals against `log t`, and the scaled profile against
/// `F_*`.
pub fn emit_plots(dir: &Path, d: &Diagnostics, profile: &ScaledProfile, spec: &CriticalOuterSpec) -> Result<Vec<PathBuf>> {
    let log_t: Vec<f64> = d.t.iter().map(|t| t.ln()).collect();
    let f_star: Vec<f64> = profile.xi.iter().map(|&x| spec.f_star(x)).collect();
    let panels = [
        (
            "mass_ratio.svg",
            Plot {
                title: "mass ratio log t · M(t) / (2m M_φ*)".into(),
                x_label: "log t".into(),
                y_label: "ratio".into(),
                series: vec![Series::new("mass ratio", &log_t, &d.mass_ratio)],
                reference: Some(1.0),
            },
        ),
        (
            "support_ratio.svg",
            Plot {
                title: "support radii over ξ* t^{1/2m} (log t)^{-(m-1)/2m}".into(),
                x_label: "log t".into(),
                y_label: "ratio".into(),
                series: vec![
                    Series::new("ζ₋", &log_t, &d.support_minus),
                    Series::new("ζ₊", &log_t, &d.support_plus),
                ],
                reference: Some(1.0),
            },
        ),
        (
            "errors.svg",
            Plot {
                title: "error functionals".into(),
                x_label: "log t".into(),
                y_label: "error".into(),
                series: vec![
                    Series::new("inner (weighted)", &log_t, &d.weighted_error),
                    Series::new("outer", &log_t, &d.outer_error),
                ],
                reference: None,
            },
        ),
        (
            "profile.svg",
            Plot {
                title: format!("scaled profile at log t = {:.3}", profile.tau),
                x_label: "ξ̃".into(),
                y_label: "w".into(),
                series: vec![Series::new("w", &profile.xi, &profile.w), Series::new("F_*", &profile.xi, &f_star)],
                reference: None,
            },
        ),
    ];
    let mut out = Vec::new();
    for (name, plot) in panels {
        let path = dir.join(name);
        std::fs::write(&path, render_svg(&plot)?)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(series: Vec<Series>) -> Plot {
        Plot {
            title: "t <&>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series,
            reference: None,
        }
    }

    #[test]
    fn single_point_series_is_rejected() {
        let e = render_svg(&plot(vec![Series::new("a", &[1.0], &[1.0])])).unwrap_err();
        assert!(e.to_string().contains("need ≥ 2 points"), "{e}");
    }

    #[test]
    fn constant_series_draws_a_horizontal_line() {
        let svg = render_svg(&plot(vec![Series::new("one", &[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0])])).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let path = doc.descendants().find(|n| n.attribute("class") == Some("series")).unwrap();
        let ys: Vec<&str> = path
            .attribute("d")
            .unwrap()
            .split_whitespace()
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(ys.len(), 3);
        assert!(ys.iter().all(|y| *y == ys[0]));
    }

    #[test]
    fn emitted_panels_are_well_formed() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CriticalOuterSpec::new(2.0, 3.0).unwrap();
        let d = Diagnostics {
            t: vec![10.0, 100.0, 1000.0],
            mass_ratio: vec![0.7, 0.8, 0.85],
            support_minus: vec![1.1, 1.08, 1.06],
            support_plus: vec![1.1, 1.08, 1.06],
            weighted_error: vec![0.5, 0.4, f64::NAN],
            outer_error: vec![0.4, 0.3, 0.25],
        };
        let xi: Vec<f64> = (0..20).map(|k| k as f64 * 0.25).collect();
        let w = xi.iter().map(|&x| spec.f_star(x) * 1.05).collect();
        let files = emit_plots(dir.path(), &d, &ScaledProfile { tau: 6.9, xi, w }, &spec).unwrap();
        assert_eq!(files.len(), 4);
        for f in files {
            roxmltree::Document::parse(&std::fs::read_to_string(f).unwrap()).unwrap();
        }
    }
}
