//! CSV and SVG emission.
//!
//! CSV files have one header row and write every float with 17 significant
//! digits (`{:.16e}`), so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Full-precision, locale-independent float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a CSV with a header and rows of floats.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(fmt_f64).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV written by [`write_csv`]: header and rows of floats.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| {
            l.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| {
                        Error::Config(format!("{} row {}: bad number '{v}': {e}", path.display(), k + 2))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub style: SeriesStyle,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#555555"];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Stacked panels, one `<g class="panel">` each, every series a
/// `<polyline class="series">` (markers are drawn with a dashed stroke-less
/// polyline plus circles).
pub fn render_svg(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    for (k, panel) in panels.iter().enumerate() {
        let top = PANEL_HEIGHT * k as f64;
        let (x0, x1) = range(panel.series.iter().flat_map(|s| s.x.iter().copied()));
        let (y0, y1) = range(panel.series.iter().flat_map(|s| s.y.iter().copied()));
        let (pw, ph) = (WIDTH - 2.0 * MARGIN, PANEL_HEIGHT - 2.0 * MARGIN);
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| top + MARGIN + (1.0 - (y - y0) / (y1 - y0)) * ph;
        let _ = writeln!(s, r#"<g class="panel" data-title="{}">"#, panel.title);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#,
            top + MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, top + 30.0, panel.title);
        for (label, y) in [(y0, top + MARGIN + ph), (y1, top + MARGIN + 10.0)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{label:.3e}</text>"#, MARGIN - 4.0);
        }
        for (label, x) in [(x0, MARGIN), (x1, MARGIN + pw)] {
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" text-anchor="middle">{label:.3}</text>"#,
                top + MARGIN + ph + 16.0
            );
        }
        for (j, series) in panel.series.iter().enumerate() {
            let color = COLORS[j % COLORS.len()];
            let points: Vec<String> = series
                .x
                .iter()
                .zip(&series.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let stroke = match series.style {
                SeriesStyle::Line => format!(r#"stroke="{color}" stroke-width="1.2""#),
                SeriesStyle::Markers => r#"stroke="none""#.to_string(),
            };
            let _ = writeln!(
                s,
                r#"<polyline class="series" data-name="{}" fill="none" {stroke} points="{}"/>"#,
                series.name,
                points.join(" ")
            );
            if series.style == SeriesStyle::Markers {
                for p in &points {
                    let (cx, cy) = p.split_once(',').expect("formatted pair");
                    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="1.8" fill="none" stroke="{color}"/>"#);
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 150.0,
                top + MARGIN + 16.0 * (j as f64 + 1.0),
                series.name
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let rows = vec![vec![0.1, 1.0 / 3.0, -2.5e-300], vec![f64::MAX, 5e-324, 0.0]];
        write_csv(&path, &["x".into(), "y".into(), "z".into()], rows.clone()).unwrap();
        let (h, back) = read_csv(&path).unwrap();
        assert_eq!(h, vec!["x", "y", "z"]);
        assert_eq!(back, rows);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let series = |name: &str| Series {
            name: name.into(),
            x: vec![0.0, 1.0, 2.0],
            y: vec![1.0, 0.5, 0.25],
            style: SeriesStyle::Line,
        };
        let svg = render_svg(&[
            Panel {
                title: "rho".into(),
                series: vec![series("a"), series("b")],
            },
            Panel {
                title: "p".into(),
                series: vec![series("a")],
            },
        ]);
        assert_eq!(svg.matches(r#"class="series""#).count(), 3);
        assert_eq!(svg.matches(r#"class="panel""#).count(), 2);
    }
}
