//! Minimal standalone SVG charts.
//!
//! Output is plain text with fixed number formatting, so equal inputs give
//! byte-identical files.

use std::fmt::Write as _;

use crate::experiment::CorrelationMatrix;
use crate::well::{PropertyKind, WellLog};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
}

fn close(out: &mut String) {
    out.push_str("</svg>\n");
}

/// Finite min/max, widened when degenerate.
fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn scale(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

/// Polyline points, broken into runs at non-finite values.
fn runs(points: impl Iterator<Item = Option<(f64, f64)>>) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for p in points {
        match p {
            Some((x, y)) => {
                let _ = write!(cur, "{x:.2},{y:.2} ");
            }
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn axes(out: &mut String, x0: f64, y0: f64, x1: f64, y1: f64) {
    let _ = writeln!(out, r#"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y1 - y0);
}

/// One track per property with depth increasing downwards. `overlay`
/// draws (property, depth, value) points on top, e.g. predictions.
pub fn log_tracks(well: &WellLog, properties: &[PropertyKind], overlay: &[(PropertyKind, f64, f64)]) -> String {
    let n = properties.len().max(1) as f64;
    let track_w = 150.0;
    let w = MARGIN + n * (track_w + 16.0) + 16.0;
    let h = 720.0;
    let (top, bottom) = (40.0, h - 30.0);
    let mut out = String::new();
    open(&mut out, w, h, well.name());
    let depth_range = (well.header().start_depth, well.header().stop_depth);
    for (t, tick) in (0..=4).map(|i| (i as f64 / 4.0, depth_range.0 + (depth_range.1 - depth_range.0) * i as f64 / 4.0)) {
        let y = top + t * (bottom - top);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{tick:.1}</text>"#, MARGIN - 6.0);
    }
    for (i, &kind) in properties.iter().enumerate() {
        let x0 = MARGIN + i as f64 * (track_w + 16.0) + 8.0;
        let x1 = x0 + track_w;
        axes(&mut out, x0, top, x1, bottom);
        let _ = writeln!(out, r#"<text x="{:.1}" y="34" text-anchor="middle">{} ({})</text>"#, (x0 + x1) / 2.0, kind, escape(kind.unit()));
        let values = &well.curve(kind).values;
        let extra = overlay.iter().filter(|o| o.0 == kind).map(|o| o.2);
        let vr = bounds(values.iter().flatten().copied().chain(extra));
        let pts = values.iter().enumerate().map(|(r, v)| {
            v.map(|v| (scale(v, vr, x0, x1), scale(well.depth(r), depth_range, top, bottom)))
        });
        for run in runs(pts) {
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="0.8" points="{}"/>"#, PALETTE[0], run.trim_end());
        }
        let pts = overlay
            .iter()
            .filter(|o| o.0 == kind)
            .map(|o| (o.2.is_finite()).then(|| (scale(o.2, vr, x0, x1), scale(o.1, depth_range, top, bottom))));
        for run in runs(pts) {
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#, PALETTE[1], run.trim_end());
        }
    }
    close(&mut out);
    out
}

/// Truth against prediction with the identity line.
pub fn scatter(title: &str, truth: &[f64], predicted: &[f64]) -> String {
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    let (x0, y0, x1, y1) = (MARGIN, 30.0, WIDTH - 20.0, HEIGHT - MARGIN);
    axes(&mut out, x0, y0, x1, y1);
    let b = bounds(truth.iter().chain(predicted).copied());
    let _ = writeln!(
        out,
        r##"<line x1="{x0:.2}" y1="{y1:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="#999" stroke-dasharray="4 3"/>"##
    );
    for (t, p) in truth.iter().zip(predicted) {
        if t.is_finite() && p.is_finite() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{}" fill-opacity="0.6"/>"#,
                scale(*t, b, x0, x1),
                scale(*p, b, y1, y0),
                PALETTE[0]
            );
        }
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">truth</text>"#, (x0 + x1) / 2.0, HEIGHT - 18.0);
    let _ = writeln!(out, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">prediction</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0);
    let _ = writeln!(out, r#"<text x="{x0:.1}" y="{:.1}">{:.4}</text>"#, y1 + 14.0, b.0);
    let _ = writeln!(out, r#"<text x="{x1:.1}" y="{:.1}" text-anchor="end">{:.4}</text>"#, y1 + 14.0, b.1);
    close(&mut out);
    out
}

/// Named series of (x, y) points, e.g. MAPE against neighbour count.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    let (x0, y0, x1, y1) = (MARGIN, 30.0, WIDTH - 120.0, HEIGHT - MARGIN);
    axes(&mut out, x0, y0, x1, y1);
    let bx = bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let by = bounds(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    for (i, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mapped = pts
            .iter()
            .map(|&(x, y)| (x.is_finite() && y.is_finite()).then(|| (scale(x, bx, x0, x1), scale(y, by, y1, y0))));
        for run in runs(mapped) {
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, run.trim_end());
        }
        let ly = y0 + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}" fill="{colour}">{}</text>"#, x1 + 10.0, escape(name));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 18.0, escape(x_label));
    let _ = writeln!(out, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0, escape(y_label));
    let _ = writeln!(out, r#"<text x="{x0:.1}" y="{:.1}">{:.3}</text>"#, y1 + 14.0, bx.0);
    let _ = writeln!(out, r#"<text x="{x1:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, y1 + 14.0, bx.1);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{y1:.1}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, by.0);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y0 + 8.0, by.1);
    close(&mut out);
    out
}

/// Diverging red/blue cells on [-1, 1]; undefined entries are grey.
pub fn heatmap(title: &str, matrix: &CorrelationMatrix) -> String {
    let cell = 80.0;
    let (x0, y0) = (MARGIN + 10.0, 50.0);
    let size = x0 + 4.0 * cell + 20.0;
    let mut out = String::new();
    open(&mut out, size, y0 + 4.0 * cell + 20.0, title);
    for (i, a) in PropertyKind::ALL.iter().enumerate() {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{a}</text>"#, x0 - 6.0, y0 + (i as f64 + 0.5) * cell + 4.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{a}</text>"#, x0 + (i as f64 + 0.5) * cell, y0 - 6.0);
        for j in 0..4 {
            let v = matrix.values[i][j];
            let fill = match v {
                Some(r) => {
                    let t = r.clamp(-1.0, 1.0);
                    let fade = |c: f64| (255.0 - (255.0 - c) * t.abs()).round() as u8;
                    if t >= 0.0 {
                        format!("#{:02x}{:02x}{:02x}", fade(214.0), fade(39.0), fade(40.0))
                    } else {
                        format!("#{:02x}{:02x}{:02x}", fade(31.0), fade(119.0), fade(180.0))
                    }
                }
                None => "#cccccc".to_string(),
            };
            let (cx, cy) = (x0 + j as f64 * cell, y0 + i as f64 * cell);
            let _ = writeln!(out, r#"<rect x="{cx:.1}" y="{cy:.1}" width="{cell}" height="{cell}" fill="{fill}" stroke="white"/>"#);
            let label = v.map(|r| format!("{r:.2}")).unwrap_or_else(|| "n/a".into());
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, cx + cell / 2.0, cy + cell / 2.0 + 4.0);
        }
    }
    close(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{correlations, CorrelationMode};
    use crate::well::tests::full_well;

    fn well_formed(svg: &str) {
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn tracks_put_shallow_depths_on_top() {
        let w = full_well("A&B", 1000.0, 0.5, 21);
        let svg = log_tracks(&w, &PropertyKind::ALL, &[(PropertyKind::Gr, 1002.0, 55.0)]);
        well_formed(&svg);
        assert!(svg.contains("A&amp;B"));
        let top = svg.find(">1000.0<").unwrap();
        let bottom = svg.find(">1010.0<").unwrap();
        assert!(top < bottom);
        assert_eq!(svg.matches("<polyline").count(), 5);
    }

    #[test]
    fn charts_skip_non_finite_points() {
        let svg = scatter("s", &[1.0, 2.0, f64::NAN], &[1.5, 2.5, 3.0]);
        well_formed(&svg);
        assert_eq!(svg.matches("<circle").count(), 2);

        let series = vec![("GR".to_string(), vec![(0.0, 5.0), (1.0, f64::NAN), (2.0, 4.0), (3.0, 3.5)])];
        let svg = line_chart("MAPE", "k", "%", &series);
        well_formed(&svg);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn heatmap_marks_undefined_cells() {
        let mut cols = full_well("A", 0.0, 1.0, 10).curve_values();
        cols[3] = vec![Some(1.0); 10];
        let w = full_well("A", 0.0, 1.0, 10).with_curves(cols).unwrap();
        let m = correlations(&[w], CorrelationMode::Global).unwrap();
        let svg = heatmap("corr", &m);
        well_formed(&svg);
        assert_eq!(svg.matches("n/a").count(), 7);
        assert_eq!(svg, heatmap("corr", &m));
    }
}
