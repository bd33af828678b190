//! Minimal self-contained SVG line charts: one metric against α, one
//! polyline of means per method over a shaded min–max band.

use std::fmt::Write as _;

use crate::records::SummaryRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-300 || !(hi - lo).is_finite() {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Render `metric` from the summary rows; returns `None` when no finite
/// values exist.
pub fn render_metric(rows: &[SummaryRow], metric: &str) -> Option<String> {
    let rows: Vec<&SummaryRow> = rows
        .iter()
        .filter(|r| r.metric == metric && r.min.is_finite() && r.max.is_finite())
        .collect();
    if rows.is_empty() {
        return None;
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in &rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let (x_lo, x_hi) = span(
        rows.iter().map(|r| r.alpha).fold(f64::INFINITY, f64::min),
        rows.iter().map(|r| r.alpha).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = span(
        rows.iter().map(|r| r.min).fold(f64::INFINITY, f64::min),
        rows.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max),
    );
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(metric)
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for (v, anchor, x, y) in [
        (y_lo, "end", x0 - 6.0, y0),
        (y_hi, "end", x0 - 6.0, y1 + 4.0),
        (x_lo, "middle", x0, y0 + 18.0),
        (x_hi, "middle", x1, y0 + 18.0),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v:.4}</text>"#
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">alpha</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    for (mi, method) in methods.iter().enumerate() {
        let color = PALETTE[mi % PALETTE.len()];
        let mut pts: Vec<&&SummaryRow> = rows.iter().filter(|r| r.method == *method).collect();
        pts.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        let upper: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.alpha), sy(r.max)))
            .collect();
        let lower: Vec<String> = pts
            .iter()
            .rev()
            .map(|r| format!("{:.2},{:.2}", sx(r.alpha), sy(r.min)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.alpha), sy(r.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for r in &pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(r.alpha),
                sy(r.mean)
            );
        }
        let ly = MARGIN + 16.0 * mi as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 110.0,
            escape(method)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}
