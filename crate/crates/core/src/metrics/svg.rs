//! Minimal SVG charts for the report. No styling beyond a fixed palette.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 48.0;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Draw the y = x chance diagonal.
    pub diagonal: bool,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, ox: f64, title: &str, x_label: &str, y_label: &str, y_max: f64) {
    let (x0, y0) = (ox + MARGIN, MARGIN);
    let (w, h) = (PANEL_W - 1.5 * MARGIN, PANEL_H - 2.0 * MARGIN);
    let _ = writeln!(out, r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444"/>"##);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, x0 + w / 2.0, y0 - 12.0, esc(title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, x0 + w / 2.0, y0 + h + 32.0, esc(x_label));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="11" transform="rotate(-90 {} {})">{}</text>"#,
        ox + 14.0, y0 + h / 2.0, ox + 14.0, y0 + h / 2.0, esc(y_label)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let y = y0 + h * (1.0 - f);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" font-size="9">{:.2}</text>"#, x0 - 4.0, y + 3.0, f * y_max);
    }
}

/// Side-by-side line panels on the unit square.
pub fn line_panels(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{}\" font-family=\"sans-serif\">\n",
        PANEL_H + 20.0 * panels.iter().map(|p| p.series.len()).max().unwrap_or(0) as f64
    );
    for (i, p) in panels.iter().enumerate() {
        let ox = i as f64 * PANEL_W;
        frame(&mut out, ox, &p.title, &p.x_label, &p.y_label, 1.0);
        let (x0, y0) = (ox + MARGIN, MARGIN);
        let (w, h) = (PANEL_W - 1.5 * MARGIN, PANEL_H - 2.0 * MARGIN);
        let at = |x: f64, y: f64| (x0 + w * x.clamp(0.0, 1.0), y0 + h * (1.0 - y.clamp(0.0, 1.0)));
        if p.diagonal {
            let (a, b) = (at(0.0, 0.0), at(1.0, 1.0));
            let _ = writeln!(out, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##, a.0, a.1, b.0, b.1);
        }
        for (k, s) in p.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| {
                let (px, py) = at(x, y);
                format!("{px:.1},{py:.1}")
            }).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, pts.join(" "));
            let ly = PANEL_H + 4.0 + 16.0 * k as f64;
            let _ = writeln!(out, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, x0, ly - 9.0);
            let _ = writeln!(out, r#"<text x="{}" y="{ly}" font-size="10">{}</text>"#, x0 + 14.0, esc(&s.name));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: one group per category, one bar per series.
pub fn grouped_bars(title: &str, y_label: &str, categories: &[String], series: &[Series]) -> String {
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(0.0_f64, f64::max)
        .max(1e-9);
    let y_top = if y_max <= 1.0 { 1.0 } else { y_max * 1.1 };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL_W}\" height=\"{}\" font-family=\"sans-serif\">\n",
        PANEL_H + 16.0 * series.len() as f64 + 8.0
    );
    frame(&mut out, 0.0, title, "", y_label, y_top);
    let (x0, y0) = (MARGIN, MARGIN);
    let (w, h) = (PANEL_W - 1.5 * MARGIN, PANEL_H - 2.0 * MARGIN);
    let group_w = w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (c, cat) in categories.iter().enumerate() {
        let gx = x0 + group_w * c as f64 + group_w * 0.1;
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="9">{}</text>"#, gx + group_w * 0.4, y0 + h + 14.0, esc(cat));
        for (k, s) in series.iter().enumerate() {
            let Some(&(_, v)) = s.points.get(c) else { continue };
            if !v.is_finite() {
                continue;
            }
            let bh = h * (v / y_top).clamp(0.0, 1.0);
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                gx + bar_w * k as f64, y0 + h - bh, bar_w, bh, PALETTE[k % PALETTE.len()]
            );
        }
    }
    for (k, s) in series.iter().enumerate() {
        let ly = PANEL_H + 4.0 + 16.0 * k as f64;
        let _ = writeln!(out, r#"<rect x="{x0}" y="{}" width="10" height="10" fill="{}"/>"#, ly - 9.0, PALETTE[k % PALETTE.len()]);
        let _ = writeln!(out, r#"<text x="{}" y="{ly}" font-size="10">{}</text>"#, x0 + 14.0, esc(&s.name));
    }
    out.push_str("</svg>\n");
    out
}
