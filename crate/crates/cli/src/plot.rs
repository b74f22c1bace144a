//! Minimal SVG line charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi > lo {
        Some((lo, hi))
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        Some((lo - pad, hi + pad))
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    /// Renders the chart. Points with non-finite coordinates (or
    /// non-positive x on a log axis) are dropped.
    pub fn to_svg(&self) -> String {
        let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0);
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let all = || self.series.iter().flat_map(|s| s.points.iter().copied().filter(keep));
        let (x0, x1) = extent(all().map(|p| tx(p.0))).unwrap_or((0.0, 1.0));
        let (y0, y1) = extent(all().map(|p| p.1)).unwrap_or((0.0, 1.0));
        let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * (W - LEFT - RIGHT);
        let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&self.title));
        let (bx, by) = (H - BOTTOM, W - RIGHT);
        let _ = writeln!(svg, r#"<path d="M{LEFT},{TOP} V{bx} H{by}" fill="none" stroke="black"/>"#);

        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let label = if self.log_x { format!("1e{xv:.1}") } else { format!("{xv:.3e}") };
            let x = LEFT + f * (W - LEFT - RIGHT);
            let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, H - BOTTOM + 18.0);
            let yv = y0 + f * (y1 - y0);
            let y = H - BOTTOM - f * (H - TOP - BOTTOM);
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3e}</text>"#, LEFT - 6.0, y + 4.0);
        }
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(&self.x_label));
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );

        for (n, s) in self.series.iter().enumerate() {
            let colour = COLOURS[n % COLOURS.len()];
            let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(keep).map(|(x, y)| (px(x), py(y))).collect();
            match s.style {
                Style::Line => {
                    let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, d.join(" "));
                }
                Style::Markers => {
                    for (x, y) in pts {
                        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{colour}"/>"#);
                    }
                }
            }
            let ly = TOP + 8.0 + 16.0 * n as f64;
            let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#, W - RIGHT - 150.0, ly - 9.0);
            let _ = writeln!(svg, r#"<text x="{}" y="{ly}">{}</text>"#, W - RIGHT - 134.0, escape(&s.name));
        }
        svg.push_str("</svg>\n");
        svg
    }
}
