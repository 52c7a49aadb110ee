//! Minimal SVG line plots with a logarithmic y axis.
//!
//! Output depends only on the input numbers: coordinates are printed with a
//! fixed number of decimals and the axis bounds are stored on the root
//! element as `data-x-min`, `data-x-max`, `data-y-min` and `data-y-max` so
//! they can be read back exactly.

use std::fmt::Write;

/// Smallest value shown on a log axis; smaller (and nonpositive) values
/// are drawn at this floor.
pub const LOG_FLOOR: f64 = 1e-10;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"];

/// One named polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Axis ranges used for a set of series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// x spans the data; y spans `[max(LOG_FLOOR, smallest positive y),
    /// largest y]`, widened by a decade each way if degenerate.
    pub fn of(series: &[Series]) -> Option<Self> {
        let points: Vec<(f64, f64)> = series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if points.is_empty() {
            return None;
        }
        let x_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let mut x_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        if x_max <= x_min {
            x_max = x_min + 1.0;
        }
        let positive = points.iter().map(|p| p.1).filter(|&y| y > 0.0);
        let mut y_min = positive.clone().fold(f64::INFINITY, f64::min).max(LOG_FLOOR);
        let mut y_max = positive.fold(f64::NEG_INFINITY, f64::max).max(LOG_FLOOR);
        if !y_min.is_finite() {
            y_min = LOG_FLOOR;
        }
        if y_max <= y_min {
            y_min = (y_min / 10.0).max(LOG_FLOOR);
            y_max = y_max.max(y_min) * 10.0;
        }
        Some(Self { x_min, x_max, y_min, y_max })
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series into a standalone SVG document. Returns `None` when
/// there is nothing to draw.
pub fn render(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Option<String> {
    let b = Bounds::of(series)?;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let (ly_min, ly_max) = (b.y_min.log10(), b.y_max.log10());
    let sx = |x: f64| LEFT + (x - b.x_min) / (b.x_max - b.x_min) * plot_w;
    let sy = |y: f64| {
        let ly = y.max(b.y_min).min(b.y_max).log10();
        TOP + (ly_max - ly) / (ly_max - ly_min) * plot_h
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-x-min="{:e}" data-x-max="{:e}" data-y-min="{:e}" data-y-max="{:e}" data-y-scale="log">"#,
        b.x_min, b.x_max, b.y_min, b.y_max
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // decade grid lines and labels
    let first = ly_min.ceil() as i32;
    let last = ly_max.floor() as i32;
    let step = ((last - first) / 8 + 1).max(1);
    let mut e = first;
    while e <= last {
        let y = sy(10f64.powi(e));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{e}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
        e += step;
    }
    // x ticks at up to 10 evenly spaced values
    for k in 0..=10 {
        let x = b.x_min + (b.x_max - b.x_min) * k as f64 / 10.0;
        let px = sx(x);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333333" stroke-width="1"/>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            format_tick(x)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    for (k, series) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = series
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && !y.is_nan())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-series="{}" data-points="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&series.name),
            points.len(),
            points.join(" ")
        );
        let ly = TOP + 16.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 22.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn format_tick(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.2}")
    }
}

/// Reads a `data-*` attribute of the root element back as `f64`.
pub fn read_bound(svg: &str, name: &str) -> Option<f64> {
    let key = format!("{name}=\"");
    let start = svg.find(&key)? + key.len();
    let end = start + svg[start..].find('"')?;
    svg[start..end].parse().ok()
}
