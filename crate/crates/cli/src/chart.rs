//! A small SVG line chart: points with vertical error bars, joined by a
//! polyline, and an optional fitted straight line.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const TICKS: usize = 5;

pub struct Series {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// `(x, y, y_low, y_high)`.
    pub points: Vec<(f64, f64, f64, f64)>,
    /// `(slope, intercept)`.
    pub line: Option<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

pub fn render(s: &Series) -> String {
    let finite: Vec<&(f64, f64, f64, f64)> = s
        .points
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    let xs = finite.iter().map(|p| p.0);
    let ys = finite
        .iter()
        .flat_map(|p| [p.1, p.2, p.3])
        .filter(|v| v.is_finite());
    let (x0, x1) = padded(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = padded(
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    let f = Frame { x0, x1, y0, y1 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&s.title)
    );

    // axes and ticks
    let (bx, by) = (MARGIN_L, HEIGHT - MARGIN_B);
    let _ = writeln!(
        out,
        r#"<path d="M{bx:.1},{MARGIN_T:.1} V{by:.1} H{:.1}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN_R
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            r#"<line x1="{px:.1}" y1="{by:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            by + 5.0,
            by + 18.0,
            label(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{bx:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            bx - 5.0,
            bx - 8.0,
            py + 4.0,
            label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        escape(&s.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&s.y_label)
    );

    if let Some((slope, intercept)) = s.line {
        let (ya, yb) = (slope * x0 + intercept, slope * x1 + intercept);
        let _ = writeln!(
            out,
            r#"<line class="fit" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            f.px(x0),
            f.py(ya),
            f.px(x1),
            f.py(yb)
        );
    }
    if finite.len() > 1 {
        let path: Vec<String> = finite
            .iter()
            .map(|p| format!("{:.1},{:.1}", f.px(p.0), f.py(p.1)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="data" points="{}" fill="none" stroke="steelblue"/>"#,
            path.join(" ")
        );
    }
    for p in &finite {
        let (px, py) = (f.px(p.0), f.py(p.1));
        if p.2.is_finite() && p.3.is_finite() {
            let _ = writeln!(
                out,
                r#"<line class="band" x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="steelblue"/>"#,
                f.py(p.2),
                f.py(p.3)
            );
        }
        let _ = writeln!(
            out,
            r#"<circle class="point" cx="{px:.1}" cy="{py:.1}" r="3.5" fill="steelblue"/>"#
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_bands_and_fit() {
        let s = Series {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            points: vec![
                (4.0, 1.0, 0.9, 1.1),
                (9.0, 2.0, 1.8, 2.3),
                (16.0, 3.5, 3.0, 4.0),
            ],
            line: Some((0.2, 0.1)),
        };
        let svg = render(&s);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="point""#).count(), 3);
        assert_eq!(svg.matches(r#"class="band""#).count(), 3);
        assert_eq!(svg.matches(r#"class="fit""#).count(), 1);
        assert!(svg.contains("t &lt;1&gt;"));
    }

    #[test]
    fn empty_series_is_still_valid() {
        let s = Series {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            points: vec![],
            line: None,
        };
        let svg = render(&s);
        assert!(!svg.contains("NaN"));
        assert!(svg.contains("</svg>"));
    }
}
