//! Minimal self-contained SVG line plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"];

#[derive(Debug, Clone, Default)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(label: impl Into<String>) -> Self {
        Axis { label: label.into(), log: false }
    }

    pub fn log(label: impl Into<String>) -> Self {
        Axis { label: label.into(), log: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    #[default]
    Points,
    Line,
    Dashed,
}

#[derive(Debug, Clone, Default)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Debug, Clone)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, Default)]
pub struct Figure {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Free text below the legend.
    pub notes: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    px0: f64,
    px1: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool, px0: f64, px1: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.04 * (hi - lo);
        Scale { lo: lo - pad, hi: hi + pad, log, px0, px1 }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some(self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            let inside = |v: f64| (self.lo..=self.hi).contains(&v.log10());
            let decades: Vec<(f64, String)> =
                (a..=b).map(|e| (10f64.powi(e), format!("1e{e}"))).filter(|(v, _)| inside(*v)).collect();
            if decades.len() >= 2 {
                let stride = decades.len().div_ceil(8);
                return decades.into_iter().step_by(stride).collect();
            }
            (a..=b)
                .flat_map(|e| [1.0, 2.0, 5.0].map(|m| (m * 10f64.powi(e), format!("{m}e{e}"))))
                .filter(|(v, _)| inside(*v))
                .collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last)
                .map(|k| {
                    let v = k as f64 * step;
                    let label = if k == 0 { "0".to_string() } else { format!("{v:.decimals$}") };
                    (v, label)
                })
                .collect()
        }
    }
}

impl Figure {
    pub fn new(title: impl Into<String>, x: Axis, y: Axis) -> Self {
        Figure { title: title.into(), x, y, ..Default::default() }
    }

    pub fn render(&self) -> String {
        let plot_right = WIDTH - RIGHT;
        let plot_bottom = HEIGHT - BOTTOM;
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let xs = Scale::new(all().map(|p| p.0).chain(self.markers.iter().map(|m| m.x)), self.x.log, LEFT, plot_right);
        let ys = Scale::new(all().map(|p| p.1).chain(self.markers.iter().map(|m| m.y)), self.y.log, plot_bottom, TOP);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, (LEFT + plot_right) / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
            plot_right - LEFT,
            plot_bottom - TOP
        );
        for (v, label) in xs.ticks() {
            if let Some(px) = xs.map(v) {
                let _ = writeln!(s, r##"<line x1="{px:.1}" y1="{TOP}" x2="{px:.1}" y2="{plot_bottom}" stroke="#ddd"/>"##);
                let _ = writeln!(s, r#"<text x="{px:.1}" y="{}" text-anchor="middle">{}</text>"#, plot_bottom + 16.0, escape(&label));
            }
        }
        for (v, label) in ys.ticks() {
            if let Some(py) = ys.map(v) {
                let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.1}" x2="{plot_right}" y2="{py:.1}" stroke="#ddd"/>"##);
                let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, escape(&label));
            }
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + plot_right) / 2.0, HEIGHT - 18.0, escape(&self.x.label));
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (TOP + plot_bottom) / 2.0,
            escape(&self.y.label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> =
                series.points.iter().filter_map(|&(x, y)| Some((xs.map(x)?, ys.map(y)?))).collect();
            match series.style {
                Style::Points => {
                    for (x, y) in &pts {
                        let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{color}"/>"#);
                    }
                }
                Style::Line | Style::Dashed => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                    let dash = if series.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#,
                        path.join(" ")
                    );
                }
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/>"#, plot_right + 10.0, ly - 6.0);
            let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, plot_right + 28.0, escape(&series.label));
        }
        for m in &self.markers {
            if let (Some(x), Some(y)) = (xs.map(m.x), ys.map(m.y)) {
                let _ = writeln!(s, r##"<circle cx="{x:.1}" cy="{y:.1}" r="6" fill="none" stroke="#e00" stroke-width="2"/>"##);
                let _ = writeln!(s, r##"<text x="{:.1}" y="{:.1}" fill="#e00">{}</text>"##, x + 8.0, y - 8.0, escape(&m.label));
            }
        }
        let base = TOP + 24.0 + 18.0 * self.series.len() as f64;
        for (i, note) in self.notes.iter().enumerate() {
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, plot_right + 10.0, base + 16.0 * i as f64, escape(note));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_escapes_text() {
        let mut f = Figure::new("a < b", Axis::log("t"), Axis::log("norm"));
        f.series.push(Series { label: "data".into(), points: vec![(1.0, 1.0), (10.0, 0.1), (0.0, 1.0)], style: Style::Points });
        f.series.push(Series { label: "fit".into(), points: vec![(1.0, 1.0), (10.0, 0.1)], style: Style::Line });
        f.markers.push(Marker { x: 10.0, y: 0.1, label: "min".into() });
        let svg = f.render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn tick_labels_are_clean() {
        let lin = Scale::new([-0.13, 0.61].into_iter(), false, 0.0, 1.0);
        let labels: Vec<String> = lin.ticks().into_iter().map(|t| t.1).collect();
        assert!(labels.contains(&"0".to_string()) && labels.contains(&"0.6".to_string()), "{labels:?}");
        let narrow = Scale::new([0.0125, 0.1].into_iter(), true, 0.0, 1.0);
        assert!(narrow.ticks().len() >= 3);
    }

    #[test]
    fn empty_and_constant_data_still_render() {
        let f = Figure::new("empty", Axis::linear("x"), Axis::linear("y"));
        assert!(f.render().contains("</svg>"));
        let mut g = Figure::new("flat", Axis::linear("x"), Axis::linear("y"));
        g.series.push(Series { label: "c".into(), points: vec![(0.0, 2.0), (1.0, 2.0)], style: Style::Line });
        assert!(!g.render().contains("NaN"));
    }
}
