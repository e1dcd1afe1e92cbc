//! Minimal SVG output: axes with linear or log scales, markers, polylines.

use std::fmt::Write;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub log: bool,
    /// Pixel range the data interval maps to.
    pub p0: f64,
    pub p1: f64,
}

impl Axis {
    /// An axis covering `values` with a little padding; log axes ignore
    /// non-positive values.
    pub fn fit(values: impl IntoIterator<Item = f64>, log: bool, p0: f64, p1: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            if v.is_finite() && (!log || v > 0.0) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = if log { (0.1, 10.0) } else { (0.0, 1.0) };
        }
        if log {
            lo = 10f64.powf(lo.log10().floor());
            hi = 10f64.powf(hi.log10().ceil());
            if hi <= lo {
                hi = lo * 10.0;
            }
        } else {
            let pad = if hi > lo {
                0.05 * (hi - lo)
            } else {
                0.5 * lo.abs().max(1.0)
            };
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log, p0, p1 }
    }

    pub fn map(&self, v: f64) -> f64 {
        let t = if self.log {
            (v.max(self.lo * 1e-3).log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        self.p0 + t * (self.p1 - self.p0)
    }

    /// Decades on log axes, about five round values on linear ones.
    pub fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            (a..=b).map(|e| 10f64.powi(e)).collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .into_iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last).map(|k| k as f64 * step).collect()
        }
    }
}

pub fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e4) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.0e}")
    }
}

pub struct Svg {
    body: String,
    width: f64,
    height: f64,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{fill}"/>"#
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="{stroke}"/>"#
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" text-anchor="{anchor}" font-family="sans-serif">{}</text>"#,
            esc(s)
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    /// Frame, ticks and labels for one panel.
    pub fn axes(&mut self, x: &Axis, y: &Axis, xlabel: &str, ylabel: &str) {
        let (left, right) = (x.p0.min(x.p1), x.p0.max(x.p1));
        let (top, bottom) = (y.p0.min(y.p1), y.p0.max(y.p1));
        self.rect(left, top, right - left, bottom - top, "#333");
        for t in x.ticks() {
            let px = x.map(t);
            self.line(px, bottom, px, bottom + 4.0, "#333", 1.0);
            self.text(px, bottom + 16.0, 10.0, "middle", &tick_label(t, x.log));
        }
        for t in y.ticks() {
            let py = y.map(t);
            self.line(left - 4.0, py, left, py, "#333", 1.0);
            self.text(left - 6.0, py + 3.0, 10.0, "end", &tick_label(t, y.log));
        }
        self.text(0.5 * (left + right), bottom + 34.0, 12.0, "middle", xlabel);
        let (cx, cy) = (left - 48.0, 0.5 * (top + bottom));
        let _ = writeln!(
            self.body,
            r#"<text x="{cx:.2}" y="{cy:.2}" font-size="12" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 {cx:.2} {cy:.2})">{}</text>"#,
            esc(ylabel)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_axis_spans_decades() {
        let a = Axis::fit([3e-4, 2e-2], true, 0.0, 100.0);
        assert_eq!((a.lo, a.hi), (1e-4, 1e-1));
        assert_eq!(a.ticks().len(), 4);
        assert!((a.map(1e-4) - 0.0).abs() < 1e-9 && (a.map(1e-1) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn linear_ticks_are_round() {
        let a = Axis::fit([0.0, 1.0], false, 0.0, 1.0);
        let t = a.ticks();
        assert!(t.contains(&0.0) && t.contains(&1.0));
    }

    #[test]
    fn text_is_escaped() {
        let mut s = Svg::new(10.0, 10.0);
        s.text(0.0, 0.0, 10.0, "start", "a<b & c");
        assert!(s.finish().contains("a&lt;b &amp; c"));
    }
}
