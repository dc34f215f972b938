//! Minimal SVG writer for the report figures. Coordinates are printed with
//! two decimals so the files are stable across platforms.

use std::fmt::Write;

pub const RED: &str = "#c0392b";
pub const GREY: &str = "#7f8c8d";
pub const BLUE: &str = "#2e6da4";
pub const ORANGE: &str = "#e08e2b";

fn n(x: f64) -> String {
    format!("{x:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Svg { width, height, body: String::new() }
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            n(x1),
            n(y1),
            n(x2),
            n(y2),
            n(width)
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="{stroke}"/>"#,
            n(x),
            n(y),
            n(w.max(0.0)),
            n(h.max(0.0))
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#, n(cx), n(cy), n(r));
    }

    pub fn diamond(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<polygon points="{},{} {},{} {},{} {},{}" fill="{fill}"/>"#,
            n(cx),
            n(cy - r),
            n(cx + r),
            n(cy),
            n(cx),
            n(cy + r),
            n(cx - r),
            n(cy)
        );
    }

    /// `anchor` is `start`, `middle` or `end`.
    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, fill: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{anchor}" fill="{fill}">{}</text>"#,
            n(x),
            n(y),
            n(size),
            escape(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = n(self.width),
            h = n(self.height)
        )
    }
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    /// Pads the data range by 5% on both sides; a degenerate range is
    /// widened to ±1 around its value.
    pub fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let pad = 0.05 * (hi - lo);
        Scale { d0: lo - pad, d1: hi + pad, p0, p1 }
    }

    pub fn map(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.d0, self.d1)
    }
}

/// Type-7 quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (i, frac) = (h.floor() as usize, h - h.floor());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Box-plot summary: whiskers reach the most extreme points within
/// 1.5 IQR of the box; everything beyond is an outlier.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let (q1, median, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|&x| x >= lo_fence && x <= hi_fence).collect();
    Some(BoxStats {
        q1,
        median,
        q3,
        mean: v.iter().sum::<f64>() / v.len() as f64,
        whisker_lo: inside.first().copied().unwrap_or(q1),
        whisker_hi: inside.last().copied().unwrap_or(q3),
        outliers: v.iter().copied().filter(|&x| x < lo_fence || x > hi_fence).collect(),
    })
}

/// Panel geometry in pixels.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

fn axis(svg: &mut Svg, p: Panel, scale: &Scale) {
    svg.line(p.x, p.y, p.x, p.y + p.h, "black", 1.0);
    svg.line(p.x, p.y + p.h, p.x + p.w, p.y + p.h, "black", 1.0);
    let (d0, d1) = scale.domain();
    for i in 0..=4 {
        let v = d0 + (d1 - d0) * i as f64 / 4.0;
        let y = scale.map(v);
        svg.line(p.x - 4.0, y, p.x, y, "black", 1.0);
        svg.text(p.x - 6.0, y + 4.0, 10.0, "end", "black", &format!("{v:.3}"));
    }
}

/// Side-by-side boxes with an optional significance bar across all groups.
pub fn box_panel(svg: &mut Svg, p: Panel, title: &str, groups: &[(&str, Vec<f64>)], marker: &str) {
    svg.text(p.x + p.w / 2.0, p.y - 24.0, 12.0, "middle", "black", title);
    let stats: Vec<Option<BoxStats>> = groups.iter().map(|(_, v)| box_stats(v)).collect();
    let all: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied().filter(|x| x.is_finite())).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if all.is_empty() {
        svg.text(p.x + p.w / 2.0, p.y + p.h / 2.0, 11.0, "middle", GREY, "no data");
        return;
    }
    let scale = Scale::new(lo, hi, p.y + p.h, p.y);
    axis(svg, p, &scale);
    let slot = p.w / groups.len() as f64;
    let colors = [BLUE, ORANGE];
    for (g, ((label, _), st)) in groups.iter().zip(&stats).enumerate() {
        let cx = p.x + slot * (g as f64 + 0.5);
        let half = slot * 0.25;
        svg.text(cx, p.y + p.h + 16.0, 11.0, "middle", "black", label);
        let Some(b) = st else { continue };
        let color = colors[g % colors.len()];
        svg.line(cx, scale.map(b.whisker_lo), cx, scale.map(b.q1), "black", 1.0);
        svg.line(cx, scale.map(b.q3), cx, scale.map(b.whisker_hi), "black", 1.0);
        svg.line(cx - half / 2.0, scale.map(b.whisker_lo), cx + half / 2.0, scale.map(b.whisker_lo), "black", 1.0);
        svg.line(cx - half / 2.0, scale.map(b.whisker_hi), cx + half / 2.0, scale.map(b.whisker_hi), "black", 1.0);
        svg.rect(cx - half, scale.map(b.q3), 2.0 * half, scale.map(b.q1) - scale.map(b.q3), color, "black");
        svg.line(cx - half, scale.map(b.median), cx + half, scale.map(b.median), "black", 2.0);
        svg.diamond(cx, scale.map(b.mean), 4.0, "white");
        for &o in &b.outliers {
            svg.circle(cx, scale.map(o), 2.5, "black");
        }
    }
    if !marker.is_empty() && groups.len() > 1 {
        let y = p.y - 8.0;
        let (x1, x2) = (p.x + slot * 0.5, p.x + slot * (groups.len() as f64 - 0.5));
        svg.line(x1, y, x2, y, "black", 1.0);
        svg.text((x1 + x2) / 2.0, y - 3.0, 12.0, "middle", "black", marker);
    }
}

/// Scatter of paired values with an identity line and a caption.
pub fn scatter_panel(svg: &mut Svg, p: Panel, title: &str, points: &[(f64, f64)], labels: (&str, &str), caption: &str) {
    svg.text(p.x + p.w / 2.0, p.y - 10.0, 12.0, "middle", "black", title);
    if points.is_empty() {
        svg.text(p.x + p.w / 2.0, p.y + p.h / 2.0, 11.0, "middle", GREY, "no data");
        return;
    }
    let lo = points.iter().map(|&(a, b)| a.min(b)).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|&(a, b)| a.max(b)).fold(f64::NEG_INFINITY, f64::max);
    let ys = Scale::new(lo, hi, p.y + p.h, p.y);
    let xs = Scale::new(lo, hi, p.x, p.x + p.w);
    axis(svg, p, &ys);
    let (d0, d1) = xs.domain();
    svg.line(xs.map(d0), ys.map(d0), xs.map(d1), ys.map(d1), GREY, 1.0);
    for &(a, b) in points {
        svg.circle(xs.map(a), ys.map(b), 3.0, BLUE);
    }
    svg.text(p.x + p.w / 2.0, p.y + p.h + 30.0, 11.0, "middle", "black", labels.0);
    svg.text(p.x + 4.0, p.y + 12.0, 11.0, "start", "black", labels.1);
    svg.text(p.x + p.w - 4.0, p.y + p.h - 8.0, 11.0, "end", "black", caption);
}

/// One horizontal bar per feature, longest first as given.
pub struct Bar {
    pub label: String,
    pub value: f64,
    pub highlight: bool,
}

pub fn bar_chart(title: &str, bars: &[Bar], legend: &str) -> String {
    let row = 18.0;
    let (left, top) = (200.0, 50.0);
    let width = 640.0;
    let plot_w = width - left - 40.0;
    let height = top + row * bars.len().max(1) as f64 + 60.0;
    let mut svg = Svg::new(width, height);
    svg.text(width / 2.0, 24.0, 14.0, "middle", "black", title);
    if bars.is_empty() {
        svg.text(width / 2.0, top + 20.0, 12.0, "middle", GREY, "no robust features");
        return svg.finish();
    }
    let max = bars.iter().map(|b| b.value).fold(0.0, f64::max);
    let scale = if max > 0.0 { plot_w / max } else { 0.0 };
    for (i, b) in bars.iter().enumerate() {
        let y = top + row * i as f64;
        svg.text(left - 6.0, y + row * 0.7, 11.0, "end", "black", &b.label);
        svg.rect(left, y + 2.0, b.value * scale, row - 4.0, if b.highlight { RED } else { GREY }, "none");
        svg.text(left + b.value * scale + 4.0, y + row * 0.7, 10.0, "start", "black", &format!("{:.4}", b.value));
    }
    let base = top + row * bars.len() as f64;
    svg.line(left, top, left, base, "black", 1.0);
    svg.text(left + plot_w / 2.0, base + 24.0, 11.0, "middle", "black", "mean |Shapley value|");
    if !legend.is_empty() {
        svg.text(left, base + 44.0, 10.0, "start", "black", legend);
    }
    svg.finish()
}
