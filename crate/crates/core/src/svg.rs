//! Standalone SVG plots: domain outlines, spectra and counting functions.

use std::fmt::Write;

use crate::geometry::RadiusProfile;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        }
        let grow = |a: f64, b: f64| {
            let pad = if b > a { 0.05 * (b - a) } else { 0.5 * a.abs().max(1.0) };
            (a - pad, b + pad)
        };
        let (x0, x1) = grow(x0, x1);
        let (y0, y1) = grow(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{:.2}" font-family="sans-serif" font-size="11">{:.4}</text>"#,
        H - PAD + 14.0,
        f.x0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.4}</text>"#,
        W - PAD,
        H - PAD + 14.0,
        f.x1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{:.4}</text>"#,
        PAD - 4.0,
        H - PAD,
        f.y0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{PAD}" font-family="sans-serif" font-size="11" text-anchor="end">{:.4}</text>"#,
        PAD - 4.0,
        f.y1
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {:.2})" text-anchor="middle">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn legend(s: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = PAD + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{y:.2}" font-family="sans-serif" font-size="11" fill="{}" text-anchor="end">{}</text>"#,
            W - PAD,
            COLORS[i % COLORS.len()],
            escape(name)
        );
    }
}

fn polyline(s: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str) {
    let mut d = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, f.px(x), f.py(y));
    }
    let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
}

/// Boundary `R(θ)e^{iθ}` with equal axis scales.
pub fn domain_outline(profile: &RadiusProfile, title: &str) -> String {
    let pts = profile.boundary_polyline(720);
    let r = pts.iter().map(|(x, y)| x.abs().max(y.abs())).fold(0.0, f64::max) * 1.1;
    let side = (H - 2.0 * PAD).min(W - 2.0 * PAD);
    let (cx, cy) = (W / 2.0, H / 2.0 + 8.0);
    let mut s = open(title);
    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let _ = write!(
            d,
            "{}{:.2},{:.2}",
            if i == 0 { "M" } else { " L" },
            cx + x / r * side / 2.0,
            cy - y / r * side / 2.0
        );
    }
    let _ = writeln!(s, r##"<path d="{d} Z" fill="#dbe9f6" stroke="#1f77b4" stroke-width="1.5"/>"##);
    let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2" fill="black"/>"#);
    s.push_str("</svg>\n");
    s
}

/// Values against their 1-based index, one marker series per entry.
pub fn spectrum_plot(series: &[(&str, &[f64])], title: &str, ylabel: &str) -> String {
    let f = Frame::fit(
        series
            .iter()
            .flat_map(|(_, v)| v.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y))),
    );
    let mut s = open(title);
    axes(&mut s, &f, "index", ylabel);
    for (k, (_, values)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        for (i, &y) in values.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                f.px((i + 1) as f64),
                f.py(y)
            );
        }
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Counting function `N(λ) = #{j : λ_j ≤ λ}` as a staircase.
pub fn step_plot(series: &[(&str, &[f64])], title: &str, xlabel: &str) -> String {
    let stairs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, v)| {
            let mut sorted = v.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mut pts = Vec::with_capacity(2 * sorted.len() + 1);
            if let Some(&first) = sorted.first() {
                pts.push((first, 0.0));
            }
            for (i, &x) in sorted.iter().enumerate() {
                pts.push((x, i as f64));
                pts.push((x, (i + 1) as f64));
            }
            pts
        })
        .collect();
    let f = Frame::fit(stairs.iter().flatten().copied());
    let mut s = open(title);
    axes(&mut s, &f, xlabel, "N");
    for (k, pts) in stairs.iter().enumerate() {
        let mut joined = Vec::with_capacity(2 * pts.len());
        for w in pts.windows(2) {
            joined.push(w[0]);
            if w[1].0 != w[0].0 {
                joined.push((w[1].0, w[0].1));
            }
        }
        if let Some(&last) = pts.last() {
            joined.push(last);
            joined.push((f.x1, last.1));
        }
        polyline(&mut s, &f, &joined, COLORS[k % COLORS.len()]);
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Lines through `(x, y)` pairs.
pub fn line_plot(x: &[f64], series: &[(&str, &[f64])], title: &str, xlabel: &str, ylabel: &str) -> String {
    let f = Frame::fit(series.iter().flat_map(|(_, ys)| x.iter().copied().zip(ys.iter().copied())));
    let mut s = open(title);
    axes(&mut s, &f, xlabel, ylabel);
    for (k, (_, ys)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = x.iter().copied().zip(ys.iter().copied()).collect();
        polyline(&mut s, &f, &pts, COLORS[k % COLORS.len()]);
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(s: &str) -> bool {
        s.starts_with("<svg") && s.trim_end().ends_with("</svg>") && !s.contains("NaN")
    }

    #[test]
    fn outline_is_closed_path() {
        let s = domain_outline(&RadiusProfile::disk(), "disk");
        assert!(balanced(&s));
        assert!(s.contains(" Z\""));
    }

    #[test]
    fn plots_are_well_formed() {
        let v = [1.0, 2.0, 2.0, 4.0];
        assert!(balanced(&spectrum_plot(&[("a", &v)], "t", "y")));
        assert!(balanced(&step_plot(&[("a", &v), ("b", &[1.5])], "t", "λ")));
        assert!(balanced(&line_plot(&[0.0, 1.0], &[("a", &[1.0, 1.0])], "t", "x", "y")));
        assert!(balanced(&spectrum_plot(&[], "empty", "y")));
    }

    #[test]
    fn title_is_escaped() {
        assert!(domain_outline(&RadiusProfile::disk(), "a<b").contains("a&lt;b"));
    }
}
