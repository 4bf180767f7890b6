//! Minimal deterministic SVG plots: line charts and heatmaps.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers instead of a polyline.
    pub markers: bool,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            markers: false,
        }
    }

    pub fn markers(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
            markers: true,
        }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            (l.min(v), h.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>
<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>
<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>
"#,
        WIDTH / 2.0,
        escape(title),
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(xlabel),
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(ylabel),
    );
}

fn axes(out: &mut String, f: &Frame) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    for i in 0..=4 {
        let fx = f.x.0 + (f.x.1 - f.x.0) * i as f64 / 4.0;
        let fy = f.y.0 + (f.y.1 - f.y.0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            f.px(fx),
            HEIGHT - BOTTOM + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            f.py(fy) + 4.0,
            tick(fy)
        );
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }
}

/// Line chart; `vlines` draws labelled vertical markers.
pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    vlines: &[(f64, String)],
) -> String {
    let frame = Frame {
        x: padded_range(
            series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0))
                .chain(vlines.iter().map(|v| v.0)),
        ),
        y: padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    axes(&mut out, &frame);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect();
        if s.markers {
            for (x, y) in &pts {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    frame.px(*x),
                    frame.py(*y)
                );
            }
        } else if !pts.is_empty() {
            let path: Vec<String> = pts
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        if series.len() <= 12 {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                LEFT + 8.0,
                TOP + 14.0 + 14.0 * i as f64,
                escape(&s.name)
            );
        }
    }
    for (x, label) in vlines {
        let px = frame.px(*x);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.1}" stroke="gray" stroke-dasharray="4 3"/>"#,
            HEIGHT - BOTTOM
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.1}" fill="gray">{}</text>"#,
            px + 4.0,
            TOP + 14.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn viridis_like(v: f64) -> String {
    // Dark blue → teal → yellow.
    let v = v.clamp(0.0, 1.0);
    let stops = [
        (68.0, 1.0, 84.0),
        (33.0, 145.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let (a, b, t) = if v < 0.5 {
        (stops[0], stops[1], v * 2.0)
    } else {
        (stops[1], stops[2], v * 2.0 - 1.0)
    };
    let mix = |p: f64, q: f64| (p + (q - p) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

/// Heatmap with `z[i][j]` at `(xs[i], ys[j])`.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    z: &[Vec<f64>],
) -> String {
    let frame = Frame {
        x: padded_range(xs.iter().copied()),
        y: padded_range(ys.iter().copied()),
    };
    let (zlo, zhi) = padded_range(z.iter().flatten().copied());
    let mut out = String::new();
    header(&mut out, title, xlabel, ylabel);
    let cell = |v: &[f64], k: usize| -> (f64, f64) {
        let lo = if k == 0 {
            v[0]
        } else {
            0.5 * (v[k - 1] + v[k])
        };
        let hi = if k + 1 == v.len() {
            v[k]
        } else {
            0.5 * (v[k] + v[k + 1])
        };
        (lo, hi)
    };
    for (i, col) in z.iter().enumerate() {
        let (x0, x1) = cell(xs, i);
        for (j, &val) in col.iter().enumerate() {
            let (y0, y1) = cell(ys, j);
            let (px0, px1) = (frame.px(x0), frame.px(x1));
            let (py0, py1) = (frame.py(y1), frame.py(y0));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                px0,
                py0,
                (px1 - px0).max(0.5),
                (py1 - py0).max(0.5),
                viridis_like((val - zlo) / (zhi - zlo))
            );
        }
    }
    axes(&mut out, &frame);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">color: {} .. {}</text>"#,
        WIDTH - RIGHT,
        TOP - 6.0,
        tick(zlo),
        tick(zhi)
    );
    out.push_str("</svg>\n");
    out
}
