//! Minimal static SVG output: heatmaps for Wigner grids and line plots for
//! sweeps. Numbers are written with fixed precision so files are
//! byte-reproducible.

use std::fmt::Write as _;

use crate::analysis::WignerGrid;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * w
    }

    fn py(&self, y: f64) -> f64 {
        let h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * h
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (t, b) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
        writeln!(
            out,
            r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        )
        .unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x0 + f * (self.x1 - self.x0);
            let yv = self.y0 + f * (self.y1 - self.y0);
            let (px, py) = (self.px(xv), self.py(yv));
            writeln!(
                out,
                r#"<line x1="{px:.1}" y1="{b:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 18.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                out,
                r#"<line x1="{:.1}" y1="{py:.1}" x2="{l:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                l - 5.0,
                l - 8.0,
                py + 4.0,
                tick(yv)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (t + b) / 2.0,
            (t + b) / 2.0,
            escape(y_label)
        )
        .unwrap();
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Diverging blue–white–red colour for `v ∈ [−1, 1]`.
fn diverging(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (1.0, 1.0 - v, 1.0 - v)
    } else {
        (1.0 + v, 1.0 + v, 1.0)
    };
    let c = |x: f64| (x * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

/// Heatmap of `W(x, p)` with a colour scale symmetric about zero.
pub fn heatmap_svg(grid: &WignerGrid, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let (xs, ps) = (&grid.x_values, &grid.p_values);
    if xs.is_empty() || ps.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let half = |v: &[f64]| if v.len() > 1 { (v[1] - v[0]).abs() / 2.0 } else { 0.5 };
    let (hx, hp) = (half(xs), half(ps));
    let frame = Frame {
        x0: xs[0] - hx,
        x1: xs[xs.len() - 1] + hx,
        y0: ps[0] - hp,
        y1: ps[ps.len() - 1] + hp,
    };
    let scale = grid.w.iter().flatten().fold(0.0f64, |m, w| m.max(w.abs())).max(1e-300);
    for (i, row) in grid.w.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let (x0, x1) = (frame.px(xs[j] - hx), frame.px(xs[j] + hx));
            let (y0, y1) = (frame.py(ps[i] + hp), frame.py(ps[i] - hp));
            writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x1 - x0 + 0.3,
                y1 - y0 + 0.3,
                diverging(w / scale)
            )
            .unwrap();
        }
    }
    frame.axes(&mut out, "x", "p");
    // Colour bar.
    let bx = WIDTH - MARGIN_RIGHT + 25.0;
    let (bt, bb) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let steps = 50;
    for k in 0..steps {
        let f = k as f64 / (steps - 1) as f64;
        let y = bt + f * (bb - bt);
        writeln!(
            out,
            r#"<rect x="{bx:.1}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            (bb - bt) / steps as f64 + 0.5,
            diverging(1.0 - 2.0 * f)
        )
        .unwrap();
    }
    for (y, v) in [(bt, scale), ((bt + bb) / 2.0, 0.0), (bb, -scale)] {
        writeln!(out, r#"<text x="{:.1}" y="{:.1}">{v:.3}</text>"#, bx + 22.0, y + 4.0).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.to_string(),
            points,
            dashed: false,
        }
    }
}

/// Line plot with optional labelled vertical markers.
pub fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    markers: &[(f64, &str)],
) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if finite.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let range = |f: fn(&(f64, f64)) -> f64| {
        let lo = finite.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = finite.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let pad = 0.05 * (y1 - y0);
    let frame = Frame {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
    };
    frame.axes(&mut out, x_label, y_label);
    for (x, label) in markers {
        if *x < frame.x0 || *x > frame.x1 {
            continue;
        }
        let px = frame.px(*x);
        writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{MARGIN_TOP:.1}" x2="{px:.2}" y2="{:.1}" stroke="red" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.1}" fill="red">{}</text>"#,
            HEIGHT - MARGIN_BOTTOM,
            px + 4.0,
            MARGIN_TOP + 14.0,
            escape(label)
        )
        .unwrap();
    }
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="4 3""# } else { "" };
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.8"{dash}/>"#,
            pts.join(" ")
        )
        .unwrap();
        let ly = MARGIN_TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 8.0;
        writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#,
            lx + 16.0,
            lx + 19.0,
            ly + 4.0,
            escape(&s.name)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> WignerGrid {
        WignerGrid {
            x_values: vec![-1.0, 0.0, 1.0],
            p_values: vec![-1.0, 1.0],
            w: vec![vec![0.1, -0.2, 0.3], vec![0.0, 0.05, -0.1]],
        }
    }

    #[test]
    fn heatmap_has_one_cell_per_point() {
        let svg = heatmap_svg(&grid(), "W <test>");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("W &lt;test&gt;"));
        // 6 cells + 50 colour-bar steps + background + frame.
        assert_eq!(svg.matches("<rect").count(), 6 + 50 + 2);
        assert_eq!(svg, heatmap_svg(&grid(), "W <test>"));
    }

    #[test]
    fn colours_are_symmetric() {
        assert_eq!(diverging(0.0), "#ffffff");
        assert_eq!(diverging(1.0), "#ff0000");
        assert_eq!(diverging(-1.0), "#0000ff");
        assert_eq!(diverging(7.0), diverging(1.0));
    }

    #[test]
    fn line_plot_skips_non_finite_points() {
        let s = vec![
            Series::new("a", vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 0.5)]),
            Series {
                dashed: true,
                ..Series::new("b", vec![(0.0, 0.9), (2.0, 0.4)])
            },
        ];
        let svg = line_plot_svg("F", "r", "fidelity", &s, &[(1.63, "r0"), (9.0, "off")]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">r0<") && !svg.contains(">off<"));
        assert!(!svg.contains("NaN"));
        let empty = line_plot_svg("F", "r", "f", &[], &[]);
        assert!(empty.trim_end().ends_with("</svg>"));
    }
}
