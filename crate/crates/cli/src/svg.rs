//! Static SVG figures: an entropy-rate curve and mixed-state scatters.

use std::fmt::Write;

use qmsp_core::box_count::barycentric;
use qmsp_core::PointCloud;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
/// Scatter plots thin larger clouds to this many points.
pub const MAX_SCATTER_POINTS: usize = 20_000;

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

/// Polyline of `(theta, hmu)` with `theta` on `[0, pi]` and `hmu` on `[0, 1]`.
pub fn hmu_curve(points: &[(f64, f64)]) -> String {
    let pi = std::f64::consts::PI;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |t: f64| MARGIN + plot_w * t / pi;
    let sy = |h: f64| HEIGHT - MARGIN - plot_h * h.clamp(0.0, 1.0);

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y0} H{x1} M{x0} {y0} V{y1}" stroke="black" fill="none"/>"#,
        x0 = MARGIN,
        y0 = HEIGHT - MARGIN,
        x1 = WIDTH - MARGIN,
        y1 = MARGIN
    );
    for (t, label) in [(0.0, "0"), (pi / 4.0, "π/4"), (pi / 2.0, "π/2"), (3.0 * pi / 4.0, "3π/4"), (pi, "π")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{label}</text>"#,
            sx(t),
            HEIGHT - MARGIN + 18.0
        );
    }
    for h in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{h}</text>"#,
            MARGIN - 6.0,
            sy(h) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">θ</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" font-size="13" transform="rotate(-90 14 {:.1})" text-anchor="middle">hμ (bits/symbol)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let coords: Vec<String> = points
        .iter()
        .filter(|(_, h)| h.is_finite())
        .map(|&(t, h)| format!("{:.2},{:.2}", sx(t), sy(h)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Scatter of a three-state cloud in the barycentric triangle, or of the
/// first two coordinates otherwise.
pub fn cloud_scatter(cloud: &PointCloud, title: &str) -> String {
    let size = 480.0;
    let pad = 30.0;
    let scale = size - 2.0 * pad;
    let project = |p: &[f64]| -> (f64, f64) {
        let (x, y) = match p.len() {
            3 => {
                let b = barycentric(p);
                (b[0], b[1])
            }
            1 => (p[0], 0.0),
            _ => (p[0], p[1]),
        };
        (pad + scale * x, size - pad - scale * y)
    };
    let mut out = String::new();
    header(&mut out, size, size);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">{}</text>"#,
        size / 2.0,
        escape(title)
    );
    if cloud.dim() == 3 {
        let corners: Vec<String> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            .iter()
            .map(|c| {
                let (x, y) = project(c);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="none" stroke="gray"/>"#,
            corners.join(" ")
        );
    }
    let stride = cloud.len().div_ceil(MAX_SCATTER_POINTS).max(1);
    for p in cloud.points().step_by(stride) {
        let (x, y) = project(p);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="0.8" fill="black"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
