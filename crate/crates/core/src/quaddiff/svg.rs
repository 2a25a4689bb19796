//! Static SVG rendering of a trajectory field on the square `[−3, 3]²`.

use std::fmt::Write;

use num_complex::Complex64;

use super::TrajectoryField;
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    /// Canvas size in pixels (square).
    pub size: u32,
    pub stroke_width: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            size: 800,
            stroke_width: 0.012,
        }
    }
}

const HALF_WIDTH: f64 = 3.0;
const TRAJECTORY_COLOR: &str = "#444444";

fn boundary_color(pole: Point) -> &'static str {
    match pole {
        Point::Infinity => "#7b3294",
        Point::Finite(z) if z.re > 0.5 => "#d7191c",
        Point::Finite(z) if z.re < -0.5 => "#2c7bb6",
        Point::Finite(_) => "#1a9641",
    }
}

fn path_data(points: &[Complex64]) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        // y axis points up
        let _ = write!(d, "{cmd}{:.6} {:.6} ", p.re, -p.im);
    }
    d.trim_end().to_string()
}

/// Renders trajectories, circular boundaries (in the `w` plane), zeros as
/// crosses and the finite poles as filled dots. Deterministic.
pub fn render_svg(field: &TrajectoryField, options: &SvgOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" viewBox="{1} {1} {2} {2}">"#,
        options.size,
        -HALF_WIDTH,
        2.0 * HALF_WIDTH
    );
    let _ = writeln!(
        s,
        r#"<rect x="{0}" y="{0}" width="{1}" height="{1}" fill="white"/>"#,
        -HALF_WIDTH,
        2.0 * HALF_WIDTH
    );
    if field.trajectories.is_empty() && field.circular_boundaries.is_empty() {
        let _ = writeln!(s, "<!-- warning: empty trajectory field -->");
        s.push_str("</svg>\n");
        return s;
    }
    let _ = writeln!(s, "<title>Q(w) dw^2, gamma = {}</title>", field.gamma);
    let sw = options.stroke_width;
    for t in &field.trajectories {
        let _ = writeln!(
            s,
            r#"<path class="trajectory" d="{}" fill="none" stroke="{TRAJECTORY_COLOR}" stroke-width="{sw}"/>"#,
            path_data(t)
        );
    }
    for b in &field.circular_boundaries {
        let _ = writeln!(
            s,
            r#"<path class="boundary" d="{} Z" fill="none" stroke="{}" stroke-width="{}"/>"#,
            path_data(&b.boundary_w()),
            boundary_color(b.pole),
            2.0 * sw
        );
    }
    let arm = 0.06;
    for z in &field.zeros {
        let (x, y) = (z.point.re, -z.point.im);
        let _ = writeln!(
            s,
            r#"<g class="zero-marker" stroke="black" stroke-width="{sw}"><line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/><line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/></g>"#,
            x - arm,
            y - arm,
            x + arm,
            y + arm,
            x - arm,
            y + arm,
            x + arm,
            y - arm
        );
    }
    for p in &field.poles {
        if let Point::Finite(z) = p.point {
            let _ = writeln!(
                s,
                r#"<circle class="pole-marker" cx="{:.6}" cy="{:.6}" r="0.05" fill="black"/>"#,
                z.re, -z.im
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
