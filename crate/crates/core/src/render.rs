//! SVG drawings of packings.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::map::PlanarMap;
use crate::packer::{CirclePair, Geometry};

#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Width and height in pixels.
    pub size: f64,
    /// Draw edges: straight in the plane, geodesic arcs in the disc.
    pub edges: bool,
    /// Lines written as XML comments at the top.
    pub header: Vec<String>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { size: 800.0, edges: false, header: Vec::new() }
    }
}

struct Frame {
    centre: Complex64,
    scale: f64,
    half: f64,
}

impl Frame {
    fn pt(&self, z: Complex64) -> (f64, f64) {
        let w = (z - self.centre) * self.scale;
        (self.half + w.re, self.half - w.im)
    }
}

fn escape_comment(s: &str) -> String {
    s.replace("--", "- -")
}

/// Geodesic from `p` to `q` in the unit disc as an SVG path command.
fn geodesic(frame: &Frame, p: Complex64, q: Complex64) -> String {
    let (px, py) = frame.pt(p);
    let (qx, qy) = frame.pt(q);
    let cross = p.re * q.im - p.im * q.re;
    if cross.abs() < 1e-12 {
        return format!("M{px:.3} {py:.3}L{qx:.3} {qy:.3}");
    }
    // the circle through p, q and the inverse of p is orthogonal to the unit circle
    let a = if p.norm() > 1e-9 { p } else { q };
    let b = if p.norm() > 1e-9 { q } else { p };
    let inv = a / a.norm_sqr();
    let (c, r) = circle_through(a, b, inv);
    let (cx, cy) = frame.pt(c);
    let rs = r * frame.scale;
    let turn = (px - cx) * (qy - cy) - (py - cy) * (qx - cx);
    let sweep = u8::from(turn > 0.0);
    format!("M{px:.3} {py:.3}A{rs:.3} {rs:.3} 0 0 {sweep} {qx:.3} {qy:.3}")
}

fn circle_through(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    let (nb, nc) = (b.norm_sqr(), c.norm_sqr());
    let u = Complex64::new((c.im * nb - b.im * nc) / d, (b.re * nc - c.re * nb) / d);
    (a + u, u.norm())
}

/// SVG with one `<circle>` per packed circle; disc drawings add the unit
/// circle.
pub fn render_svg(circles: &[CirclePair], geometry: Geometry, map: Option<&PlanarMap>, opts: &RenderOptions) -> String {
    let half = opts.size / 2.0;
    let frame = match geometry {
        Geometry::Disc => Frame { centre: Complex64::new(0.0, 0.0), scale: 0.95 * half, half },
        Geometry::Plane => {
            let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
            for c in circles {
                lo = Complex64::new(lo.re.min(c.z.re - c.r), lo.im.min(c.z.im - c.r));
                hi = Complex64::new(hi.re.max(c.z.re + c.r), hi.im.max(c.z.im + c.r));
            }
            let extent = (hi.re - lo.re).max(hi.im - lo.im);
            let scale = if extent > 0.0 && extent.is_finite() { 0.95 * opts.size / extent } else { 1.0 };
            let centre = if circles.is_empty() { Complex64::new(0.0, 0.0) } else { (lo + hi) / 2.0 };
            Frame { centre, scale, half }
        }
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    for h in &opts.header {
        let _ = writeln!(s, "<!-- {} -->", escape_comment(h));
    }
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        opts.size
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if geometry == Geometry::Disc {
        let _ = writeln!(
            s,
            r#"<circle class="unit" cx="{half:.3}" cy="{half:.3}" r="{:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            frame.scale
        );
    }
    let stroke = (opts.size / 1600.0).max(0.2);
    for (v, c) in circles.iter().enumerate() {
        let (x, y) = frame.pt(c.z);
        let _ = writeln!(
            s,
            r##"<circle data-v="{v}" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="#1f4e9c" stroke-width="{stroke:.2}"/>"##,
            c.r * frame.scale
        );
    }
    if let (true, Some(map)) = (opts.edges, map) {
        let mut d = String::new();
        for e in 0..map.edge_count() {
            let (u, v) = map.edge_ends(e);
            let (p, q) = (circles[u].z, circles[v].z);
            match geometry {
                Geometry::Plane => {
                    let ((px, py), (qx, qy)) = (frame.pt(p), frame.pt(q));
                    let _ = write!(d, "M{px:.3} {py:.3}L{qx:.3} {qy:.3}");
                }
                Geometry::Disc => d.push_str(&geodesic(&frame, p, q)),
            }
        }
        let _ = writeln!(s, r##"<path d="{d}" fill="none" stroke="#c0392b" stroke-width="{stroke:.2}"/>"##);
    }
    s.push_str("</svg>\n");
    s
}
