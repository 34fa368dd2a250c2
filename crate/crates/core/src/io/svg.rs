//! Static SVG frames of curves and profiles.

use crate::geometry::Geometry;
use std::fmt::Write as _;

/// Fixed drawing window `[x0, x1] x [y0, y1]` in model coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Viewport {
    /// Bounding box of the geometries (profiles mirrored across the axis)
    /// with a relative margin.
    pub fn fit<'a>(geoms: impl IntoIterator<Item = &'a Geometry>, margin: f64) -> Self {
        let mut v = Viewport { x0: f64::INFINITY, y0: f64::INFINITY, x1: f64::NEG_INFINITY, y1: f64::NEG_INFINITY };
        for g in geoms {
            for p in g.points() {
                let ys = if g.is_axisymmetric() { [p.y, -p.y] } else { [p.y, p.y] };
                v.x0 = v.x0.min(p.x);
                v.x1 = v.x1.max(p.x);
                for y in ys {
                    v.y0 = v.y0.min(y);
                    v.y1 = v.y1.max(y);
                }
            }
        }
        if !v.x0.is_finite() {
            return Viewport { x0: -1.0, y0: -1.0, x1: 1.0, y1: 1.0 };
        }
        let m = margin * (v.x1 - v.x0).max(v.y1 - v.y0).max(1e-9);
        Viewport { x0: v.x0 - m, y0: v.y0 - m, x1: v.x1 + m, y1: v.y1 + m }
    }
}

fn path(out: &mut String, pts: impl Iterator<Item = (f64, f64)>, closed: bool, v: &Viewport, scale: f64) {
    out.push_str("<path d=\"");
    for (k, (x, y)) in pts.enumerate() {
        let _ = write!(out, "{}{:.3},{:.3} ", if k == 0 { 'M' } else { 'L' }, (x - v.x0) * scale, (v.y1 - y) * scale);
    }
    if closed {
        out.push('Z');
    }
    out.push_str("\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n");
}

/// One frame: every component drawn as a polyline, profiles together with
/// their mirror image.
pub fn render_frame<'a>(geoms: impl IntoIterator<Item = &'a Geometry>, time: f64, v: &Viewport, width: f64) -> String {
    let scale = width / (v.x1 - v.x0);
    let height = (v.y1 - v.y0) * scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.3} {height:.3}\">"
    );
    let _ = writeln!(out, "<text x=\"4\" y=\"14\" font-size=\"12\">t = {time:.6}</text>");
    for g in geoms {
        let pts = g.points();
        let closed = g.is_closed() && !g.is_axisymmetric();
        path(&mut out, pts.iter().map(|p| (p.x, p.y)), closed, v, scale);
        if g.is_axisymmetric() {
            path(&mut out, pts.iter().map(|p| (p.x, -p.y)), false, v, scale);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::geometry::Point;

    #[test]
    fn frame_contains_paths() {
        let c: Geometry = exact::circle(Point::zeros(), 1.0, 32).unwrap().into();
        let p: Geometry = exact::sphere_profile(3.0, 0.5, 2, 32).unwrap().into();
        let v = Viewport::fit([&c, &p], 0.05);
        assert!(v.x0 < -1.0 && v.x1 > 3.5 && v.y0 < -1.0);
        let s = render_frame([&c, &p], 0.125, &v, 400.0);
        assert_eq!(s.matches("<path").count(), 3);
        assert!(s.contains("t = 0.125000"));
    }
}
