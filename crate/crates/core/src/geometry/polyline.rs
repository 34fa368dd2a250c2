//! Low-level polyline machinery shared by curves and profiles.

use super::Point;
use crate::error::{McfError, Result};

/// How the first and last vertex of a polyline are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ends {
    /// Closed loop, last vertex connects back to the first.
    Closed,
    /// Open polyline with free endpoints (quantities extrapolated).
    Free,
    /// Open profile whose endpoints sit on the symmetry axis `r = 0`;
    /// neighbours across the axis are obtained by reflection.
    Axis,
}

pub fn edge_count(n: usize, ends: Ends) -> usize {
    match ends {
        Ends::Closed => n,
        _ => n - 1,
    }
}

#[inline]
pub fn edge(pts: &[Point], ends: Ends, e: usize) -> (Point, Point) {
    let n = pts.len();
    debug_assert!(e < edge_count(n, ends));
    (pts[e], pts[(e + 1) % n])
}

pub fn edge_lengths(pts: &[Point], ends: Ends) -> Vec<f64> {
    (0..edge_count(pts.len(), ends))
        .map(|e| {
            let (a, b) = edge(pts, ends, e);
            (b - a).norm()
        })
        .collect()
}

pub fn check_edges(pts: &[Point], ends: Ends) -> Result<()> {
    for (index, length) in edge_lengths(pts, ends).into_iter().enumerate() {
        if !(length >= 1e-12) {
            return Err(McfError::DegenerateEdge { index, length });
        }
    }
    Ok(())
}

/// Twice the signed area of a closed polygon (positive for counterclockwise).
pub fn signed_area2(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        acc += a.x * b.y - a.y * b.x;
    }
    acc
}

#[inline]
fn reflect(p: Point) -> Point {
    Point::new(p.x, -p.y)
}

/// The two stencil neighbours of vertex `i`, or `None` at a free endpoint.
#[inline]
pub fn neighbours(pts: &[Point], ends: Ends, i: usize) -> Option<(Point, Point)> {
    let n = pts.len();
    match ends {
        Ends::Closed => Some((pts[(i + n - 1) % n], pts[(i + 1) % n])),
        Ends::Free => {
            if i == 0 || i + 1 == n {
                None
            } else {
                Some((pts[i - 1], pts[i + 1]))
            }
        }
        Ends::Axis => {
            if i == 0 {
                Some((reflect(pts[1]), pts[1]))
            } else if i + 1 == n {
                Some((pts[n - 2], reflect(pts[n - 2])))
            } else {
                Some((pts[i - 1], pts[i + 1]))
            }
        }
    }
}

/// Signed circumscribed-circle (Menger) curvature of the path a -> b -> c,
/// positive for a left turn.
#[inline]
pub fn menger(a: Point, b: Point, c: Point) -> f64 {
    let ab = b - a;
    let bc = c - b;
    let ca = a - c;
    let denom = ab.norm() * bc.norm() * ca.norm();
    if denom == 0.0 {
        return 0.0;
    }
    let cross = ab.x * bc.y - ab.y * bc.x;
    2.0 * cross / denom
}

/// Outward unit normal and signed curvature at vertex `i`.
///
/// `sigma = +1` when the enclosed region lies to the left of the traversal
/// direction, `-1` when it lies to the right. Free endpoints get the normal of
/// their single edge and zero curvature (callers extrapolate).
pub fn frame(pts: &[Point], ends: Ends, sigma: f64, i: usize) -> (Point, f64) {
    let n = pts.len();
    match neighbours(pts, ends, i) {
        Some((a, c)) => {
            let t = (c - a).normalize();
            let normal = Point::new(t.y, -t.x) * sigma;
            (normal, sigma * menger(a, pts[i], c))
        }
        None => {
            let t = if i == 0 {
                (pts[1] - pts[0]).normalize()
            } else {
                (pts[n - 1] - pts[n - 2]).normalize()
            };
            (Point::new(t.y, -t.x) * sigma, 0.0)
        }
    }
}

/// Half the sum of the adjacent edge lengths at each vertex.
pub fn dual_lengths(pts: &[Point], ends: Ends) -> Vec<f64> {
    let n = pts.len();
    let el = edge_lengths(pts, ends);
    (0..n)
        .map(|i| match ends {
            Ends::Closed => 0.5 * (el[(i + n - 1) % n] + el[i]),
            _ => {
                let left = if i > 0 { el[i - 1] } else { 0.0 };
                let right = if i + 1 < n { el[i] } else { 0.0 };
                0.5 * (left + right)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Simplicity
// ---------------------------------------------------------------------------

#[inline]
fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[inline]
fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

#[inline]
fn adjacent(e: usize, f: usize, m: usize, ends: Ends) -> bool {
    let (lo, hi) = if e < f { (e, f) } else { (f, e) };
    hi - lo == 1 || (ends == Ends::Closed && lo == 0 && hi == m - 1)
}

/// All-pairs simplicity test, O(N^2). Reference for [`find_self_intersection`].
pub fn find_self_intersection_bruteforce(pts: &[Point], ends: Ends) -> Option<(usize, usize)> {
    let m = edge_count(pts.len(), ends);
    for e in 0..m {
        let (a, b) = edge(pts, ends, e);
        for f in (e + 1)..m {
            if adjacent(e, f, m, ends) {
                continue;
            }
            let (c, d) = edge(pts, ends, f);
            if segments_intersect(a, b, c, d) {
                return Some((e, f));
            }
        }
    }
    None
}

/// Sweep-and-prune simplicity test: edges sorted by their left x-extent and
/// only pairs with overlapping x-intervals are tested exactly.
pub fn find_self_intersection(pts: &[Point], ends: Ends) -> Option<(usize, usize)> {
    let m = edge_count(pts.len(), ends);
    let mut boxes: Vec<(f64, f64, f64, f64, usize)> = (0..m)
        .map(|e| {
            let (a, b) = edge(pts, ends, e);
            (a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y), e)
        })
        .collect();
    boxes.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.4.cmp(&q.4)));
    let mut found: Option<(usize, usize)> = None;
    for i in 0..m {
        let (_, xmax, ymin, ymax, e) = boxes[i];
        for &(xmin2, _, ymin2, ymax2, f) in &boxes[i + 1..] {
            if xmin2 > xmax {
                break;
            }
            if ymin2 > ymax || ymax2 < ymin || adjacent(e, f, m, ends) {
                continue;
            }
            let (a, b) = edge(pts, ends, e);
            let (c, d) = edge(pts, ends, f);
            if segments_intersect(a, b, c, d) {
                let pair = (e.min(f), e.max(f));
                // report the lexicographically first pair for determinism
                found = Some(match found {
                    Some(prev) if prev <= pair => prev,
                    _ => pair,
                });
            }
        }
    }
    found
}

// ---------------------------------------------------------------------------
// Redistribution along arclength
// ---------------------------------------------------------------------------

/// Redistributes vertices along the polyline so that the local spacing
/// follows `1 / density[i]`.
///
/// The traced polyline is unchanged (new vertices lie on old edges). For open
/// polylines the endpoints are kept exactly; for closed ones vertex 0 is the
/// anchor.
pub fn redistribute(pts: &[Point], ends: Ends, density: &[f64]) -> Vec<Point> {
    let n = pts.len();
    let m = edge_count(n, ends);
    let el = edge_lengths(pts, ends);
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for e in 0..m {
        let d0 = density[e];
        let d1 = density[(e + 1) % n];
        cum.push(cum[e] + el[e] * 0.5 * (d0 + d1));
    }
    let total = cum[m];
    let count = (total.round() as usize).max(if ends == Ends::Closed { 3 } else { 1 });
    let step = total / count as f64;
    let mut out = Vec::with_capacity(count + 1);
    out.push(pts[0]);
    let mut e = 0;
    for k in 1..count {
        let target = step * k as f64;
        while e + 1 < m && cum[e + 1] <= target {
            e += 1;
        }
        let span = cum[e + 1] - cum[e];
        let u = if span > 0.0 { ((target - cum[e]) / span).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = edge(pts, ends, e);
        out.push(if u == 0.0 { a } else { a + (b - a) * u });
    }
    if ends != Ends::Closed {
        out.push(pts[n - 1]);
    }
    out
}

/// Smallest distance between two segments.
pub fn segment_distance(p1: Point, p2: Point, q1: Point, q2: Point) -> f64 {
    if segments_intersect(p1, p2, q1, q2) {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let u = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * u - p).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn menger_on_circle_is_exact() {
        let r = 3.0_f64;
        let pts: Vec<Point> = [0.1_f64, 0.5, 1.3].iter().map(|t| p(r * t.cos(), r * t.sin())).collect();
        assert!((menger(pts[0], pts[1], pts[2]) - 1.0 / r).abs() < 1e-14);
        assert!((menger(pts[2], pts[1], pts[0]) + 1.0 / r).abs() < 1e-14);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let pts = vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(find_self_intersection(&pts, Ends::Closed).is_some());
        assert!(find_self_intersection_bruteforce(&pts, Ends::Closed).is_some());
        let square = vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        assert!(find_self_intersection(&square, Ends::Closed).is_none());
    }

    #[test]
    fn redistribute_keeps_endpoints() {
        let pts: Vec<Point> = (0..10).map(|i| p(i as f64 * (i as f64), 1.0)).collect();
        let out = redistribute(&pts, Ends::Free, &[1.0; 10]);
        assert_eq!(out[0], pts[0]);
        assert_eq!(*out.last().unwrap(), pts[9]);
        assert_eq!(out.len(), 82);
    }

    #[test]
    fn segment_distance_parallel() {
        let d = segment_distance(p(0.0, 0.0), p(1.0, 0.0), p(0.5, 2.0), p(3.0, 2.0));
        assert!((d - 2.0).abs() < 1e-15);
    }
}
