//! Noncollapsing quantities.
//!
//! For a base point `x` with inward unit normal `nu` the chord quantity
//! `k(x, y) = 2 <y - x, nu> / |y - x|^2` is the curvature of the sphere
//! through `y` tangent at `x`. `Z*` is its supremum over `y`, `Z_*` its
//! infimum; interior (exterior) balls of radius `alpha / H` fit at `x` iff
//! `Z* <= H / alpha` (`Z_* >= -H / alpha`).
//!
//! On a hypersurface of revolution the other point `y` runs over a whole
//! orbit. Writing `c = cos` of the angle between the meridians of `x` and
//! `y`, the chord quantity is a linear-fractional function of `c`, hence
//! monotone, and its extremes sit at `c = +1` (same meridian) and `c = -1`
//! (opposite meridian, i.e. the profile point reflected across the axis).
//! The candidate set is therefore the profile together with its mirror
//! image, which also contains the constant value on the orbit of `x` itself.

use crate::error::{McfError, Result};
use crate::geometry::{Geometry, Point};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct AndrewsReport {
    pub z_star: Vec<f64>,
    pub z_lower: Vec<f64>,
    pub h: Vec<f64>,
    pub alpha_interior: f64,
    pub alpha_exterior: f64,
    pub alpha: f64,
}

const CHUNK: usize = 32;

#[inline]
pub fn chord(x: Point, nu_in: Point, y: Point) -> f64 {
    let d = y - x;
    2.0 * d.dot(&nu_in) / d.norm_squared()
}

/// Planar candidates for the other point: profile points, plus their
/// mirror images for hypersurfaces of revolution.
fn candidates(g: &Geometry) -> Vec<Point> {
    let pts = g.points();
    let mut out = pts.to_vec();
    if g.is_axisymmetric() {
        out.extend(pts.iter().filter(|p| p.y > 0.0).map(|p| Point::new(p.x, -p.y)));
    }
    out
}

fn inward_normals(g: &Geometry) -> (Vec<Point>, Vec<f64>) {
    let q = g.quantities();
    (q.normal.iter().map(|n| -n).collect(), q.h)
}

/// All-pairs evaluation of `(Z*, Z_*)` at every vertex.
pub fn z_bruteforce(g: &Geometry) -> (Vec<f64>, Vec<f64>) {
    let (nu, _) = inward_normals(g);
    let cand = candidates(g);
    let pts = g.points();
    let pairs = par::map_indexed(pts.len(), |i| {
        let x = pts[i];
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for &y in &cand {
            if y == x {
                continue;
            }
            let k = chord(x, nu[i], y);
            hi = hi.max(k);
            lo = lo.min(k);
        }
        (hi, lo)
    });
    pairs.into_iter().unzip()
}

struct Chunk {
    center: Point,
    radius: f64,
    start: usize,
    end: usize,
}

fn chunks(cand: &[Point]) -> Vec<Chunk> {
    cand.chunks(CHUNK)
        .enumerate()
        .map(|(k, c)| {
            let center = c.iter().fold(Point::zeros(), |a, p| a + p) / c.len() as f64;
            let radius = c.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
            Chunk { center, radius, start: k * CHUNK, end: k * CHUNK + c.len() }
        })
        .collect()
}

/// Bounds `(lower, upper)` of the chord quantity over a ball of candidates,
/// or `None` when the ball contains the base point.
fn chunk_bounds(x: Point, nu: Point, c: &Chunk) -> Option<(f64, f64)> {
    let to = c.center - x;
    let dist = to.norm();
    // inflate the ball slightly so rounding can never exclude a candidate
    let rad = c.radius * (1.0 + 1e-9) + 1e-14 * dist;
    if dist <= rad {
        return None;
    }
    let proj = to.dot(&nu);
    let near = (dist - rad).powi(2);
    let far = (dist + rad).powi(2);
    let num_hi = proj + rad;
    let num_lo = proj - rad;
    let upper = if num_hi > 0.0 { 2.0 * num_hi / near } else { 2.0 * num_hi / far };
    let lower = if num_lo < 0.0 { 2.0 * num_lo / near } else { 2.0 * num_lo / far };
    Some((lower, upper))
}

/// Pruned evaluation of `(Z*, Z_*)`; bitwise equal to [`z_bruteforce`].
pub fn z_pruned(g: &Geometry) -> (Vec<f64>, Vec<f64>) {
    let (nu, _) = inward_normals(g);
    let cand = candidates(g);
    let blocks = chunks(&cand);
    let pts = g.points();
    let pairs = par::map_indexed(pts.len(), |i| {
        let x = pts[i];
        let bounds: Vec<Option<(f64, f64)>> = blocks.iter().map(|c| chunk_bounds(x, nu[i], c)).collect();
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        // unbounded (nearby) chunks first: they hold the extreme values
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by(|&a, &b| {
            let ka = bounds[a].map_or(f64::INFINITY, |b| b.1);
            let kb = bounds[b].map_or(f64::INFINITY, |b| b.1);
            kb.total_cmp(&ka)
        });
        for &k in &order {
            let skip_hi = matches!(bounds[k], Some((_, u)) if u <= hi);
            let skip_lo = matches!(bounds[k], Some((l, _)) if l >= lo);
            if skip_hi && skip_lo {
                continue;
            }
            for &y in &cand[blocks[k].start..blocks[k].end] {
                if y == x {
                    continue;
                }
                let v = chord(x, nu[i], y);
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
        (hi, lo)
    });
    pairs.into_iter().unzip()
}

/// Noncollapsing report of a mean convex geometry.
pub fn andrews_quantities(g: &Geometry) -> Result<AndrewsReport> {
    let q = g.quantities();
    let min_h = q.min_h();
    if !(min_h > 0.0) {
        return Err(McfError::NotMeanConvex(min_h));
    }
    let (z_star, z_lower) = z_pruned(g);
    let mut alpha_interior = f64::INFINITY;
    let mut alpha_exterior = f64::INFINITY;
    for i in 0..q.len() {
        if z_star[i] > 0.0 {
            alpha_interior = alpha_interior.min(q.h[i] / z_star[i]);
        }
        if z_lower[i] < 0.0 {
            alpha_exterior = alpha_exterior.min(q.h[i] / -z_lower[i]);
        }
    }
    Ok(AndrewsReport {
        z_star,
        z_lower,
        h: q.h,
        alpha_interior,
        alpha_exterior,
        alpha: alpha_interior.min(alpha_exterior),
    })
}
