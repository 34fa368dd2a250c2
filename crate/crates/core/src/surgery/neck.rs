//! Detection of strong necks on axisymmetric profiles.
//!
//! Closeness in high derivatives is replaced by a second-order proxy: after
//! rescaling by the neck radius `s`, the profile over the axial window
//! `|x - c| <= s / delta` must satisfy `|r / s - rho(tau)| <= delta`,
//! `|r'| <= delta` and `s |r''| <= delta`, where `rho(tau)` is the radius of
//! the model cylinder at rescaled time `tau`.

use super::SurgeryParams;
use crate::error::{McfError, Result};
use crate::flow::{FlowHistory, Slice};
use crate::geometry::{Closure, Geometry, Point};

/// Rescaled backward times at which a strong neck is checked.
pub const CHECK_TIMES: [f64; 3] = [-1.0, -0.5, 0.0];

/// Allowed mismatch between a requested and a recorded time, in units of
/// `s^2`.
pub const TIME_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct NeckRegion {
    /// Id of the component carrying the neck.
    pub component: usize,
    /// Axial coordinate of the center.
    pub center: f64,
    pub center_index: usize,
    /// Neck radius `s`.
    pub radius: f64,
    /// Index range `[first, last]` of the maximal neck region.
    pub extent: (usize, usize),
    /// Axial range covered by `extent`.
    pub span: (f64, f64),
    /// Achieved closeness; at most `delta`.
    pub quality: f64,
}

impl NeckRegion {
    pub fn length(&self) -> f64 {
        self.span.1 - self.span.0
    }
}

/// First and second derivative of the graph `r(x)` at interior index `j`.
fn derivatives(pts: &[Point], j: usize) -> (f64, f64) {
    let (a, b, c) = (pts[j - 1], pts[j], pts[j + 1]);
    let h1 = b.x - a.x;
    let h2 = c.x - b.x;
    let den = h1 * h2 * (h1 + h2);
    let d1 = (h1 * h1 * c.y - h2 * h2 * a.y + (h2 * h2 - h1 * h1) * b.y) / den;
    let d2 = 2.0 * (h1 * c.y - (h1 + h2) * b.y + h2 * a.y) / den;
    (d1, d2)
}

/// Index range `[lo, hi]` of vertices with `|x - center| <= half`, provided
/// the profile is a graph with room for one more vertex on each side.
fn window(pts: &[Point], center: f64, half: f64) -> Option<(usize, usize)> {
    let lo = pts.iter().position(|p| p.x >= center - half)?;
    let hi = pts.iter().rposition(|p| p.x <= center + half)?;
    if lo == 0 || hi + 1 >= pts.len() || lo > hi {
        return None;
    }
    if pts[lo - 1..=hi + 1].windows(2).any(|w| w[1].x <= w[0].x) {
        return None;
    }
    // the window must stay away from the axis
    if pts[lo..=hi].iter().any(|p| p.y <= 0.0) {
        return None;
    }
    Some((lo, hi))
}

/// Closeness of the profile to the cylinder of radius `s * rho` over the
/// window; `None` if the window does not fit on the profile.
fn closeness(pts: &[Point], center: f64, s: f64, rho: f64, delta: f64) -> Option<f64> {
    let (lo, hi) = window(pts, center, s / delta)?;
    let mut worst = 0.0_f64;
    for j in lo..=hi {
        let (d1, d2) = derivatives(pts, j);
        worst = worst.max((pts[j].y / s - rho).abs()).max(d1.abs()).max((s * d2).abs());
    }
    Some(worst)
}

/// Model cylinder radius at rescaled time `tau` (radius 1 at `tau = 0`).
pub fn model_radius(n: usize, tau: f64) -> f64 {
    (1.0 - 2.0 * (n as f64 - 1.0) * tau).sqrt()
}

fn candidates(pts: &[Point], h: &[f64], params: &SurgeryParams, n: usize) -> Vec<usize> {
    let s_sharp = params.s_sharp(n);
    let (s_lo, s_hi) = (s_sharp / params.mu.sqrt(), s_sharp * params.mu.sqrt());
    (1..pts.len().saturating_sub(1))
        .filter(|&i| {
            let r = pts[i].y;
            r >= s_lo && r <= s_hi && (h[i] - params.h_neck).abs() <= 0.1 * params.h_neck
        })
        .collect()
}

/// Groups passing candidates into pairwise disjoint regions.
fn regions(component: usize, pts: &[Point], passing: &[(usize, f64)], delta: f64) -> Vec<NeckRegion> {
    let mut out: Vec<NeckRegion> = Vec::new();
    for &(i, q) in passing {
        let s = pts[i].y;
        let Some((lo, hi)) = window(pts, pts[i].x, s / delta) else { continue };
        match out.last_mut() {
            Some(last) if lo <= last.extent.1 => {
                last.extent.1 = last.extent.1.max(hi);
                last.span.1 = pts[last.extent.1].x;
                if q < last.quality {
                    last.center = pts[i].x;
                    last.center_index = i;
                    last.radius = s;
                    last.quality = q;
                }
            }
            _ => out.push(NeckRegion {
                component,
                center: pts[i].x,
                center_index: i,
                radius: s,
                extent: (lo, hi),
                span: (pts[lo].x, pts[hi].x),
                quality: q,
            }),
        }
    }
    out
}

fn profile_points(g: &Geometry) -> Option<&[Point]> {
    match g {
        Geometry::Axisym(p) if p.closure() != Closure::OffAxisLoop => Some(p.points()),
        _ => None,
    }
}

/// Necks in the given slice, checked at the final time only.
pub fn detect_necks_final(slice: &Slice, params: &SurgeryParams) -> Vec<NeckRegion> {
    let mut out = Vec::new();
    for c in &slice.components {
        let Some(pts) = profile_points(&c.geometry) else { continue };
        let n = c.geometry.dimension();
        let q = c.geometry.quantities();
        let passing: Vec<(usize, f64)> = candidates(pts, &q.h, params, n)
            .into_iter()
            .filter_map(|i| {
                let v = closeness(pts, pts[i].x, pts[i].y, 1.0, params.delta)?;
                (v <= params.delta).then_some((i, v))
            })
            .collect();
        out.extend(regions(c.id, pts, &passing, params.delta));
    }
    out
}

fn slice_near(history: &FlowHistory, t: f64, tol: f64) -> Option<&Slice> {
    history.nearest_slice(t).filter(|s| (s.time - t).abs() <= tol)
}

fn component_points(slice: &Slice, id: usize, center: f64) -> Option<&[Point]> {
    let by_id = slice.components.iter().find(|c| c.id == id);
    let covering = || {
        slice.components.iter().find(|c| {
            let pts = c.geometry.points();
            pts.first().is_some_and(|a| a.x < center) && pts.last().is_some_and(|b| b.x > center)
        })
    };
    by_id.or_else(covering).and_then(|c| profile_points(&c.geometry))
}

/// Strong necks at time `t`: the final-time test plus the same test at the
/// earlier rescaled times of [`CHECK_TIMES`].
///
/// Fails with `InsufficientHistory` when some required earlier slice is
/// missing; callers may fall back to [`detect_necks_final`].
pub fn detect_necks(history: &FlowHistory, t: f64, params: &SurgeryParams) -> Result<Vec<NeckRegion>> {
    let now = history.nearest_slice(t).ok_or(McfError::InsufficientHistory(t))?;
    let mut out = Vec::new();
    for c in &now.components {
        let Some(pts) = profile_points(&c.geometry) else { continue };
        let n = c.geometry.dimension();
        let q = c.geometry.quantities();
        let mut passing = Vec::new();
        for i in candidates(pts, &q.h, params, n) {
            let s = pts[i].y;
            let Some(mut worst) = closeness(pts, pts[i].x, s, 1.0, params.delta) else { continue };
            if worst > params.delta {
                continue;
            }
            for &tau in &CHECK_TIMES[..2] {
                let target = now.time + tau * s * s;
                let past = slice_near(history, target, TIME_TOLERANCE * s * s)
                    .ok_or(McfError::InsufficientHistory(target))?;
                let earlier = component_points(past, c.id, pts[i].x)
                    .and_then(|p| closeness(p, pts[i].x, s, model_radius(n, tau), params.delta));
                worst = worst.max(earlier.unwrap_or(f64::INFINITY));
            }
            if worst <= params.delta {
                passing.push((i, worst));
            }
        }
        out.extend(regions(c.id, pts, &passing, params.delta));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::flow::FlowHistory;
    use crate::geometry::AxisymProfile;

    fn params(h_neck: f64) -> SurgeryParams {
        SurgeryParams { h_th: h_neck / 10.0, h_neck, h_trig: h_neck * 10.0, delta: 0.05, ..SurgeryParams::default() }
    }

    #[test]
    fn exact_cylinder_is_one_neck() {
        let s = 0.1;
        let sol = exact::CylinderSolution::new(s, 2, 1);
        let g: Geometry = exact::cylinder_at(&sol, 0.0, 8.0, 801).unwrap().into();
        let h = FlowHistory::from_geometries([(0.0, g)]);
        let found = detect_necks_final(&h.slices[0], &params(10.0));
        assert_eq!(found.len(), 1);
        assert!(found[0].quality < 1e-9, "{}", found[0].quality);
        assert!((found[0].radius - s).abs() < 1e-12);
    }

    #[test]
    fn round_sphere_has_no_neck() {
        let g: Geometry = exact::sphere_profile(0.0, 1.0, 2, 400).unwrap().into();
        let h = FlowHistory::from_geometries([(0.0, g)]);
        assert!(detect_necks_final(&h.slices[0], &params(1.0)).is_empty());
        assert!(detect_necks(&h, 0.0, &params(1.0)).unwrap().is_empty());
    }

    #[test]
    fn strong_check_needs_history() {
        let s = 0.1;
        let sol = exact::CylinderSolution::new(s, 2, 1);
        let g: Geometry = exact::cylinder_at(&sol, 0.0, 8.0, 801).unwrap().into();
        let h = FlowHistory::from_geometries([(1.0, g)]);
        assert!(matches!(detect_necks(&h, 1.0, &params(10.0)), Err(McfError::InsufficientHistory(_))));
    }

    #[test]
    fn strong_check_on_shrinking_cylinder() {
        // exact shrinking cylinder sampled at the three rescaled times
        let s: f64 = 0.1;
        let r0 = (s * s + 2.0 * s * s).sqrt();
        let sol = exact::CylinderSolution::new(r0, 2, 1);
        let t_now = s * s;
        let slices = CHECK_TIMES.iter().map(|tau| {
            let t = t_now + tau * s * s;
            let g: Geometry = exact::cylinder_at(&sol, t, 8.0, 801).unwrap().into();
            (t, g)
        });
        let h = FlowHistory::from_geometries(slices);
        let found = detect_necks(&h, t_now, &params(10.0)).unwrap();
        assert_eq!(found.len(), 1);
        assert!(found[0].quality < 1e-9);
        // a static (non-shrinking) cylinder fails the backward test
        let stat = CHECK_TIMES.iter().map(|tau| {
            let g: Geometry =
                AxisymProfile::new((0..801).map(|i| Point::new(-4.0 + 0.01 * i as f64, s)).collect(), 2, Closure::OpenSegment)
                    .unwrap()
                    .into();
            (t_now + tau * s * s, g)
        });
        let h = FlowHistory::from_geometries(stat);
        assert!(detect_necks(&h, t_now, &params(10.0)).unwrap().is_empty());
    }
}
