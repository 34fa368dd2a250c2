//! Gaussian density ratios and the monotonicity monitor.

use crate::error::{McfError, Result};
use crate::flow::{FlowHistory, Slice};
use crate::geometry::{sphere_area, Geometry, Point, QuantityField, SpacetimePoint};
use crate::par;
use std::f64::consts::PI;

/// Angular samples on `[0, pi]` for orbit integrals about off-axis centers.
const ORBIT_SAMPLES: usize = 129;

/// Backwards heat kernel in dimension `n`, given the squared distance.
fn kernel_sq(dist_sq: f64, tau: f64, n: usize) -> f64 {
    (4.0 * PI * tau).powf(-(n as f64) / 2.0) * (-dist_sq / (4.0 * tau)).exp()
}

fn cutoff_sq(dist_sq: f64, tau: f64, n: usize, rho: f64) -> f64 {
    if rho.is_infinite() {
        return 1.0;
    }
    let u = 1.0 - (dist_sq - 2.0 * n as f64 * tau) / (rho * rho);
    if u <= 0.0 {
        0.0
    } else {
        u * u * u
    }
}

/// `(4 pi (t0 - t))^(-n/2) exp(-|x - x0|^2 / (4 (t0 - t)))`.
pub fn heat_kernel(x: Point, t: f64, center: SpacetimePoint, n: usize) -> Result<f64> {
    if t >= center.t0 {
        return Err(McfError::NonBackwardTime { t, t0: center.t0 });
    }
    Ok(kernel_sq((x - center.x0).norm_squared(), center.t0 - t, n))
}

/// Localizing cutoff `(1 - (|x - x0|^2 + 2n (t - t0)) / rho^2)_+^3`.
///
/// It is not renormalized: for `t < t0` near `x0` it exceeds 1.
pub fn cutoff(x: Point, t: f64, center: SpacetimePoint, rho: f64, n: usize) -> f64 {
    cutoff_sq((x - center.x0).norm_squared(), center.t0 - t, n, rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProbe {
    pub center: SpacetimePoint,
    /// Localization radius; `f64::INFINITY` for the global kernel.
    pub cutoff_scale: f64,
    pub r_grid: Vec<f64>,
}

impl DensityProbe {
    pub fn new(center: SpacetimePoint, cutoff_scale: f64, mut r_grid: Vec<f64>) -> Result<Self> {
        if !(cutoff_scale > 0.0) {
            return Err(McfError::InvalidSpec(format!("cutoff scale must be positive, got {cutoff_scale}")));
        }
        if r_grid.is_empty() {
            return Err(McfError::InvalidSpec("empty scale grid".into()));
        }
        for &r in &r_grid {
            if !(r > 0.0 && r < cutoff_scale) {
                return Err(McfError::InvalidSpec(format!("scale {r} outside (0, {cutoff_scale})")));
            }
        }
        r_grid.sort_by(f64::total_cmp);
        Ok(Self { center, cutoff_scale, r_grid })
    }

    /// `count` scales geometrically spaced in `[r_min, r_max]`.
    pub fn geometric(center: SpacetimePoint, cutoff_scale: f64, r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        let count = count.max(1);
        let grid = (0..count)
            .map(|k| {
                if count == 1 {
                    r_min
                } else {
                    r_min * (r_max / r_min).powf(k as f64 / (count - 1) as f64)
                }
            })
            .collect();
        Self::new(center, cutoff_scale, grid)
    }
}

/// The slice used for time `t`: the nearest recorded one, which must lie
/// within one time step of `t`.
pub fn slice_at(history: &FlowHistory, t: f64) -> Result<&Slice> {
    slice_before(history, t, f64::INFINITY)
}

/// As [`slice_at`], among the slices strictly before `limit`.
pub fn slice_before(history: &FlowHistory, t: f64, limit: f64) -> Result<&Slice> {
    let (lo, hi) = history.time_range().ok_or(McfError::UncoveredTime(t))?;
    let slack = 1e-12 * t.abs().max(1.0);
    if t < lo - slack || t > hi + slack {
        return Err(McfError::UncoveredTime(t));
    }
    let slice = history
        .slices
        .iter()
        .filter(|s| s.time < limit)
        .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
        .ok_or(McfError::UncoveredTime(t))?;
    let gap = (slice.time - t).abs();
    if gap <= slack {
        return Ok(slice);
    }
    // the step that straddles t
    let step = history
        .scalars
        .iter()
        .rev()
        .find(|row| row.time <= t)
        .map(|row| row.dt)
        .unwrap_or(0.0);
    if gap <= step * (1.0 + 1e-9) {
        Ok(slice)
    } else {
        Err(McfError::UncoveredTime(t))
    }
}

/// Integrand data at one vertex: squared distances to the center over the
/// orbit samples, with their quadrature weights (which sum to 1).
fn orbit_nodes(p: Point, x0: Point, axisym: bool, n: usize) -> Vec<(f64, f64, f64)> {
    let dx = p.x - x0.x;
    if !axisym {
        let d = p - x0;
        return vec![(d.norm_squared(), 1.0, 0.0)];
    }
    if x0.y == 0.0 || p.y == 0.0 {
        return vec![(dx * dx + p.y * p.y + x0.y * x0.y, 1.0, 1.0)];
    }
    // y runs over the orbit: |y - x0|^2 = dx^2 + r^2 + y0^2 - 2 r y0 cos(theta),
    // with measure proportional to sin^(n-2)(theta) on [0, pi].
    let m = ORBIT_SAMPLES - 1;
    let mut nodes = Vec::with_capacity(ORBIT_SAMPLES);
    let mut total = 0.0;
    for k in 0..=m {
        let th = PI * k as f64 / m as f64;
        let trap = if k == 0 || k == m { 0.5 } else { 1.0 };
        let w = if n == 2 { trap } else { trap * th.sin().powi(n as i32 - 2) };
        total += w;
        nodes.push((dx * dx + p.y * p.y + x0.y * x0.y - 2.0 * p.y * x0.y * th.cos(), w, th.cos()));
    }
    for node in &mut nodes {
        node.1 /= total;
    }
    nodes
}

fn slice_density(slice: &Slice, center: SpacetimePoint, rho: f64) -> Result<f64> {
    let tau = center.t0 - slice.time;
    if !(tau > 0.0) {
        return Err(McfError::NonBackwardTime { t: slice.time, t0: center.t0 });
    }
    let mut total = 0.0;
    for g in slice.geometries() {
        total += geometry_density(g, tau, center.x0, rho)?;
    }
    Ok(total)
}

/// `sum_i rho phi weight_i` for one geometry at backward time `tau`.
pub fn geometry_density(g: &Geometry, tau: f64, x0: Point, rho: f64) -> Result<f64> {
    if g.is_axisymmetric() && x0.y < 0.0 {
        return Err(McfError::OffAxisCenter);
    }
    let n = g.dimension();
    let weights = g.area_weights();
    let pts = g.points();
    let axisym = g.is_axisymmetric();
    let terms = par::map_indexed(pts.len(), |i| {
        let mut s = 0.0;
        for (d2, w, _) in orbit_nodes(pts[i], x0, axisym, n) {
            s += w * kernel_sq(d2, tau, n) * cutoff_sq(d2, tau, n, rho);
        }
        s * weights[i]
    });
    Ok(terms.iter().sum())
}

/// Self-similarity defect `sum (H + <x - x0, nu> / (2 (t - t0)))^2 rho phi dmu`.
pub fn geometry_defect(g: &Geometry, q: &QuantityField, tau: f64, x0: Point, rho: f64) -> f64 {
    let n = g.dimension();
    let pts = g.points();
    let axisym = g.is_axisymmetric();
    let terms = par::map_indexed(pts.len(), |i| {
        let p = pts[i];
        let nu = q.normal[i];
        let mut s = 0.0;
        for (d2, w, c) in orbit_nodes(p, x0, axisym, n) {
            // <X - X0, nu> with the orbit point rotated by theta
            let support = if axisym {
                (p.x - x0.x) * nu.x + nu.y * (p.y - x0.y * c)
            } else {
                (p - x0).dot(&nu)
            };
            let e = q.h[i] - support / (2.0 * tau);
            s += w * e * e * kernel_sq(d2, tau, n) * cutoff_sq(d2, tau, n, rho);
        }
        s * q.weight[i]
    });
    terms.iter().sum()
}

/// `Theta(r)` for every scale of the probe, in the probe's scale order.
pub fn gaussian_density(history: &FlowHistory, probe: &DensityProbe) -> Result<Vec<(f64, f64)>> {
    probe
        .r_grid
        .iter()
        .map(|&r| {
            let slice = slice_before(history, probe.center.t0 - r * r, probe.center.t0)?;
            Ok((r, slice_density(slice, probe.center, probe.cutoff_scale)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// `(r, Theta)` by increasing `r`, i.e. from the latest slice backwards.
    pub series: Vec<(f64, f64)>,
    /// Largest increase of `Theta` forward in time between consecutive
    /// scales, clamped at zero.
    pub max_violation: f64,
    /// Weighted self-similarity defect per scale.
    pub defect_series: Vec<f64>,
}

impl MonotonicityReport {
    /// Per-scale violation: `Theta(r_k) - Theta(r_{k+1})`, zero for the
    /// largest scale.
    pub fn violations(&self) -> Vec<f64> {
        let s = &self.series;
        (0..s.len()).map(|k| if k + 1 < s.len() { s[k].1 - s[k + 1].1 } else { 0.0 }).collect()
    }
}

pub fn monotonicity_report(history: &FlowHistory, probe: &DensityProbe) -> Result<MonotonicityReport> {
    let mut series = Vec::with_capacity(probe.r_grid.len());
    let mut defect_series = Vec::with_capacity(probe.r_grid.len());
    for &r in &probe.r_grid {
        let slice = slice_before(history, probe.center.t0 - r * r, probe.center.t0)?;
        let tau = probe.center.t0 - slice.time;
        let theta = slice_density(slice, probe.center, probe.cutoff_scale)?;
        let mut defect = 0.0;
        for g in slice.geometries() {
            defect += geometry_defect(g, &g.quantities(), tau, probe.center.x0, probe.cutoff_scale);
        }
        series.push((r, theta));
        defect_series.push(defect);
    }
    let max_violation = series.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0_f64, f64::max);
    Ok(MonotonicityReport { series, max_violation, defect_series })
}

/// Density of the shrinking round sphere `S^n` (any time, any cutoff-free
/// center at its extinction point), by quadrature over the polar angle.
pub fn sphere_density_quadrature(n: usize, samples: usize) -> f64 {
    // radius^2 = 2 n tau; take tau = 1
    let tau = 1.0;
    let r = (2.0 * n as f64 * tau).sqrt();
    let k = kernel_sq(r * r, tau, n);
    if n == 1 {
        return 2.0 * PI * r * k;
    }
    let orbit = sphere_area(n - 1);
    let f = |phi: f64| orbit * (r * phi.sin()).powi(n as i32 - 1) * r;
    // composite Simpson on [0, pi]
    let m = samples.max(2).next_multiple_of(2);
    let h = PI / m as f64;
    let mut s = f(0.0) + f(PI);
    for j in 1..m {
        s += if j % 2 == 1 { 4.0 } else { 2.0 } * f(j as f64 * h);
    }
    s * h / 3.0 * k
}

/// Density of the shrinking cylinder `S^(n-1) x R` in `R^(n+1)`, by
/// trapezoid quadrature along the axis.
pub fn cylinder_density_quadrature(n: usize, samples: usize) -> f64 {
    assert!(n >= 2, "the cylinder needs n >= 2");
    let tau = 1.0;
    let r = (2.0 * (n - 1) as f64 * tau).sqrt();
    let cross = sphere_area(n - 1) * r.powi(n as i32 - 1);
    let half = 40.0 * tau.sqrt();
    let m = samples.max(2);
    let h = 2.0 * half / m as f64;
    let mut s = 0.0;
    for j in 0..=m {
        let z = -half + j as f64 * h;
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        s += w * kernel_sq(r * r + z * z, tau, n);
    }
    s * h * cross
}
