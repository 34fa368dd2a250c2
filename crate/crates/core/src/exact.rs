//! Closed-form solutions and parameterised initial data.

use crate::error::{McfError, Result};
use crate::geometry::{polyline, AxisymProfile, Closure, Geometry, Point, PolyCurve};
use std::f64::consts::{FRAC_PI_2, PI};

/// Round sphere `S^n` shrinking from radius `r0` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSolution {
    pub r0: f64,
    pub n: usize,
}

impl SphereSolution {
    pub fn new(r0: f64, n: usize) -> Self {
        Self { r0, n }
    }

    pub fn extinction(&self) -> f64 {
        self.r0 * self.r0 / (2.0 * self.n as f64)
    }

    pub fn radius(&self, t: f64) -> Result<f64> {
        let t_ext = self.extinction();
        if t >= t_ext {
            return Err(McfError::PastExtinction { t, extinction: t_ext });
        }
        Ok((self.r0 * self.r0 - 2.0 * self.n as f64 * t).sqrt())
    }

    /// `dr/dt = -n / r`.
    pub fn radius_rate(&self, t: f64) -> Result<f64> {
        Ok(-(self.n as f64) / self.radius(t)?)
    }
}

/// Shrinking cylinder `R^j x S^(n-j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderSolution {
    pub r0: f64,
    pub n: usize,
    pub j: usize,
}

impl CylinderSolution {
    pub fn new(r0: f64, n: usize, j: usize) -> Self {
        Self { r0, n, j }
    }

    pub fn extinction(&self) -> f64 {
        self.r0 * self.r0 / (2.0 * (self.n - self.j) as f64)
    }

    pub fn radius(&self, t: f64) -> Result<f64> {
        let t_ext = self.extinction();
        if t >= t_ext {
            return Err(McfError::PastExtinction { t, extinction: t_ext });
        }
        Ok((self.r0 * self.r0 - 2.0 * (self.n - self.j) as f64 * t).sqrt())
    }
}

/// Regular `count`-gon inscribed in the circle of radius `r` about `center`.
pub fn circle(center: Point, r: f64, count: usize) -> Result<PolyCurve> {
    PolyCurve::closed(
        (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                center + Point::new(r * t.cos(), r * t.sin())
            })
            .collect(),
    )
}

/// Semicircular profile of radius `r` centred at `(cx, 0)`, with `count`
/// points equally spaced in angle from the left pole to the right pole.
pub fn sphere_profile(cx: f64, r: f64, n: usize, count: usize) -> Result<AxisymProfile> {
    let pts = (0..count)
        .map(|i| {
            let t = PI - PI * i as f64 / (count - 1) as f64;
            let y = if i == 0 || i + 1 == count { 0.0 } else { r * t.sin() };
            Point::new(cx + r * t.cos(), y)
        })
        .collect();
    AxisymProfile::new(pts, n, Closure::AxisToAxis)
}

/// The exact sphere solution at time `t`: a circle for `n = 1`, a
/// semicircular profile otherwise.
pub fn sphere_at(sol: &SphereSolution, t: f64, count: usize) -> Result<Geometry> {
    let r = sol.radius(t)?;
    if sol.n == 1 {
        Ok(circle(Point::zeros(), r, count)?.into())
    } else {
        Ok(sphere_profile(0.0, r, sol.n, count)?.into())
    }
}

/// Open cylinder segment `|x| <= length/2` at time `t`.
pub fn cylinder_at(sol: &CylinderSolution, t: f64, length: f64, count: usize) -> Result<AxisymProfile> {
    if sol.j != 1 {
        return Err(McfError::UnsupportedFactorization(sol.j));
    }
    let r = sol.radius(t)?;
    let pts = (0..count).map(|i| Point::new(-0.5 * length + length * i as f64 / (count - 1) as f64, r)).collect();
    AxisymProfile::new(pts, sol.n, Closure::OpenSegment)
}

/// Grim reaper graph `u_t(p) = t - log cos p` on the given (increasing) grid.
pub fn grim_reaper(t: f64, p_grid: &[f64]) -> Result<PolyCurve> {
    let pts = p_grid
        .iter()
        .map(|&p| {
            if p.abs() >= FRAC_PI_2 {
                Err(McfError::DomainViolation(p))
            } else {
                Ok(Point::new(p, grim_reaper_height(t, p)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    PolyCurve::open(pts)
}

pub fn grim_reaper_height(t: f64, p: f64) -> f64 {
    t - p.cos().ln()
}

/// Grid on `[-p_max, p_max]` that is uniform in arclength along the grim
/// reaper (arclength from the vertex is `asinh(tan p)`).
pub fn grim_reaper_grid(p_max: f64, count: usize) -> Vec<f64> {
    let s_max = p_max.tan().asinh();
    (0..count)
        .map(|i| {
            let s = -s_max + 2.0 * s_max * i as f64 / (count - 1) as f64;
            s.sinh().atan()
        })
        .collect()
}

/// Straight segment `{(x, 0) : |x| <= half_length}`; a static solution.
pub fn line_segment(half_length: f64, count: usize) -> Result<PolyCurve> {
    PolyCurve::open(
        (0..count)
            .map(|i| Point::new(-half_length + 2.0 * half_length * i as f64 / (count - 1) as f64, 0.0))
            .collect(),
    )
}

/// Parameters of `count` points equally spaced in arclength along `curve`
/// on `[t0, t1]` (the end `t1` is excluded for closed curves). Arclength is
/// measured on a polygon 32 times finer and inverted linearly.
fn equal_arclength(curve: impl Fn(f64) -> Point, t0: f64, t1: f64, count: usize, closed: bool) -> Vec<f64> {
    let m = count * 32;
    let ts: Vec<f64> = (0..=m).map(|i| t0 + (t1 - t0) * i as f64 / m as f64).collect();
    let mut s = vec![0.0; m + 1];
    for i in 1..=m {
        s[i] = s[i - 1] + (curve(ts[i]) - curve(ts[i - 1])).norm();
    }
    let spans = if closed { count } else { count - 1 };
    let mut j = 0;
    (0..count)
        .map(|k| {
            let target = s[m] * k as f64 / spans as f64;
            while j + 1 < m && s[j + 1] < target {
                j += 1;
            }
            let f = ((target - s[j]) / (s[j + 1] - s[j])).clamp(0.0, 1.0);
            ts[j] + f * (ts[j + 1] - ts[j])
        })
        .collect()
}

/// Ellipse with semi-axes `a` (along x) and `b`, sampled uniformly in
/// arclength. Every vertex lies on the ellipse.
pub fn ellipse(a: f64, b: f64, count: usize) -> Result<PolyCurve> {
    let curve = |t: f64| Point::new(a * t.cos(), b * t.sin());
    PolyCurve::closed(equal_arclength(curve, 0.0, 2.0 * PI, count, true).into_iter().map(curve).collect())
}

/// Profile of the ellipsoid of revolution `x^2/a^2 + r^2/b^2 = 1`.
pub fn ellipsoid_profile(a: f64, b: f64, n: usize, count: usize) -> Result<AxisymProfile> {
    let curve = |t: f64| Point::new(a * t.cos(), b * t.sin());
    let ts = equal_arclength(curve, PI, 0.0, count, false);
    let last = ts.len() - 1;
    let pts = ts
        .into_iter()
        .enumerate()
        .map(|(k, t)| if k == 0 || k == last { Point::new(a * t.cos(), 0.0) } else { curve(t) })
        .collect();
    AxisymProfile::new(pts, n, Closure::AxisToAxis)
}

fn resample_dense(dense: Vec<Point>, n: usize, count: usize) -> Result<AxisymProfile> {
    let len: f64 = polyline::edge_lengths(&dense, polyline::Ends::Axis).iter().sum();
    let density = vec![(count - 1) as f64 / len; dense.len()];
    let pts = polyline::redistribute(&dense, polyline::Ends::Axis, &density);
    AxisymProfile::new(pts, n, Closure::AxisToAxis)
}

/// Two round bulbs joined by a cylindrical neck.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumbbellSpec {
    pub bulb_radius: f64,
    pub neck_radius: f64,
    pub neck_halflength: f64,
    /// Width of the blend between the neck and each bulb.
    pub smoothing: f64,
}

impl DumbbellSpec {
    pub fn new(bulb_radius: f64, neck_radius: f64, neck_halflength: f64) -> Self {
        Self { bulb_radius, neck_radius, neck_halflength, smoothing: 0.6 }
    }

    pub fn chain(&self) -> BulbChain {
        BulbChain {
            bulbs: vec![self.bulb_radius, self.bulb_radius],
            necks: vec![Neck { radius: self.neck_radius, halflength: self.neck_halflength }],
            smoothing: self.smoothing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neck {
    pub radius: f64,
    pub halflength: f64,
}

/// Row of round bulbs (left to right) joined by cylindrical necks; the
/// general form of the dumbbell used for asymmetric and multi-neck runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BulbChain {
    pub bulbs: Vec<f64>,
    pub necks: Vec<Neck>,
    pub smoothing: f64,
}

/// Quintic Hermite segment on `[x0, x0 + w]` matching value, slope and second
/// derivative at both ends.
#[derive(Debug, Clone, Copy)]
struct Quintic {
    x0: f64,
    c: [f64; 6],
}

impl Quintic {
    fn new(x0: f64, w: f64, left: [f64; 3], right: [f64; 3]) -> Self {
        let a0 = left[0];
        let a1 = left[1];
        let a2 = 0.5 * left[2];
        let r0 = right[0] - (a0 + a1 * w + a2 * w * w);
        let r1 = right[1] - (a1 + 2.0 * a2 * w);
        let r2 = right[2] - 2.0 * a2;
        let a3 = (20.0 * r0 - 8.0 * r1 * w + r2 * w * w) / (2.0 * w.powi(3));
        let a4 = (-30.0 * r0 + 14.0 * r1 * w - 2.0 * r2 * w * w) / (2.0 * w.powi(4));
        let a5 = (12.0 * r0 - 6.0 * r1 * w + r2 * w * w) / (2.0 * w.powi(5));
        Self { x0, c: [a0, a1, a2, a3, a4, a5] }
    }

    fn eval(&self, x: f64) -> [f64; 3] {
        let u = x - self.x0;
        let c = &self.c;
        let v = c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * (c[4] + u * c[5]))));
        let d = c[1] + u * (2.0 * c[2] + u * (3.0 * c[3] + u * (4.0 * c[4] + u * 5.0 * c[5])));
        let s = 2.0 * c[2] + u * (6.0 * c[3] + u * (12.0 * c[4] + u * 20.0 * c[5]));
        [v, d, s]
    }
}

/// Where a neck attaches to a bulb: height is halfway between neck and bulb.
fn join_height(neck: f64, bulb: f64) -> f64 {
    neck + 0.5 * (bulb - neck)
}

impl BulbChain {
    fn validate(&self) -> Result<()> {
        if self.bulbs.len() != self.necks.len() + 1 || self.bulbs.is_empty() {
            return Err(McfError::InvalidSpec("need exactly one more bulb than necks".into()));
        }
        if !(self.smoothing > 0.0) {
            return Err(McfError::InvalidSpec("smoothing must be positive".into()));
        }
        for (i, neck) in self.necks.iter().enumerate() {
            let smaller = self.bulbs[i].min(self.bulbs[i + 1]);
            if !(neck.radius > 0.0) || neck.radius >= smaller {
                return Err(McfError::InvalidSpec(format!(
                    "neck radius {} must lie in (0, {smaller})",
                    neck.radius
                )));
            }
            if !(neck.halflength >= 0.0) {
                return Err(McfError::InvalidSpec("neck halflength must be non-negative".into()));
            }
        }
        if self.bulbs.iter().any(|b| !(*b > 0.0)) {
            return Err(McfError::InvalidSpec("bulb radii must be positive".into()));
        }
        Ok(())
    }

    /// Densely sampled profile, left pole to right pole.
    fn dense(&self, step: f64) -> Vec<Point> {
        let w = self.smoothing;
        let mut pts: Vec<Point> = Vec::new();
        // (center, radius) of each bulb and its left/right join angles
        let mut centers = Vec::with_capacity(self.bulbs.len());
        let mut left_angle = vec![PI; self.bulbs.len()];
        let mut right_angle = vec![0.0; self.bulbs.len()];
        let b0 = self.bulbs[0];
        let mut c = b0;
        centers.push(c);
        for (i, neck) in self.necks.iter().enumerate() {
            let (bl, br) = (self.bulbs[i], self.bulbs[i + 1]);
            let hl = join_height(neck.radius, bl);
            let hr = join_height(neck.radius, br);
            right_angle[i] = (hl / bl).asin();
            let xj_left = c + (bl * bl - hl * hl).sqrt();
            let neck_start = xj_left + w;
            let neck_end = neck_start + 2.0 * neck.halflength;
            let xj_right = neck_end + w;
            let c_next = xj_right + (br * br - hr * hr).sqrt();
            left_angle[i + 1] = PI - (hr / br).asin();
            centers.push(c_next);
            c = c_next;
        }
        for i in 0..self.bulbs.len() {
            let (ci, bi) = (centers[i], self.bulbs[i]);
            let (a0, a1) = (left_angle[i], right_angle[i]);
            let m = (((a0 - a1) * bi / step).ceil() as usize).max(8);
            let start = if i == 0 { 0 } else { 1 };
            for k in start..=m {
                let t = a0 - (a0 - a1) * k as f64 / m as f64;
                let y = if (i == 0 && k == 0) || (i + 1 == self.bulbs.len() && k == m) { 0.0 } else { bi * t.sin() };
                pts.push(Point::new(ci + bi * t.cos(), y));
            }
            if i < self.necks.len() {
                let neck = self.necks[i];
                let (bl, br) = (self.bulbs[i], self.bulbs[i + 1]);
                let hl = join_height(neck.radius, bl);
                let hr = join_height(neck.radius, br);
                let xj_left = ci + (bl * bl - hl * hl).sqrt();
                let sl = -(xj_left - ci) / hl;
                let kl = -bl * bl / hl.powi(3);
                let neck_start = xj_left + w;
                let neck_end = neck_start + 2.0 * neck.halflength;
                let xj_right = neck_end + w;
                let cn = centers[i + 1];
                let sr = (cn - xj_right) / hr;
                let kr = -br * br / hr.powi(3);
                let left = Quintic::new(xj_left, w, [hl, sl, kl], [neck.radius, 0.0, 0.0]);
                let right = Quintic::new(neck_end, w, [neck.radius, 0.0, 0.0], [hr, sr, kr]);
                let total = xj_right - xj_left;
                let m = ((total / step).ceil() as usize).max(8);
                for k in 1..m {
                    let xx = xj_left + total * k as f64 / m as f64;
                    let r = if xx < neck_start {
                        left.eval(xx)[0]
                    } else if xx <= neck_end {
                        neck.radius
                    } else {
                        right.eval(xx)[0]
                    };
                    pts.push(Point::new(xx, r));
                }
            }
        }
        // centre the chain on the origin of the axis
        let shift = 0.5 * (pts[0].x + pts[pts.len() - 1].x);
        for p in &mut pts {
            p.x -= shift;
        }
        pts
    }

    pub fn profile(&self, n: usize, count: usize) -> Result<AxisymProfile> {
        self.validate()?;
        let smallest = self
            .necks
            .iter()
            .map(|k| k.radius)
            .chain(self.bulbs.iter().copied())
            .fold(f64::INFINITY, f64::min);
        resample_dense(self.dense(smallest * 1e-3), n, count)
    }

    /// Exact radius of the generating graph at axial position `x` (relative to
    /// the centred profile), sampled from a fine dense polyline.
    pub fn radius_at(&self, x: f64) -> Option<f64> {
        let pts = self.dense(1e-4);
        pts.windows(2).find(|w| w[0].x <= x && x <= w[1].x).map(|w| {
            let u = if w[1].x > w[0].x { (x - w[0].x) / (w[1].x - w[0].x) } else { 0.0 };
            w[0].y + u * (w[1].y - w[0].y)
        })
    }
}

/// Dumbbell profile with `count` points for the `n`-dimensional hypersurface.
pub fn dumbbell(spec: &DumbbellSpec, n: usize, count: usize) -> Result<AxisymProfile> {
    if !(spec.neck_radius > 0.0) || spec.neck_radius >= spec.bulb_radius {
        return Err(McfError::InvalidSpec(format!(
            "neck radius {} must lie in (0, bulb radius {})",
            spec.neck_radius, spec.bulb_radius
        )));
    }
    spec.chain().profile(n, count)
}

/// Pointwise `|H_vec - x_perp / (2t)|` about the space-time origin.
///
/// Vanishes identically on a self-similarly shrinking solution.
pub fn soliton_residual(g: &Geometry, t: f64) -> Result<Vec<f64>> {
    if t >= 0.0 {
        return Err(McfError::NonNegativeTime(t));
    }
    let q = g.quantities();
    Ok(g.points()
        .iter()
        .enumerate()
        .map(|(i, p)| (q.h[i] + p.dot(&q.normal[i]) / (2.0 * t)).abs())
        .collect())
}
