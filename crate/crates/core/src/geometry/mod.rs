//! Discrete hypersurfaces and their pointwise geometry.
//!
//! Two representations cover every model in the crate:
//!
//! * [`PolyCurve`]: a polygon in the plane (the `n = 1` hypersurface),
//! * [`AxisymProfile`]: a profile curve in the half-plane `{(x, r) : r >= 0}`
//!   which, rotated about the `x`-axis, sweeps a hypersurface of dimension
//!   `n >= 2` in `R^(n+1)`.
//!
//! Normals are outward. With that choice the round sphere of radius `R` has
//! `H = n / R > 0` and points on it move toward the center under the flow.

pub mod polyline;
mod quantities;
mod resample;

pub use quantities::{ball_volume, sphere_area, QuantityField};
pub use resample::SpacingRule;

use crate::error::{McfError, Result};
use polyline::Ends;

pub type Point = nalgebra::Vector2<f64>;

/// Minimum vertex count of every discrete geometry.
pub const MIN_VERTICES: usize = 8;

/// A point in space-time. For axisymmetric geometry `x0 = (x, r)` lives in the
/// profile half-plane and `r` is the distance from the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub x0: Point,
    pub t0: f64,
}

impl SpacetimePoint {
    pub fn new(x: f64, y: f64, t0: f64) -> Self {
        Self { x0: Point::new(x, y), t0 }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

/// Embedded planar polygon, closed (counterclockwise) or an open arc.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCurve {
    vertices: Vec<Point>,
    open: bool,
}

impl PolyCurve {
    /// Closed polygon; orientation is normalized to counterclockwise.
    pub fn closed(mut vertices: Vec<Point>) -> Result<Self> {
        check_count(vertices.len())?;
        if polyline::signed_area2(&vertices) < 0.0 {
            vertices.reverse();
            vertices.rotate_right(1);
        }
        let curve = Self { vertices, open: false };
        curve.validate()?;
        Ok(curve)
    }

    /// Open arc (e.g. a graph segment). The enclosed side is taken to the
    /// left of the traversal direction.
    pub fn open(vertices: Vec<Point>) -> Result<Self> {
        check_count(vertices.len())?;
        let curve = Self { vertices, open: true };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        let ends = self.ends();
        polyline::check_edges(&self.vertices, ends)?;
        if let Some((first, second)) = polyline::find_self_intersection(&self.vertices, ends) {
            return Err(McfError::SelfIntersection { first, second });
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn ends(&self) -> Ends {
        if self.open {
            Ends::Free
        } else {
            Ends::Closed
        }
    }
}

/// How an axisymmetric profile closes up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Closure {
    /// Both endpoints on the axis: a topological sphere (solid ball).
    AxisToAxis,
    /// Closed loop away from the axis: a torus (solid torus).
    OffAxisLoop,
    /// Open segment away from the axis, for pointwise diagnostics only.
    OpenSegment,
}

/// Profile curve of a hypersurface of revolution about the `x`-axis.
///
/// Axis-to-axis and open profiles are stored left to right (increasing `x`
/// between the endpoints), loops counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymProfile {
    points: Vec<Point>,
    n: usize,
    closure: Closure,
}

impl AxisymProfile {
    pub fn new(mut points: Vec<Point>, n: usize, closure: Closure) -> Result<Self> {
        if n < 2 {
            return Err(McfError::InvalidGeometry(format!("axisymmetric dimension must be >= 2, got {n}")));
        }
        check_count(points.len())?;
        let last = points.len() - 1;
        match closure {
            Closure::AxisToAxis => {
                for i in [0, last] {
                    if points[i].y.abs() > 1e-9 {
                        return Err(McfError::AxisViolation { index: i, r: points[i].y });
                    }
                    points[i].y = 0.0;
                }
                if points[0].x > points[last].x {
                    points.reverse();
                }
            }
            Closure::OffAxisLoop => {
                if polyline::signed_area2(&points) < 0.0 {
                    points.reverse();
                    points.rotate_right(1);
                }
            }
            Closure::OpenSegment => {
                if points[0].x > points[last].x {
                    points.reverse();
                }
            }
        }
        let profile = Self { points, n, closure };
        profile.validate()?;
        Ok(profile)
    }

    fn validate(&self) -> Result<()> {
        let interior = match self.closure {
            Closure::AxisToAxis => 1..self.points.len() - 1,
            _ => 0..self.points.len(),
        };
        for i in interior {
            let r = self.points[i].y;
            if !(r > 0.0) {
                return Err(McfError::AxisViolation { index: i, r });
            }
        }
        let ends = self.ends();
        polyline::check_edges(&self.points, ends)?;
        if let Some((first, second)) = polyline::find_self_intersection(&self.points, ends) {
            return Err(McfError::SelfIntersection { first, second });
        }
        Ok(())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn ends(&self) -> Ends {
        match self.closure {
            Closure::AxisToAxis => Ends::Axis,
            Closure::OffAxisLoop => Ends::Closed,
            Closure::OpenSegment => Ends::Free,
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < MIN_VERTICES {
        return Err(McfError::InvalidGeometry(format!("need at least {MIN_VERTICES} vertices, got {n}")));
    }
    Ok(())
}

/// Either representation, as handled by the flow and the diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Curve(PolyCurve),
    Axisym(AxisymProfile),
}

impl From<PolyCurve> for Geometry {
    fn from(c: PolyCurve) -> Self {
        Geometry::Curve(c)
    }
}

impl From<AxisymProfile> for Geometry {
    fn from(p: AxisymProfile) -> Self {
        Geometry::Axisym(p)
    }
}

impl Geometry {
    /// Hypersurface dimension `n` (ambient space is `R^(n+1)`).
    pub fn dimension(&self) -> usize {
        match self {
            Geometry::Curve(_) => 1,
            Geometry::Axisym(p) => p.n,
        }
    }

    pub fn points(&self) -> &[Point] {
        match self {
            Geometry::Curve(c) => &c.vertices,
            Geometry::Axisym(p) => &p.points,
        }
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    pub fn is_axisymmetric(&self) -> bool {
        matches!(self, Geometry::Axisym(_))
    }

    /// Closed hypersurfaces bound a compact region and can be flowed.
    pub fn is_closed(&self) -> bool {
        match self {
            Geometry::Curve(c) => !c.open,
            Geometry::Axisym(p) => p.closure != Closure::OpenSegment,
        }
    }

    pub(crate) fn ends(&self) -> Ends {
        match self {
            Geometry::Curve(c) => c.ends(),
            Geometry::Axisym(p) => p.ends(),
        }
    }

    /// +1 when the enclosed side is left of the traversal direction.
    pub(crate) fn sigma(&self) -> f64 {
        match self {
            Geometry::Curve(_) => 1.0,
            Geometry::Axisym(p) => match p.closure {
                Closure::OffAxisLoop => 1.0,
                _ => -1.0,
            },
        }
    }

    /// Same kind of geometry through new vertex positions, fully validated.
    pub fn with_points(&self, points: Vec<Point>) -> Result<Geometry> {
        Ok(match self {
            Geometry::Curve(c) => {
                if c.open {
                    PolyCurve::open(points)?.into()
                } else {
                    PolyCurve::closed(points)?.into()
                }
            }
            Geometry::Axisym(p) => AxisymProfile::new(points, p.n, p.closure)?.into(),
        })
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        polyline::edge_lengths(self.points(), self.ends())
    }

    pub fn min_edge(&self) -> f64 {
        self.edge_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Per-vertex normals, principal curvatures and area weights.
    pub fn quantities(&self) -> QuantityField {
        quantities::compute(self)
    }

    /// Per-vertex area element (the `weight` column of [`QuantityField`]).
    pub fn area_weights(&self) -> Vec<f64> {
        quantities::weights(self)
    }

    /// Perimeter of a curve, or the `n`-dimensional area of the hypersurface
    /// of revolution. Equals the sum of the per-vertex weights.
    pub fn total_area(&self) -> f64 {
        self.area_weights().iter().sum()
    }

    /// Enclosed planar area of a closed curve, or the `(n+1)`-volume of the
    /// solid of revolution. Open curves enclose nothing and return 0.
    pub fn enclosed_volume(&self) -> f64 {
        match self {
            Geometry::Curve(c) => {
                if c.open {
                    0.0
                } else {
                    0.5 * polyline::signed_area2(&c.vertices)
                }
            }
            Geometry::Axisym(p) => {
                let pts = &p.points;
                let n = p.n;
                let mut acc = 0.0;
                for e in 0..polyline::edge_count(pts.len(), p.ends()) {
                    let (a, b) = polyline::edge(pts, p.ends(), e);
                    // exact integral of r^n dx for r linear along the edge
                    let mut s = 0.0;
                    for k in 0..=n {
                        s += a.y.powi(k as i32) * b.y.powi((n - k) as i32);
                    }
                    acc += (b.x - a.x) * s / (n as f64 + 1.0);
                }
                -self.sigma() * ball_volume(n) * acc
            }
        }
    }

    /// Largest distance between two vertices (for curves) or profile points.
    pub fn diameter(&self) -> f64 {
        let pts = self.points();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d = d.max((pts[i] - pts[j]).norm());
            }
        }
        d
    }

    /// Uniform arclength resampling at (approximately) the given spacing.
    pub fn resample(&self, target_spacing: f64) -> Result<Geometry> {
        resample::uniform(self, target_spacing)
    }

    /// Resampling with a curvature-adapted spacing.
    pub fn resample_adaptive(&self, rule: &SpacingRule) -> Result<Geometry> {
        resample::adaptive(self, rule)
    }

    /// Parabolic rescaling `x -> lambda (x - x0)`, `t -> lambda^2 (t - t0)`.
    pub fn parabolic_rescale(&self, time: f64, center: SpacetimePoint, lambda: f64) -> Result<(Geometry, f64)> {
        if !(lambda > 0.0) {
            return Err(McfError::InvalidSpec(format!("rescaling factor must be positive, got {lambda}")));
        }
        if self.is_axisymmetric() && center.x0.y != 0.0 {
            return Err(McfError::OffAxisCenter);
        }
        let pts: Vec<Point> = self.points().iter().map(|p| (p - center.x0) * lambda).collect();
        let g = match self {
            Geometry::Curve(c) => Geometry::Curve(PolyCurve { vertices: pts, open: c.open }),
            Geometry::Axisym(p) => Geometry::Axisym(AxisymProfile { points: pts, n: p.n, closure: p.closure }),
        };
        Ok((g, lambda * lambda * (time - center.t0)))
    }

    /// First pair of intersecting edges, if any.
    pub fn self_intersection(&self) -> Option<(usize, usize)> {
        polyline::find_self_intersection(self.points(), self.ends())
    }

    /// Translation of the geometry (along the axis for profiles).
    pub fn translated(&self, offset: Point) -> Result<Geometry> {
        if self.is_axisymmetric() && offset.y != 0.0 {
            return Err(McfError::OffAxisCenter);
        }
        self.with_points(self.points().iter().map(|p| p + offset).collect())
    }

    /// Tag used by the snapshot file format.
    pub fn kind_tag(&self) -> &'static str {
        match self {
            Geometry::Curve(c) if c.open => "curve-open",
            Geometry::Curve(_) => "curve",
            Geometry::Axisym(p) => match p.closure {
                Closure::AxisToAxis => "axisym-open",
                Closure::OffAxisLoop => "axisym-loop",
                Closure::OpenSegment => "axisym-segment",
            },
        }
    }
}
