//! Monitored quantities: densities, noncollapsing, convexity, area ratios
//! and tangent-flow classification.

pub mod andrews;
pub mod density;

pub use andrews::{andrews_quantities, AndrewsReport};
pub use density::{gaussian_density, monotonicity_report, DensityProbe, MonotonicityReport};

use crate::error::{McfError, Result};
use crate::geometry::{ball_volume, sphere_area, Geometry, Point};
use std::fmt;
use std::sync::OnceLock;

/// Smallest `lambda_1 / H` over the vertices and its index.
pub fn convexity_ratio(g: &Geometry) -> Result<(f64, usize)> {
    let q = g.quantities();
    let min_h = q.min_h();
    if !(min_h > 0.0) {
        return Err(McfError::NotMeanConvex(min_h));
    }
    let mut best = (f64::INFINITY, 0);
    for i in 0..q.len() {
        let v = q.lambda1(i) / q.h[i];
        if v < best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

/// Length of the part of segment `a b` inside the disc `B(x, r)`.
fn clipped_length(a: Point, b: Point, x: Point, r: f64) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return 0.0;
    }
    let f = a - x;
    // |a + s d - x|^2 = r^2
    let bq = f.dot(&d) / len2;
    let c = (f.norm_squared() - r * r) / len2;
    let disc = bq * bq - c;
    if disc <= 0.0 {
        return 0.0;
    }
    let root = disc.sqrt();
    let s0 = (-bq - root).max(0.0);
    let s1 = (-bq + root).min(1.0);
    (s1 - s0).max(0.0) * len2.sqrt()
}

/// Fraction of the orbit of `(px, py)` inside the ball `B(x0, r)`, in units of
/// the orbit measure `|S^(n-1)| py^(n-1)`.
fn orbit_fraction(p: Point, x0: Point, r: f64, n: usize) -> f64 {
    let base = (p.x - x0.x).powi(2) + p.y * p.y + x0.y * x0.y;
    let span = 2.0 * p.y * x0.y;
    if span == 0.0 {
        return if base <= r * r { 1.0 } else { 0.0 };
    }
    // inside iff cos(theta) >= (base - r^2) / span
    let c = (base - r * r) / span;
    if c <= -1.0 {
        return 1.0;
    }
    if c >= 1.0 {
        return 0.0;
    }
    let theta = c.acos();
    if n == 2 {
        return theta / std::f64::consts::PI;
    }
    // int_0^theta sin^(n-2) / int_0^pi sin^(n-2)
    let m = 512;
    let integral = |upper: f64| {
        let h = upper / m as f64;
        (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                w * (k as f64 * h).sin().powi(n as i32 - 2)
            })
            .sum::<f64>()
            * h
    };
    integral(theta) / integral(std::f64::consts::PI)
}

/// `|M cap B(x, r)| / (omega_n r^n)`.
pub fn area_ratio(g: &Geometry, x: Point, r: f64) -> f64 {
    let pts = g.points();
    let ne = crate::geometry::polyline::edge_count(pts.len(), g.ends());
    let n = g.dimension();
    let mut measure = 0.0;
    for e in 0..ne {
        let (a, b) = crate::geometry::polyline::edge(pts, g.ends(), e);
        match g {
            Geometry::Curve(_) => measure += clipped_length(a, b, x, r),
            Geometry::Axisym(_) => {
                // midpoint rule on sub-segments, orbit fraction in closed form
                let sub = 16;
                let orbit = sphere_area(n - 1);
                let len = (b - a).norm() / sub as f64;
                for k in 0..sub {
                    let p = a + (b - a) * ((k as f64 + 0.5) / sub as f64);
                    let frac = orbit_fraction(p, x, r, n);
                    if frac > 0.0 {
                        measure += frac * orbit * p.y.powi(n as i32 - 1) * len;
                    }
                }
            }
        }
    }
    measure / (ball_volume(n) * r.powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentLabel {
    Plane,
    Sphere,
    /// Shrinking `S^(n-j) x R^j`.
    Cylinder(usize),
    Unclassified,
}

impl fmt::Display for TangentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TangentLabel::Plane => f.write_str("plane"),
            TangentLabel::Sphere => f.write_str("sphere"),
            TangentLabel::Cylinder(j) => write!(f, "cylinder_{j}"),
            TangentLabel::Unclassified => f.write_str("unclassified"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentClass {
    pub label: TangentLabel,
    pub density_value: f64,
    /// `1 - rel_err / tolerance` for the chosen reference, 0 if unclassified.
    pub confidence: f64,
}

/// Relative tolerance for matching a reference density.
pub const CLASSIFY_TOLERANCE: f64 = 0.05;

/// One reference tangent-flow density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceDensity {
    pub n: usize,
    pub label: TangentLabel,
    /// Value by quadrature over the exact shrinking solution.
    pub quadrature: f64,
    /// Closed form, for comparison.
    pub closed_form: f64,
}

/// Reference densities for `n` in 1..=3, computed once.
pub fn reference_densities() -> &'static [ReferenceDensity] {
    static TABLE: OnceLock<Vec<ReferenceDensity>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let e = std::f64::consts::E;
        let two_pi_e = 2.0 * std::f64::consts::PI * e;
        let mut out = Vec::new();
        for n in 1..=3usize {
            out.push(ReferenceDensity { n, label: TangentLabel::Plane, quadrature: 1.0, closed_form: 1.0 });
            out.push(ReferenceDensity {
                n,
                label: TangentLabel::Sphere,
                quadrature: density::sphere_density_quadrature(n, 4096),
                closed_form: sphere_area(n) * (n as f64 / two_pi_e).powf(n as f64 / 2.0),
            });
            if n >= 2 {
                let m = (n - 1) as f64;
                out.push(ReferenceDensity {
                    n,
                    label: TangentLabel::Cylinder(1),
                    quadrature: density::cylinder_density_quadrature(n, 8192),
                    closed_form: sphere_area(n - 1) * (m / two_pi_e).powf(m / 2.0),
                });
            }
        }
        out
    })
}

/// Nearest reference density for dimension `n` within 5% relative.
pub fn classify_tangent_flow(theta: f64, n: usize) -> Result<TangentClass> {
    if !(theta > 0.0) {
        return Err(McfError::NonPositiveDensity(theta));
    }
    let mut best: Option<(f64, TangentLabel)> = None;
    for r in reference_densities().iter().filter(|r| r.n == n) {
        let rel = (theta - r.quadrature).abs() / r.quadrature;
        if best.is_none_or(|(b, _)| rel < b) {
            best = Some((rel, r.label));
        }
    }
    Ok(match best {
        Some((rel, label)) if rel <= CLASSIFY_TOLERANCE => {
            TangentClass { label, density_value: theta, confidence: 1.0 - rel / CLASSIFY_TOLERANCE }
        }
        _ => TangentClass { label: TangentLabel::Unclassified, density_value: theta, confidence: 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::geometry::PolyCurve;

    #[test]
    fn classification_examples() {
        assert_eq!(classify_tangent_flow(1.0, 1).unwrap().label, TangentLabel::Plane);
        assert_eq!(classify_tangent_flow(1.5203, 1).unwrap().label, TangentLabel::Sphere);
        assert_eq!(classify_tangent_flow(3.7, 1).unwrap().label, TangentLabel::Unclassified);
        assert_eq!(classify_tangent_flow(3.7, 1).unwrap().label.to_string().as_str(), "unclassified");
        assert!(matches!(classify_tangent_flow(0.0, 1), Err(McfError::NonPositiveDensity(_))));
        for r in reference_densities() {
            assert!((r.quadrature - r.closed_form).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn area_ratio_examples() {
        let line = PolyCurve::open((0..=200).map(|i| Point::new(-1.0 + 0.01 * i as f64, 0.0)).collect()).unwrap();
        let g: Geometry = line.into();
        assert!((area_ratio(&g, Point::new(0.123, 0.0), 0.3) - 1.0).abs() < 1e-3);
        assert_eq!(area_ratio(&g, Point::new(0.0, 2.0), 0.5), 0.0);
        let c: Geometry = exact::circle(Point::zeros(), 1.0, 512).unwrap().into();
        let v = area_ratio(&c, Point::new(1.0, 0.0), 0.1);
        assert!((1.0 - 1e-3..=1.01).contains(&v), "{v}");
    }

    #[test]
    fn sphere_convexity_is_umbilic() {
        let g = exact::sphere_at(&exact::SphereSolution::new(1.0, 2), 0.0, 256).unwrap();
        let (v, _) = convexity_ratio(&g).unwrap();
        assert!((v - 0.5).abs() < 1e-3, "{v}");
    }
}
