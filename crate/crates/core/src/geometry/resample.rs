use super::polyline;
use super::{Geometry, QuantityField, MIN_VERTICES};
use crate::error::{McfError, Result};

/// Curvature-adapted spacing: roughly `resolution` vertices per radius of
/// curvature, clamped to `[h_min, h_max]`, with neighbouring spacings
/// differing by at most the factor `grading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingRule {
    pub resolution: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub grading: f64,
}

impl SpacingRule {
    pub fn new(resolution: f64, h_max: f64) -> Self {
        Self { resolution, h_max, h_min: 1e-9, grading: 1.2 }
    }

    /// Target edge length at every vertex of `g`.
    pub fn targets(&self, g: &Geometry, q: &QuantityField) -> Vec<f64> {
        let n = g.len();
        let closed = g.ends() == polyline::Ends::Closed;
        let mut h: Vec<f64> = (0..n)
            .map(|i| {
                let k = q.lambda_profile[i].abs().max(if q.n > 1 { q.lambda_rot[i].abs() } else { 0.0 });
                (1.0 / (self.resolution * k.max(1e-300))).clamp(self.h_min, self.h_max)
            })
            .collect();
        // limit grading: two sweeps each way settle closed loops too
        for _ in 0..2 {
            for i in 1..n {
                h[i] = h[i].min(h[i - 1] * self.grading);
            }
            if closed {
                h[0] = h[0].min(h[n - 1] * self.grading);
            }
            for i in (0..n - 1).rev() {
                h[i] = h[i].min(h[i + 1] * self.grading);
            }
            if closed {
                h[n - 1] = h[n - 1].min(h[0] * self.grading);
            }
        }
        h
    }
}

fn finish(g: &Geometry, pts: Vec<super::Point>) -> Result<Geometry> {
    if pts.len() < MIN_VERTICES {
        return Err(McfError::TooCoarse { count: pts.len() });
    }
    g.with_points(pts)
}

pub(super) fn uniform(g: &Geometry, target: f64) -> Result<Geometry> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(McfError::InvalidSpec(format!("target spacing must be positive, got {target}")));
    }
    let density = vec![1.0 / target; g.len()];
    finish(g, polyline::redistribute(g.points(), g.ends(), &density))
}

pub(super) fn adaptive(g: &Geometry, rule: &SpacingRule) -> Result<Geometry> {
    let q = g.quantities();
    let density: Vec<f64> = rule.targets(g, &q).iter().map(|h| 1.0 / h).collect();
    finish(g, polyline::redistribute(g.points(), g.ends(), &density))
}
