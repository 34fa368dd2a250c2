//! Standard caps and the replacement of a neck by a pair of caps.

use super::{NeckRegion, SurgeryParams};
use crate::error::{McfError, Result};
use crate::geometry::{AxisymProfile, Closure, Geometry, Point};

/// Axial length over which the cap closes up; beyond it the cap is the
/// unit-radius cylinder.
pub const CAP_LENGTH: f64 = 10.0;
const CAP_EXPONENT: i32 = 4;

/// Radius of the standard cap at distance `xi >= 0` from its tip.
///
/// `psi^2 = 1 - (1 - xi / L)^4` on `[0, L]`: the square root of a positive
/// concave function, hence concave, so the solid of revolution is convex. It
/// meets the cylinder with matching derivatives up to order three.
pub fn cap_radius(xi: f64) -> f64 {
    if xi >= CAP_LENGTH {
        1.0
    } else if xi <= 0.0 {
        0.0
    } else {
        (1.0 - (1.0 - xi / CAP_LENGTH).powi(CAP_EXPONENT)).sqrt()
    }
}

/// `(psi, psi', psi'')` at `xi > 0`.
fn cap_jet(xi: f64) -> (f64, f64, f64) {
    if xi >= CAP_LENGTH {
        return (1.0, 0.0, 0.0);
    }
    let m = CAP_EXPONENT as f64;
    let u = 1.0 - xi / CAP_LENGTH;
    let f = 1.0 - u.powi(CAP_EXPONENT);
    let f1 = m / CAP_LENGTH * u.powi(CAP_EXPONENT - 1);
    let f2 = -m * (m - 1.0) / (CAP_LENGTH * CAP_LENGTH) * u.powi(CAP_EXPONENT - 2);
    let psi = f.sqrt();
    (psi, f1 / (2.0 * psi), (2.0 * f2 * f - f1 * f1) / (4.0 * f * psi))
}

/// Supremum of `|A|` over the standard cap of an `n`-dimensional
/// hypersurface, by dense sampling of the closed-form principal curvatures.
pub fn cap_curvature_bound(n: usize) -> f64 {
    let mut sup = 0.0_f64;
    for k in 1..=20_000 {
        let xi = CAP_LENGTH * (k as f64 / 20_000.0).powi(2);
        let (psi, d1, d2) = cap_jet(xi);
        let w = (1.0 + d1 * d1).sqrt();
        let k_profile = -d2 / (w * w * w);
        let k_rot = 1.0 / (psi * w);
        sup = sup.max((k_profile * k_profile + (n as f64 - 1.0) * k_rot * k_rot).sqrt());
    }
    sup
}

/// Standard cap profile `(xi, psi(xi))` for `xi` in `[0, gamma]`, with
/// `count` points clustered at the tip.
pub fn standard_cap_profile(gamma: f64, count: usize) -> Vec<Point> {
    let count = count.max(3);
    (0..count)
        .map(|k| {
            let u = k as f64 / (count - 1) as f64;
            let xi = gamma * u * u;
            Point::new(xi, cap_radius(xi))
        })
        .collect()
}

/// Quintic smoothstep: 0 at `u <= 0`, 1 at `u >= 1`, flat to second order at
/// both ends.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

fn radius_on(pts: &[Point], x: f64) -> f64 {
    let k = pts.partition_point(|p| p.x < x);
    if k == 0 {
        return pts[0].y;
    }
    if k >= pts.len() {
        return pts[pts.len() - 1].y;
    }
    let (a, b) = (pts[k - 1], pts[k]);
    a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y)
}

/// Result of cutting one neck.
#[derive(Debug, Clone, PartialEq)]
pub struct Replacement {
    /// Left and right pieces, each closed by a cap.
    pub pieces: Vec<AxisymProfile>,
    /// Largest `r_post - r_pre` over the modified range (containment holds
    /// when this is `<= 0`).
    pub containment: f64,
    /// Number of vertices of each piece copied unchanged from the input.
    pub unchanged: (usize, usize),
    /// `s * sup |A|` over the cap-modified vertices.
    pub cap_curvature: f64,
}

/// Cuts the profile at the neck and closes both sides by rescaled standard
/// caps with tips at distance `Gamma s` from the center. Only vertices with
/// `|x - c| <= 5 Gamma s` change.
pub fn replace_neck(profile: &AxisymProfile, neck: &NeckRegion, params: &SurgeryParams) -> Result<Replacement> {
    if profile.closure() != Closure::AxisToAxis {
        return Err(McfError::InvalidGeometry("surgery needs a profile meeting the axis at both ends".into()));
    }
    let s = neck.radius;
    let c = neck.center;
    let gamma = params.cap_scale;
    let reach = 5.0 * gamma * s;
    if neck.span.0 > c - reach || neck.span.1 < c + reach {
        return Err(McfError::NeckTooShort { extent: neck.length(), required: 2.0 * reach });
    }
    let pts = profile.points();
    let a = pts.partition_point(|p| p.x < c - reach);
    let b = pts.partition_point(|p| p.x <= c + reach);
    if a == 0 || b >= pts.len() || a >= b {
        return Err(McfError::NeckTooShort { extent: neck.length(), required: 2.0 * reach });
    }
    // local spacing of the neck
    let h = pts[a..b].windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max).min(0.25 * s).max(1e-9);
    let xi_max = 4.0 * gamma;
    let steps = ((2.0 * xi_max * s / h).ceil() as usize).max(16);
    // gluing: original profile for xi >= 4 Gamma, pure cap for xi <= 2 Gamma
    let blend = |xi: f64, x: f64| {
        let w = smoothstep((xi - 2.0 * gamma) / (2.0 * gamma));
        let pre = radius_on(pts, x);
        (w * pre + (1.0 - w) * s * cap_radius(xi)).min(pre)
    };
    let mut containment = f64::NEG_INFINITY;
    let mut side = |sign: f64| -> Vec<Point> {
        let tip = c + sign * gamma * s;
        let mut out = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            let u = 1.0 - k as f64 / steps as f64;
            let xi = xi_max * u * u;
            let x = tip + sign * xi * s;
            let r = if k == steps { 0.0 } else { blend(xi, x) };
            containment = containment.max(r - radius_on(pts, x));
            out.push(Point::new(x, r));
        }
        out
    };
    let left_cap = side(-1.0);
    let right_cap = side(1.0);

    let min_gap = 0.25 * h;
    let mut left: Vec<Point> = pts[..a].to_vec();
    let last = left[left.len() - 1];
    left.extend(left_cap.into_iter().filter(|p| p.x - last.x > min_gap));
    let first = pts[b];
    let mut right: Vec<Point> = right_cap.into_iter().rev().filter(|p| first.x - p.x > min_gap).collect();
    let right_cap_len = right.len();
    right.extend_from_slice(&pts[b..]);

    let n = profile.dimension();
    let lp = AxisymProfile::new(left, n, Closure::AxisToAxis)?;
    let rp = AxisymProfile::new(right, n, Closure::AxisToAxis)?;

    let mut sup = 0.0_f64;
    for (piece, range) in [(&lp, a..lp.len()), (&rp, 0..right_cap_len)] {
        let q = Geometry::Axisym(piece.clone()).quantities();
        for i in range {
            sup = sup.max(q.a_norm_sq[i].sqrt());
        }
    }
    Ok(Replacement {
        pieces: vec![lp, rp],
        containment,
        unchanged: (a, pts.len() - b),
        cap_curvature: s * sup,
    })
}
