use super::polyline::{self, Ends};
use super::{Geometry, Point};
use crate::par;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// `|S^k|`, the k-dimensional measure of the unit sphere in `R^(k+1)`.
pub fn sphere_area(k: usize) -> f64 {
    let m = (k + 1) as f64;
    2.0 * PI.powf(m / 2.0) / gamma(m / 2.0)
}

/// `omega_n`, the volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    let m = n as f64;
    PI.powf(m / 2.0) / gamma(m / 2.0 + 1.0)
}

/// Per-vertex geometric data.
///
/// For curves the only principal curvature is `lambda_profile`. For
/// hypersurfaces of revolution there is additionally `lambda_rot` with
/// multiplicity `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityField {
    pub n: usize,
    /// Outward unit normal (in the profile half-plane for axisymmetric data).
    pub normal: Vec<Point>,
    pub lambda_profile: Vec<f64>,
    pub lambda_rot: Vec<f64>,
    pub h: Vec<f64>,
    pub a_norm_sq: Vec<f64>,
    /// Discrete area element, including the orbit factor `|S^(n-1)| r^(n-1)`.
    pub weight: Vec<f64>,
}

impl QuantityField {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Principal curvatures at vertex `i`, ascending.
    pub fn lambdas(&self, i: usize) -> Vec<f64> {
        let mut l = vec![self.lambda_profile[i]];
        l.extend(std::iter::repeat_n(self.lambda_rot[i], self.n - 1));
        l.sort_by(f64::total_cmp);
        l
    }

    pub fn lambda1(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.lambda_profile[i]
        } else {
            self.lambda_profile[i].min(self.lambda_rot[i])
        }
    }

    /// `lambda_1 + lambda_2`; for curves this is just `lambda_1`.
    pub fn lambda12(&self, i: usize) -> f64 {
        match self.n {
            1 => self.lambda_profile[i],
            2 => self.lambda_profile[i] + self.lambda_rot[i],
            _ => {
                let (a, b) = (self.lambda_profile[i], self.lambda_rot[i]);
                if a < b {
                    a + b
                } else {
                    2.0 * b
                }
            }
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0_f64, |m, h| m.max(h.abs()))
    }

    /// Index of the largest `H`, first one on ties.
    pub fn argmax_h(&self) -> usize {
        let mut best = 0;
        for i in 1..self.h.len() {
            if self.h[i] > self.h[best] {
                best = i;
            }
        }
        best
    }

    /// Smallest `lambda_1 / H` over vertices with `H > 0`.
    pub fn min_lambda1_over_h(&self) -> f64 {
        (0..self.len())
            .filter(|&i| self.h[i] > 0.0)
            .map(|i| self.lambda1(i) / self.h[i])
            .fold(f64::INFINITY, f64::min)
    }
}

pub(super) fn weights(g: &Geometry) -> Vec<f64> {
    let pts = g.points();
    let dual = polyline::dual_lengths(pts, g.ends());
    match g {
        Geometry::Curve(_) => dual,
        Geometry::Axisym(p) => {
            let orbit = sphere_area(p.n - 1);
            let k = (p.n - 1) as i32;
            dual.iter().zip(pts).map(|(d, q)| d * orbit * q.y.powi(k)).collect()
        }
    }
}

pub(super) fn compute(g: &Geometry) -> QuantityField {
    let pts = g.points();
    let ends = g.ends();
    let sigma = g.sigma();
    let n = g.dimension();
    let len = pts.len();
    let frames = par::map_indexed(len, |i| polyline::frame(pts, ends, sigma, i));
    let mut normal: Vec<Point> = frames.iter().map(|f| f.0).collect();
    let mut lambda_profile: Vec<f64> = frames.iter().map(|f| f.1).collect();
    if ends == Ends::Free {
        lambda_profile[0] = lambda_profile[1];
        lambda_profile[len - 1] = lambda_profile[len - 2];
    }
    let lambda_rot: Vec<f64> = if n == 1 {
        vec![0.0; len]
    } else {
        (0..len)
            .map(|i| {
                let pole = ends == Ends::Axis && (i == 0 || i + 1 == len);
                if pole {
                    lambda_profile[i]
                } else {
                    normal[i].y / pts[i].y
                }
            })
            .collect()
    };
    if ends == Ends::Axis {
        // exact axial normals at the poles
        normal[0] = Point::new(-1.0, 0.0);
        normal[len - 1] = Point::new(1.0, 0.0);
    }
    let mult = (n - 1) as f64;
    let h: Vec<f64> = (0..len).map(|i| lambda_profile[i] + mult * lambda_rot[i]).collect();
    let a_norm_sq: Vec<f64> =
        (0..len).map(|i| lambda_profile[i] * lambda_profile[i] + mult * lambda_rot[i] * lambda_rot[i]).collect();
    QuantityField { n, normal, lambda_profile, lambda_rot, h, a_norm_sq, weight: weights(g) }
}
