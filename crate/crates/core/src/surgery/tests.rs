use super::*;
use crate::exact::{self, BulbChain, DumbbellSpec, Neck};
use crate::flow::FlowState;
use crate::geometry::{AxisymProfile, Point};
use std::f64::consts::PI;

fn stub(g: &Geometry, center: f64, radius: f64, span: (f64, f64)) -> NeckRegion {
    let pts = g.points();
    let i = pts.partition_point(|p| p.x < center);
    NeckRegion {
        component: 0,
        center: pts[i].x,
        center_index: i,
        radius,
        extent: (pts.partition_point(|p| p.x < span.0), pts.partition_point(|p| p.x <= span.1) - 1),
        span,
        quality: 0.0,
    }
}

/// Thin cylinder of radius `s` on `[-len, len]` closed by hemispheres.
fn capsule(s: f64, len: f64, spacing: f64) -> AxisymProfile {
    let mut pts = Vec::new();
    let arc = ((PI / 2.0) * s / spacing).ceil().max(8.0) as usize;
    for k in 0..arc {
        let a = PI - (PI / 2.0) * k as f64 / arc as f64;
        pts.push(Point::new(-len + s * a.cos(), s * a.sin()));
    }
    let m = (2.0 * len / spacing).round() as usize;
    for k in 0..=m {
        pts.push(Point::new(-len + 2.0 * len * k as f64 / m as f64, s));
    }
    for k in 1..=arc {
        let a = (PI / 2.0) * (1.0 - k as f64 / arc as f64);
        pts.push(Point::new(len + s * a.cos(), s * a.sin()));
    }
    AxisymProfile::new(pts, 2, Closure::AxisToAxis).unwrap()
}

#[test]
fn parameter_validation() {
    let p = SurgeryParams::default();
    let warnings = p.validate().unwrap();
    assert_eq!(warnings.len(), 1, "{warnings:?}");
    assert!((p.s_sharp(2) - 0.01).abs() < 1e-15);
    assert!((p.s_sharp(3) - 0.02).abs() < 1e-15);
    let tight = SurgeryParams { delta: 0.005, ..p };
    assert!(tight.validate().unwrap().is_empty());
    for bad in [
        SurgeryParams { delta: 0.2, ..p },
        SurgeryParams { delta: 0.0, ..p },
        SurgeryParams { h_neck: 500.0, ..p },
        SurgeryParams { h_th: 50.0, ..p },
        SurgeryParams { cap_scale: 5.0, ..p },
    ] {
        assert!(matches!(bad.validate(), Err(McfError::InvalidSpec(_))), "{bad:?}");
    }
}

#[test]
fn discard_examples() {
    let p = SurgeryParams::default();
    let small: Geometry = exact::sphere_profile(0.0, 0.05, 2, 128).unwrap().into();
    let large: Geometry = exact::sphere_profile(0.0, 1.0, 2, 128).unwrap().into();
    let ring: Vec<Point> =
        (0..256).map(|k| 2.0 * PI * k as f64 / 256.0).map(|a| Point::new(0.05 * a.cos(), 2.0 + 0.05 * a.sin())).collect();
    let torus: Geometry = AxisymProfile::new(ring, 2, Closure::OffAxisLoop).unwrap().into();
    let comps = vec![
        Component { id: 0, geometry: small },
        Component { id: 1, geometry: large },
        Component { id: 2, geometry: torus },
    ];
    let (kept, gone) = discard_components(comps, &p, 0.5);
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].id, 1);
    assert_eq!(gone.len(), 2);
    assert_eq!((gone[0].component, gone[0].topology), (0, Topology::Ball));
    assert_eq!((gone[1].component, gone[1].topology), (2, Topology::SolidTorus));
    assert!((gone[0].min_h - 40.0).abs() < 0.5, "{}", gone[0].min_h);
    assert!(gone.iter().all(|d| d.time == 0.5));
    assert_eq!(Topology::SolidTorus.to_string(), "solid_torus");
}

#[test]
fn separation_examples() {
    let g: Geometry = exact::dumbbell(&DumbbellSpec::new(1.0, 0.2, 1.5), 2, 1200).unwrap().into();
    let q = g.quantities();
    let p = SurgeryParams { h_th: 1.0, h_neck: 3.0, h_trig: 0.9 * q.max_h(), ..SurgeryParams::default() };
    assert!(!separation_check(&g, &[], &p));
    // cut in the transitions between the hot neck and the thick bulbs
    let pts = g.points();
    let hot: Vec<usize> = (0..q.len()).filter(|&i| q.h[i] >= 0.99 * p.h_trig).collect();
    let (first, last) = (hot[0], hot[hot.len() - 1]);
    let left = stub(&g, pts[first - 1].x, 0.2, (-1.5, -1.1));
    let right = stub(&g, pts[last + 1].x - 1e-12, 0.2, (1.1, 1.5));
    let mid = stub(&g, 0.0, 0.2, (-0.2, 0.2));
    assert!(!separation_check(&g, std::slice::from_ref(&mid), &p));
    assert!(!separation_check(&g, std::slice::from_ref(&left), &p));
    assert!(separation_check(&g, &[left.clone(), right.clone()], &p));
    let chosen = minimal_collection(&g, &[right.clone(), mid, left.clone()], &p).unwrap();
    assert_eq!(chosen, vec![left, right]);
    assert!(minimal_collection(&g, &[stub(&g, 0.0, 0.2, (-0.2, 0.2))], &p).is_none());
}

#[test]
fn capsule_split_in_two() {
    let s = 0.01;
    let prof = capsule(s, 1.0, 0.002);
    let g: Geometry = prof.clone().into();
    let p = SurgeryParams { cap_scale: 10.0, ..SurgeryParams::default() };
    let neck = stub(&g, 0.0, s, (-0.9, 0.9));
    let rep = replace_neck(&prof, &neck, &p).unwrap();
    assert_eq!(rep.pieces.len(), 2);
    assert!(rep.containment <= 1e-12, "{}", rep.containment);
    assert!(locality(&prof, &rep));
    let (l, r) = (&rep.pieces[0], &rep.pieces[1]);
    let tip = p.cap_scale * s;
    assert!((l.points().last().unwrap().x + tip).abs() < 1e-12);
    assert!((r.points()[0].x - tip).abs() < 1e-12);
    for piece in [l, r] {
        let q = Geometry::Axisym(piece.clone()).quantities();
        assert!(q.min_h() > 0.0, "{}", q.min_h());
        assert!(q.min_lambda1_over_h() > -1e-6, "{}", q.min_lambda1_over_h());
    }
    let bound = cap_curvature_bound(2);
    assert!(rep.cap_curvature <= 1.1 * bound, "{} vs {bound}", rep.cap_curvature);
    // too short a neck is refused
    let short = stub(&g, 0.0, s, (-0.3, 0.3));
    assert!(matches!(replace_neck(&prof, &short, &p), Err(McfError::NeckTooShort { .. })));
}

#[test]
fn triple_bulb_gives_three_pieces() {
    let chain = BulbChain {
        bulbs: vec![1.0, 1.0, 1.0],
        necks: vec![Neck { radius: 0.02, halflength: 1.5 }; 2],
        smoothing: 0.6,
    };
    let prof = chain.profile(2, 4000).unwrap();
    let g: Geometry = prof.clone().into();
    let p = SurgeryParams { cap_scale: 10.0, ..SurgeryParams::default() };
    // neck centers: midpoints of the thin stretches
    let pts = prof.points();
    let mut centers: Vec<f64> = Vec::new();
    let mut start: Option<f64> = None;
    for w in pts.windows(2) {
        match (start, w[1].y < 0.05) {
            (None, true) if w[0].y >= 0.05 => start = Some(w[1].x),
            (Some(a), false) => {
                centers.push(0.5 * (a + w[0].x));
                start = None;
            }
            _ => {}
        }
    }
    assert_eq!(centers.len(), 2, "{centers:?}");
    let mut rest = prof.clone();
    let mut pieces = Vec::new();
    for c in centers {
        let cur: Geometry = rest.clone().into();
        let neck = stub(&cur, c, 0.02, (c - 1.2, c + 1.2));
        let rep = replace_neck(&rest, &neck, &p).unwrap();
        assert!(rep.containment <= 1e-12);
        assert!(locality(&rest, &rep));
        let mut it = rep.pieces.into_iter();
        pieces.push(it.next().unwrap());
        rest = it.next().unwrap();
    }
    pieces.push(rest);
    assert_eq!(pieces.len(), 3);
    let vol: f64 = pieces.iter().map(|p| Geometry::Axisym(p.clone()).enclosed_volume()).sum();
    assert!(vol <= g.enclosed_volume());
    for piece in &pieces {
        let q = Geometry::Axisym(piece.clone()).quantities();
        assert!(q.min_h() > 0.0);
    }
}

#[test]
fn uncontrolled_start_is_rejected() {
    let g = exact::sphere_profile(0.0, 1.0, 2, 128).unwrap();
    let p = SurgeryParams { gamma: 1.0, ..SurgeryParams::default() };
    let limits = RunLimits { horizon: 1.0, extinction_area: 1e-8 };
    let run = surgery_flow(FlowState::new(g, 0.0), &p, limits, &EngineConfig::default());
    assert!(matches!(run.outcome, Err(McfError::NotControlled(_))));
}

#[test]
fn shrinking_sphere_is_discarded() {
    let g = exact::sphere_profile(0.0, 1.0, 2, 64).unwrap();
    let p = SurgeryParams { h_th: 1.0, h_neck: 10.0, h_trig: 100.0, delta: 0.005, ..SurgeryParams::default() };
    let limits = RunLimits { horizon: 1.0, extinction_area: 1e-8 };
    let cfg = EngineConfig { coarsen: true, ..EngineConfig::default() };
    let run = surgery_flow(FlowState::new(g, 0.0), &p, limits, &cfg);
    assert!(run.outcome.is_ok(), "{:?}", run.outcome);
    assert!(run.surgeries.is_empty());
    assert_eq!(run.discards.len(), 1);
    assert_eq!(run.discards[0].topology, Topology::Ball);
    assert!(run.max_h() <= 1.01 * p.h_trig);
    assert_eq!(run.history.count(EventKind::Discard), 1);
    assert!(run.min_two_convexity() >= p.beta);
}
