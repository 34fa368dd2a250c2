use super::*;
use crate::exact::{self, SphereSolution};
use crate::geometry::PolyCurve;
use std::f64::consts::PI;

fn unit_circle(count: usize) -> FlowState {
    FlowState::new(exact::circle(Point::zeros(), 1.0, count).unwrap(), 0.0)
}

fn mean_radius(g: &Geometry, center: Point) -> f64 {
    let pts = g.points();
    pts.iter().map(|p| (p - center).norm()).sum::<f64>() / pts.len() as f64
}

#[test]
fn dt_formula() {
    let s = unit_circle(256);
    let h = 2.0 * (PI / 256.0).sin();
    let dt = choose_dt(&s, 0.5).unwrap();
    assert!((dt - 0.5 * h * h / (2.0 + h)).abs() < 1e-15);
    let dt2 = choose_dt(&unit_circle(512), 0.5).unwrap();
    assert!((dt / dt2 - 4.0).abs() < 0.05);
    assert!(choose_dt(&s, 0.0).is_err());
    assert!(choose_dt(&s, 1.5).is_err());
}

#[test]
fn dt_shrinks_with_curvature() {
    let mut last = f64::INFINITY;
    for r in [1.0, 0.5, 0.1, 0.01] {
        let s = FlowState::new(exact::circle(Point::zeros(), r, 64).unwrap(), 0.0);
        let dt = choose_dt(&s, 1.0).unwrap();
        assert!(dt < last);
        last = dt;
    }
}

#[test]
fn circle_step_matches_ode() {
    let s = unit_circle(256);
    let dt = choose_dt(&s, 0.5).unwrap();
    let next = step(&s, dt, &EngineConfig::default()).unwrap();
    assert_eq!(next.step_index, 1);
    assert!((next.time - dt).abs() < 1e-18);
    let r = mean_radius(&next.geometry, Point::zeros());
    assert!((r - (1.0 - 2.0 * dt).sqrt()).abs() < 1e-6, "{r}");
}

#[test]
fn sphere_step_matches_ode() {
    let g = exact::sphere_at(&SphereSolution::new(1.0, 2), 0.0, 128).unwrap();
    let s = FlowState::new(g, 0.0);
    let next = step(&s, 1e-4, &EngineConfig::default()).unwrap();
    let r = mean_radius(&next.geometry, Point::zeros());
    assert!((r - (1.0f64 - 4e-4).sqrt()).abs() < 1e-6, "{r}");
}

#[test]
fn oversized_step_rejected() {
    let s = unit_circle(64);
    let limit = choose_dt(&s, 1.0).unwrap();
    assert!(matches!(step(&s, 2.0 * limit, &EngineConfig::default()), Err(McfError::StepTooLarge { .. })));
}

#[test]
fn grim_reaper_step_translates() {
    let grid = exact::grim_reaper_grid(1.45, 512);
    let s = FlowState::new(exact::grim_reaper(0.0, &grid).unwrap(), 0.0);
    let dt = choose_dt(&s, 0.5).unwrap();
    let next = step(&s, dt, &EngineConfig::default()).unwrap();
    let dev = next
        .geometry
        .points()
        .iter()
        .filter(|p| p.x.abs() <= 1.0)
        .map(|p| (p.y - exact::grim_reaper_height(dt, p.x)).abs())
        .fold(0.0, f64::max);
    assert!(dev <= 1e-3, "{dev}");
}

#[test]
fn curvature_evolution_on_circle() {
    // d kappa / dt = kappa_ss + kappa^3 with kappa_ss = 0
    let mut s = unit_circle(128);
    let cfg = EngineConfig::default();
    loop {
        let k0 = s.geometry.quantities().h[0];
        if k0 > 10.0 {
            break;
        }
        let dt = choose_dt(&s, 0.5).unwrap();
        s = step(&s, dt, &cfg).unwrap();
        let k1 = s.geometry.quantities().h[0];
        let rate = (k1 - k0) / dt;
        assert!((rate - k0.powi(3)).abs() <= 0.05 * k0.powi(3), "{rate} vs {}", k0.powi(3));
    }
}

#[test]
fn pair_distance_examples() {
    let a = unit_circle(512);
    let b = FlowState::new(exact::circle(Point::zeros(), 2.0, 512).unwrap(), 0.0);
    assert!((pair_distance(&a, &b) - 1.0).abs() < 1e-4);
    let s1 = exact::sphere_at(&SphereSolution::new(1.0, 2), 0.0, 64).unwrap();
    let s2 = s1.translated(Point::new(3.5, 0.0)).unwrap();
    let d = pair_distance(&FlowState::new(s1, 0.0), &FlowState::new(s2, 0.0));
    assert!((d - 1.5).abs() < 1e-12, "{d}");
}

#[test]
fn horizon_stop_lands_exactly() {
    let h = evolve(unit_circle(64), &[StopCriterion::Horizon(0.1)], &EngineConfig::default());
    assert_eq!(h.final_time(), Some(0.1));
    assert_eq!(h.count(EventKind::Horizon), 1);
    assert_eq!(h.slices.last().unwrap().time, 0.1);
    let times: Vec<f64> = h.slices.iter().map(|s| s.time).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn blowup_stop_records_event() {
    let h = evolve(unit_circle(64), &[StopCriterion::Blowup(5.0)], &EngineConfig::default());
    assert_eq!(h.count(EventKind::BlowupStop), 1);
    let last = h.scalars.last().unwrap();
    assert!(last.max_h < 5.0);
}

#[test]
fn trigger_stops_inside_band() {
    let cfg = EngineConfig { cfl: 1.0, ..EngineConfig::default() };
    let h = evolve(unit_circle(64), &[StopCriterion::Trigger(4.0)], &cfg);
    let ev = h.events_of(EventKind::Trigger).next().unwrap();
    let max_h: f64 = ev.payload.split(',').nth(1).unwrap().parse().unwrap();
    assert!((0.99 * 4.0..=1.01 * 4.0).contains(&max_h), "{max_h}");
}

#[test]
fn dense_window_records_every_step() {
    let cfg = EngineConfig { dense_window: Some((0.05, 0.06)), ..EngineConfig::default() };
    let h = evolve(unit_circle(64), &[StopCriterion::Horizon(0.1)], &cfg);
    let inside: Vec<&Slice> = h.slices.iter().filter(|s| s.time >= 0.05 && s.time <= 0.06).collect();
    let steps = h.scalars.iter().filter(|r| r.time >= 0.05 && r.time <= 0.06).count();
    assert!(inside.len() + 1 >= steps);
}

#[test]
fn self_intersection_recorded_not_panicking() {
    // figure-eight is rejected up front
    let pts: Vec<Point> = (0..64)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / 64.0;
            Point::new(t.sin(), (2.0 * t).sin() * 0.5)
        })
        .collect();
    assert!(matches!(PolyCurve::closed(pts), Err(McfError::SelfIntersection { .. })));
}

#[test]
fn trail_keeps_recent_states() {
    let cfg = EngineConfig { record_stride: 0, trail: Some((0.01, 1e-3)), ..EngineConfig::default() };
    let h = evolve(unit_circle(256), &[StopCriterion::Horizon(0.1)], &cfg);
    let recent: Vec<f64> = h.slices.iter().map(|s| s.time).filter(|t| *t >= 0.09 - 1e-3).collect();
    assert!(recent.len() >= 9 && recent.len() <= 13, "{recent:?}");
    assert!(h.slices.windows(2).all(|w| w[0].time <= w[1].time));
    let steps: Vec<u64> = h.slices.iter().map(|s| s.step).collect();
    let mut dedup = steps.clone();
    dedup.dedup();
    assert_eq!(steps, dedup);
}
