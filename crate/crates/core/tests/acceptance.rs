//! End-to-end acceptance runs.
//!
//! Runs without the libtest harness so that every criterion prints one
//! `PASS`/`FAIL` line; the process fails if any criterion does.

use mcflab::diagnostics::{
    andrews_quantities, classify_tangent_flow, gaussian_density, monotonicity_report,
    andrews::{z_bruteforce, z_pruned},
    DensityProbe, TangentLabel,
};
use mcflab::exact::{self, DumbbellSpec};
use mcflab::flow::{geometry_distance, EventKind, FlowHistory, StopCriterion};
use mcflab::geometry::{Geometry, Point, SpacetimePoint};
use mcflab::io::{self, commands::synthetic_history, ExperimentConfig, RunOverrides};
use mcflab::surgery::{SurgeryRun, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn config(name: &str) -> ExperimentConfig {
    io::load_config(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn simulate(name: &str) -> (SurgeryRun, ExperimentConfig, Duration) {
    let cfg = config(name);
    let start = Instant::now();
    let (run, _) = io::simulate(&cfg, &cfg.engine).unwrap_or_else(|e| panic!("{name}: {e}"));
    (run, cfg, start.elapsed())
}

fn history(name: &str) -> FlowHistory {
    let (run, _, _) = simulate(name);
    if let Err(e) = &run.outcome {
        panic!("{name}: {e}");
    }
    run.history
}

fn geometry(h: &FlowHistory, k: usize) -> &Geometry {
    &h.slices[k].components[0].geometry
}

fn extinction(name: &str, lo: f64, hi: f64) -> (bool, String) {
    let (run, _, took) = simulate(name);
    let t = run.history.events_of(EventKind::Extinction).last().map(|e| e.time).unwrap_or(f64::NAN);
    let ok = run.outcome.is_ok() && (lo..=hi).contains(&t) && took <= Duration::from_secs(30);
    (ok, format!("T = {t:.5} in {:.1} s", took.as_secs_f64()))
}

fn sphere_extinction() -> Verdict {
    let (a, da) = extinction("circle_extinction.cfg", 0.495, 0.505);
    let (b, db) = extinction("sphere_extinction.cfg", 0.2475, 0.2525);
    verdict(a && b, format!("circle {da}; sphere {db}"))
}

fn radius_trajectory() -> Verdict {
    let h = history("sphere_radius.cfg");
    let mut worst = 0.0_f64;
    let mut checked = 0;
    for s in &h.slices {
        let Some(g) = s.geometries().next() else { break };
        if g.total_area() < 1e-3 {
            break;
        }
        let mean = g.points().iter().map(|p| p.norm()).sum::<f64>() / g.len() as f64;
        let exact = (1.0 - 4.0 * s.time).sqrt();
        worst = worst.max((mean / exact - 1.0).abs());
        checked += 1;
    }
    verdict(checked >= 10 && worst <= 0.01, format!("{checked} slices, worst relative error {worst:.2e}"))
}

/// Largest `|dA/dt + int H^2| / int H^2` over consecutive scalar rows.
fn area_defect(h: &FlowHistory) -> f64 {
    h.scalars
        .windows(2)
        .filter(|w| w[0].dt > 0.0 && w[0].h2_integral > 0.0)
        .map(|w| ((w[1].area - w[0].area) / w[0].dt + w[0].h2_integral).abs() / w[0].h2_integral)
        .fold(0.0, f64::max)
}

fn area_decay() -> Verdict {
    let s = area_defect(&history("sphere_area_decay.cfg"));
    let e = area_defect(&history("ellipse_area_decay.cfg"));
    verdict(s <= 0.02 && e <= 0.02, format!("worst defect sphere {s:.2e}, ellipse {e:.2e}"))
}

fn grim_reaper() -> Verdict {
    let h = history("grim_reaper.cfg");
    let mut worst = 0.0_f64;
    for s in &h.slices {
        for p in s.components[0].geometry.points().iter().filter(|p| p.x.abs() <= 1.0) {
            worst = worst.max((p.y - exact::grim_reaper_height(s.time, p.x)).abs());
        }
    }
    let end = h.final_time().unwrap_or(0.0);
    verdict(worst <= 1e-3 && end >= 0.5 - 1e-12, format!("{} slices to t = {end}, max deviation {worst:.2e}", h.slices.len()))
}

fn worst_violation(name: &str) -> (usize, f64) {
    let cfg = config(name);
    let h = history(name);
    let v = cfg.probes.iter().map(|p| monotonicity_report(&h, p).unwrap().max_violation).fold(0.0, f64::max);
    (cfg.probes.len(), v)
}

fn density_monotonicity() -> Verdict {
    let (ne, ve) = worst_violation("ellipse_probes.cfg");
    let (nd, vd) = worst_violation("dumbbell_probes.cfg");

    let cfg = config("circle_probe.cfg");
    let h = history("circle_probe.cfg");
    let series = gaussian_density(&h, &cfg.probes[0]).unwrap();
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.1), b.max(s.1)));
    let class = classify_tangent_flow(series[0].1, 1).unwrap();

    // a line far longer than every probed scale, constant in time
    let plane: Geometry = exact::line_segment(1e3, 4001).unwrap().into();
    let ph = synthetic_history((0..=20).map(|k| (k as f64 * 0.05, plane.clone())).collect());
    let probe = DensityProbe::geometric(SpacetimePoint::new(0.0, 0.0, 1.0), 1e3, 0.1, 0.9, 5).unwrap();
    let theta = gaussian_density(&ph, &probe).unwrap();
    let plane_err = theta.iter().map(|s| (s.1 - 1.0).abs()).fold(0.0, f64::max);

    let ok = ne == 10
        && nd == 10
        && ve <= 2e-3
        && vd <= 2e-3
        && hi - lo <= 1e-2
        && class.label == TangentLabel::Sphere
        && plane_err <= 1e-3;
    verdict(
        ok,
        format!(
            "violation ellipse {ve:.1e} ({ne} probes), dumbbell {vd:.1e} ({nd} probes); circle spread {:.1e} as {}; plane |theta - 1| {plane_err:.1e}",
            hi - lo,
            class.label
        ),
    )
}

fn rescaling() -> Verdict {
    let base = history("ellipse_rescale.cfg");
    let t_end = base.final_time().unwrap();
    let g = geometry(&base, base.slices.len() - 1);
    let probe = DensityProbe::geometric(SpacetimePoint::new(0.5, 0.0, t_end), f64::INFINITY, 0.05, 0.4, 8).unwrap();
    let theta = gaussian_density(&base, &probe).unwrap();
    let mut shape = 0.0_f64;
    let mut density = 0.0_f64;
    for (name, lambda) in [("ellipse_rescale_half.cfg", 0.5), ("ellipse_rescale_double.cfg", 2.0)] {
        let h = history(name);
        let t = h.final_time().unwrap();
        let scaled = g.parabolic_rescale(t_end, SpacetimePoint::origin(), lambda).unwrap().0;
        let other = geometry(&h, h.slices.len() - 1);
        shape = shape.max(io::commands::hausdorff(&scaled, other) / (0.5 * scaled.diameter()) + (t / (lambda * lambda * t_end) - 1.0).abs());
        let p = DensityProbe::new(
            SpacetimePoint::new(0.5 * lambda, 0.0, t),
            f64::INFINITY,
            probe.r_grid.iter().map(|r| r * lambda).collect(),
        )
        .unwrap();
        for (a, b) in gaussian_density(&h, &p).unwrap().iter().zip(&theta) {
            density = density.max((a.1 - b.1).abs());
        }
    }
    verdict(shape <= 0.01 && density <= 1e-3, format!("relative shape error {shape:.1e}, density error {density:.1e}"))
}

fn alpha_ratio(name: &str, max_h: f64) -> (f64, usize) {
    let h = history(name);
    let rows: Vec<_> = h.scalars.iter().filter(|r| !r.alpha.is_nan() && r.max_h <= max_h).collect();
    let a0 = rows[0].alpha;
    (rows.iter().map(|r| r.alpha / a0).fold(f64::INFINITY, f64::min), rows.len())
}

/// Andrews constant of a circle from every vertex pair, with exact normals.
fn circle_alpha_oracle(r: f64, count: usize) -> f64 {
    let c = exact::circle(Point::zeros(), r, count).unwrap();
    let pts = c.vertices();
    let mut alpha = f64::INFINITY;
    for (i, x) in pts.iter().enumerate() {
        let nu = -x / x.norm();
        let z = pts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, y)| 2.0 * (y - x).dot(&nu) / (y - x).norm_squared())
            .fold(f64::NEG_INFINITY, f64::max);
        alpha = alpha.min((1.0 / r) / z);
    }
    alpha
}

fn andrews() -> Verdict {
    let (e, ne) = alpha_ratio("ellipse_alpha.cfg", f64::INFINITY);
    let (d, nd) = alpha_ratio("dumbbell_alpha.cfg", 50.0);
    let c: Geometry = exact::circle(Point::zeros(), 1.5, 512).unwrap().into();
    let computed = andrews_quantities(&c).unwrap().alpha;
    let oracle = circle_alpha_oracle(1.5, 512);
    let ok = e >= 0.95 && d >= 0.95 && (computed - 1.0).abs() <= 0.02 && (oracle - 1.0).abs() <= 0.02;
    verdict(
        ok,
        format!(
            "min alpha/alpha0 ellipse {e:.4} ({ne} evaluations), dumbbell {d:.4} ({nd}); circle {computed:.5}, all pairs {oracle:.5}"
        ),
    )
}

fn avoidance() -> Verdict {
    let h = history("concentric_circles.cfg");
    let d: Vec<(f64, f64)> = h
        .slices
        .iter()
        .filter(|s| s.components.len() == 2)
        .map(|s| (s.time, geometry_distance(&s.components[0].geometry, &s.components[1].geometry)))
        .collect();
    let drop = d.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0, f64::max);
    let (t, last) = *d.last().unwrap();
    let expected = 3.4_f64.sqrt() - 0.4_f64.sqrt();
    let ok = drop <= 1e-6 && (t - 0.3).abs() < 1e-12 && (last - expected).abs() <= 1e-2;
    verdict(ok, format!("largest decrease {drop:.1e}; distance at t = {t} is {last:.5} vs {expected:.5}"))
}

fn surgery_end_to_end() -> (Verdict, SurgeryRun) {
    let (run, cfg, took) = simulate("dumbbell_surgery.cfg");
    let params = cfg.surgery.as_ref().unwrap().0;
    let events = run.history.count(EventKind::Surgery);
    let invariants = run
        .surgeries
        .iter()
        .all(|s| s.containment <= 1e-12 && s.local && s.minimal && (0.99..=1.01).contains(&s.trigger_ratio));
    let max_h = run.max_h();
    let extinct = run.outcome.is_ok() && run.history.slices.last().is_some_and(|s| s.components.is_empty());
    let ok = events == 1
        && run.surgeries.len() == 1
        && invariants
        && extinct
        && max_h <= 1.01 * params.h_trig
        && took <= Duration::from_secs(300);
    let outcome = match &run.outcome {
        Ok(()) => "complete".to_string(),
        Err(e) => format!("halted: {e}"),
    };
    let detail = format!(
        "{events} surgeries, invariants {}, all extinct {extinct}, max H {max_h:.1}, {:.1} s; {outcome}",
        if invariants { "hold" } else { "broken" },
        took.as_secs_f64()
    );
    (verdict(ok, detail), run)
}

fn discard_topology(symmetric: &SurgeryRun) -> Verdict {
    let (run, _, _) = simulate("asymmetric_surgery.cfg");
    let all: Vec<_> = symmetric.discards.iter().chain(&run.discards).collect();
    let admissible = all.iter().all(|d| matches!(d.topology, Topology::Ball | Topology::SolidTorus));
    let balls = run.discards.iter().filter(|d| d.topology == Topology::Ball).count();
    let ok = admissible && run.discards.len() == 1 && balls == 1;
    let outcome = match &run.outcome {
        Ok(()) => "complete".to_string(),
        Err(e) => format!("halted: {e}"),
    };
    verdict(
        ok,
        format!("{} discards in total, all ball or solid torus: {admissible}; asymmetric run discards {} ({balls} balls); {outcome}", all.len(), run.discards.len()),
    )
}

fn max_h_error_ellipse(count: usize) -> f64 {
    let g: Geometry = exact::ellipse(2.0, 1.0, count).unwrap().into();
    let q = g.quantities();
    g.points()
        .iter()
        .zip(&q.h)
        .map(|(p, h)| {
            // exact curvature at the vertex: ab / (b^2 x^2/a^2 + a^2 y^2/b^2)^(3/2) with a = 2, b = 1
            let k = 2.0 / (p.x * p.x / 4.0 + 4.0 * p.y * p.y).powf(1.5);
            (h - k).abs()
        })
        .fold(0.0, f64::max)
}

fn star_curve(rng: &mut ChaCha8Rng, count: usize) -> Geometry {
    let amp: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.08..0.08)).collect();
    let pts = (0..count)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / count as f64;
            let r = 1.0 + amp.iter().enumerate().map(|(m, a)| a * ((m + 2) as f64 * th).cos()).sum::<f64>();
            Point::new(r * th.cos(), r * th.sin())
        })
        .collect();
    mcflab::PolyCurve::closed(pts).unwrap().into()
}

fn files_equal(a: &Path, b: &Path) -> bool {
    let mut names: Vec<PathBuf> = Vec::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        for e in std::fs::read_dir(a.join(&rel)).unwrap() {
            let e = e.unwrap();
            let r = rel.join(e.file_name());
            if e.file_type().unwrap().is_dir() {
                stack.push(r);
            } else {
                names.push(r);
            }
        }
    }
    !names.is_empty() && names.iter().all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok())
}

fn property_suites() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();

    let errs: Vec<f64> = [256, 512, 1024].iter().map(|&n| max_h_error_ellipse(n)).collect();
    let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());
    if order < 1.8 {
        failures.push(format!("convergence order {order:.2}"));
    }

    let mut dumbbell_spec = DumbbellSpec::new(1.0, 0.3, 1.5);
    dumbbell_spec.smoothing = 1.2;
    let shapes: Vec<Geometry> = vec![
        exact::circle(Point::zeros(), 1.0, 256).unwrap().into(),
        exact::ellipse(2.0, 1.0, 256).unwrap().into(),
        exact::sphere_profile(0.0, 1.0, 2, 256).unwrap().into(),
        exact::ellipsoid_profile(1.5, 0.8, 2, 256).unwrap().into(),
        exact::dumbbell(&dumbbell_spec, 2, 512).unwrap().into(),
    ];
    let mut resample_worst = 0.0_f64;
    for g in &shapes {
        let mean = g.edge_lengths().iter().sum::<f64>() / g.edge_lengths().len() as f64;
        for factor in [0.7, 1.0, 1.4] {
            let r = g.resample(factor * mean).unwrap();
            resample_worst = resample_worst
                .max((r.total_area() / g.total_area() - 1.0).abs())
                .max((r.enclosed_volume() / g.enclosed_volume() - 1.0).abs());
        }
    }
    if resample_worst > 5e-3 {
        failures.push(format!("resample changes area/volume by {resample_worst:.1e}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut z_cases: Vec<Geometry> = shapes.clone();
    z_cases.extend((0..6).map(|_| star_curve(&mut rng, 200)));
    let z_ok = z_cases.iter().all(|g| z_pruned(g) == z_bruteforce(g));
    if !z_ok {
        failures.push("pruned Z* differs from brute force".into());
    }

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut cfg = config("ellipse_probes.cfg");
    cfg.stops = vec![StopCriterion::Horizon(0.35)];
    cfg.probes.clear();
    cfg.engine.dense_window = None;
    cfg.engine.alpha_stride = 50;
    for d in &dirs {
        io::cmd_run(&cfg, &RunOverrides { out: Some(d.path().to_path_buf()), ..Default::default() }).unwrap();
    }
    let deterministic = files_equal(dirs[0].path(), dirs[1].path())
        && io::commands::reference_density_table() == io::commands::reference_density_table();
    if !deterministic {
        failures.push("repeated runs differ".into());
    }

    let mut round_trip = true;
    let mut kinds = shapes.clone();
    kinds.push(exact::grim_reaper(0.0, &exact::grim_reaper_grid(1.4, 64)).unwrap().into());
    kinds.push(exact::cylinder_at(&exact::CylinderSolution::new(1.0, 2, 1), 0.1, 2.0, 64).unwrap().into());
    for (k, g) in kinds.iter().enumerate() {
        let text = io::format_snapshot(g, 0.125 * k as f64);
        round_trip &= match io::parse_snapshot(&text) {
            Ok((back, t)) => io::format_snapshot(&back, t) == text,
            Err(_) => false,
        };
    }
    if !round_trip {
        failures.push("snapshot round trip is not bit-identical".into());
    }

    let took = start.elapsed();
    if took > Duration::from_secs(600) {
        failures.push(format!("took {:.0} s", took.as_secs_f64()));
    }
    let detail = format!(
        "order {order:.2}, resample {resample_worst:.1e}, Z* cases {}, determinism {deterministic}, round trips {}, {:.1} s",
        z_cases.len(),
        kinds.len(),
        took.as_secs_f64()
    );
    if failures.is_empty() {
        verdict(true, detail)
    } else {
        verdict(false, format!("{detail}: {}", failures.join("; ")))
    }
}

fn report(k: usize, name: &str, v: &Verdict, took: Duration) -> bool {
    println!(
        "criterion {k:>2} {:<24} {} ({}; {:.1} s)",
        name,
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64()
    );
    v.pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Turns a panic inside a criterion into a failing verdict.
fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        }
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |name: &str| filter.is_empty() || filter.iter().any(|f| name.contains(f.as_str()));
    let criteria: [Criterion; 8] = [
        ("sphere_extinction", sphere_extinction),
        ("radius_trajectory", radius_trajectory),
        ("area_decay", area_decay),
        ("grim_reaper", grim_reaper),
        ("density_monotonicity", density_monotonicity),
        ("rescaling", rescaling),
        ("andrews", andrews),
        ("avoidance", avoidance),
    ];
    let mut all = true;
    let mut ran = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if wanted(name) {
            let (v, took) = timed(|| guarded(f));
            all &= report(k + 1, name, &v, took);
            ran += 1;
        }
    }
    if wanted("surgery") || wanted("discard_topology") {
        let ((v9, run), took) = timed(surgery_end_to_end);
        all &= report(9, "surgery", &v9, took);
        let (v10, took) = timed(|| guarded(|| discard_topology(&run)));
        all &= report(10, "discard_topology", &v10, took);
        ran += 2;
    }
    if wanted("property_suites") {
        let (v, took) = timed(|| guarded(property_suites));
        all &= report(11, "property_suites", &v, took);
        ran += 1;
    }
    println!("{ran} criteria run: {}", if all { "all passed" } else { "some failed" });
    if !all {
        std::process::exit(1);
    }
}
