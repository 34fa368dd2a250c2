//! The `run`, `probe`, `oracle` and `compare` commands.

use super::config::ExperimentConfig;
use super::csv::{self, read_history, write_history};
use super::svg::{render_frame, Viewport};
use crate::diagnostics::{
    classify_tangent_flow, monotonicity_report, reference_densities, DensityProbe, TangentClass,
};
use crate::error::{McfError, Result};
use crate::exact;
use crate::flow::{
    evolve_components, Component, EngineConfig, FlowHistory, FlowState, MultiState, ScalarRow, Slice, SliceTag,
    SpacingMode, StopReason,
};
use crate::geometry::{polyline, Geometry, Point};
use crate::surgery::{surgery_flow, SurgeryRun};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const UNCOVERED_TIME: i32 = 3;
    pub const GRID_MISMATCH: i32 = 4;
    pub const SELF_INTERSECTION: i32 = 5;
    pub const NO_SEPARATING_NECKS: i32 = 6;
}

pub fn exit_code(e: &McfError) -> i32 {
    match e {
        McfError::Config { .. } | McfError::Parse(_) | McfError::InvalidSpec(_) => exit::CONFIG,
        McfError::UncoveredTime(_) => exit::UNCOVERED_TIME,
        McfError::GridMismatch(_) => exit::GRID_MISMATCH,
        McfError::SelfIntersection { .. } => exit::SELF_INTERSECTION,
        McfError::NoSeparatingNecks { .. } => exit::NO_SEPARATING_NECKS,
        _ => exit::FAILURE,
    }
}

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub out: Option<PathBuf>,
    pub frames: bool,
    pub stride: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub stop: String,
    pub final_time: f64,
    pub steps: usize,
    pub surgeries: usize,
    pub discards: usize,
    pub classes: Vec<TangentClass>,
}

fn write_frames(dir: &Path, h: &FlowHistory) -> Result<()> {
    let frames = dir.join("frames");
    fs::create_dir_all(&frames)?;
    let Some(first) = h.slices.first() else { return Ok(()) };
    let v = Viewport::fit(first.geometries(), 0.05);
    for (k, s) in h.slices.iter().enumerate() {
        fs::write(frames.join(format!("frame_{k:05}.svg")), render_frame(s.geometries(), s.time, &v, 640.0))?;
    }
    Ok(())
}

/// Evaluates the probes on a history and writes `probe.csv`,
/// `classification.csv` and `monotonicity.csv` into `dir`.
pub fn write_probes(dir: &Path, h: &FlowHistory, probes: &[DensityProbe]) -> Result<Vec<TangentClass>> {
    let n = h
        .slices
        .first()
        .and_then(|s| s.components.first())
        .map(|c| c.geometry.dimension())
        .ok_or(McfError::UncoveredTime(f64::NAN))?;
    let mut reports = Vec::new();
    let mut classes = Vec::new();
    let mut mono = String::from("probe,max_violation\n");
    for (k, p) in probes.iter().enumerate() {
        let report = monotonicity_report(h, p)?;
        // tangent flow: the smallest radius approximates the limit
        let theta = report.series.first().map(|x| x.1).unwrap_or(f64::NAN);
        classes.push((k, classify_tangent_flow(theta, n)?));
        let _ = writeln!(mono, "{k},{:?}", report.max_violation);
        reports.push(report);
    }
    let series: Vec<_> = probes.iter().zip(&reports).enumerate().map(|(k, (p, r))| (k, p, r)).collect();
    fs::write(dir.join("probe.csv"), csv::probe_csv(&series))?;
    fs::write(dir.join("classification.csv"), csv::classification_csv(&classes))?;
    fs::write(dir.join("monotonicity.csv"), mono)?;
    Ok(classes.into_iter().map(|(_, c)| c).collect())
}

/// Evolves the configured geometry without writing anything. Plain runs are
/// reported as a [`SurgeryRun`] without surgeries; the second value names the
/// stop reason.
pub fn simulate(cfg: &ExperimentConfig, engine: &EngineConfig) -> Result<(SurgeryRun, String)> {
    let (mut geoms, t0) = cfg.geometry.build_components()?;
    if let SpacingMode::Adaptive(rule) = engine.spacing {
        geoms = geoms.iter().map(|g| g.resample_adaptive(&rule)).collect::<Result<_>>()?;
    }
    if cfg.surgery.is_some() && geoms.len() != 1 {
        return Err(McfError::InvalidSpec("surgery runs start from a single component".into()));
    }
    Ok(match &cfg.surgery {
        Some((params, limits)) => {
            let initial = FlowState::new(geoms.remove(0), t0);
            let run = surgery_flow(initial, params, *limits, engine);
            let stop = match &run.outcome {
                Ok(()) => "complete".to_string(),
                Err(e) => format!("halted: {e}"),
            };
            (run, stop)
        }
        None => {
            let mut history = FlowHistory::new();
            let components = geoms.into_iter().enumerate().map(|(id, geometry)| Component { id, geometry }).collect();
            let state = MultiState { time: t0, step_index: 0, components };
            let (_, reason) = evolve_components(state, &cfg.stops, engine, &mut history);
            let stop = format!("{reason:?}");
            let outcome = match reason {
                StopReason::Failed(e) => Err(e),
                _ => Ok(()),
            };
            (SurgeryRun { history, surgeries: Vec::new(), discards: Vec::new(), warnings: Vec::new(), outcome }, stop)
        }
    })
}

/// Runs an experiment and writes its outputs. Outputs are written even when
/// the run ends in an error, which is then returned.
pub fn cmd_run(cfg: &ExperimentConfig, ov: &RunOverrides) -> Result<RunSummary> {
    let out_dir = ov.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let mut engine = cfg.engine;
    if let Some(k) = ov.stride {
        engine.record_stride = k;
    }
    let (run, stop) = simulate(cfg, &engine)?;
    let (surgeries, discards) = (run.surgeries.len(), run.discards.len());
    let SurgeryRun { history, outcome, .. } = run;
    write_history(&out_dir, &history)?;
    if engine.alpha_stride > 0 {
        if let Ok(text) = csv::andrews_csv(&history) {
            fs::write(out_dir.join("andrews.csv"), text)?;
        }
        let last = history.slices.iter().rev().find(|s| !s.components.is_empty());
        if let Some(Ok(text)) = last.map(csv::andrews_vertex_csv) {
            fs::write(out_dir.join("andrews_vertices.csv"), text)?;
        }
    }
    if cfg.frames || ov.frames {
        write_frames(&out_dir, &history)?;
    }
    let classes = if cfg.probes.is_empty() { Vec::new() } else { write_probes(&out_dir, &history, &cfg.probes)? };
    outcome?;
    Ok(RunSummary {
        out_dir,
        stop,
        final_time: history.final_time().unwrap_or(f64::NAN),
        steps: history.scalars.len(),
        surgeries,
        discards,
        classes,
    })
}

/// Probes a stored history; results go to `out` (default: the history dir).
pub fn cmd_probe(history_dir: &Path, probes: &[DensityProbe], out: Option<&Path>) -> Result<Vec<TangentClass>> {
    let h = read_history(history_dir)?;
    let dir = out.unwrap_or(history_dir);
    fs::create_dir_all(dir)?;
    write_probes(dir, &h, probes)
}

fn scalar_row(g: &Geometry, time: f64, dt: f64) -> ScalarRow {
    let q = g.quantities();
    ScalarRow {
        time,
        area: g.total_area(),
        volume: if g.is_closed() { g.enclosed_volume() } else { 0.0 },
        max_h: q.max_h(),
        min_h: q.min_h(),
        min_l1h: f64::NAN,
        alpha: f64::NAN,
        h2_integral: q.h.iter().zip(&q.weight).map(|(h, w)| h * h * w).sum(),
        dt,
    }
}

/// History made of exact slices at the given times, with one scalar row per
/// slice whose `dt` is the gap to the next time.
pub fn synthetic_history(items: Vec<(f64, Geometry)>) -> FlowHistory {
    let mut h = FlowHistory::new();
    for (k, (t, g)) in items.iter().enumerate() {
        let dt = items.get(k + 1).map(|(t1, _)| t1 - t).unwrap_or(0.0);
        h.scalars.push(scalar_row(g, *t, dt));
        h.slices.push(Slice {
            time: *t,
            step: k as u64,
            tag: SliceTag::Regular,
            components: vec![Component { id: 0, geometry: g.clone() }],
        });
    }
    h
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Reference density table with a provenance header.
pub fn reference_density_table() -> String {
    let mut out = String::from(
        "# tangent-flow Gaussian densities of the shrinking self-similar solutions\n\
         # quadrature: Simpson (4096 panels) for spheres, trapezoid (8192) for cylinders\n\
         n,label,quadrature,closed_form\n",
    );
    for r in reference_densities() {
        let _ = writeln!(out, "{},{},{:?},{:?}", r.n, r.label, r.quadrature, r.closed_form);
    }
    out
}

pub const ORACLES: [&str; 5] = ["sphere", "cylinder", "grim-reaper", "plane", "reference-densities"];

/// Writes the exact solution `name` at `times` into `out` as a history
/// directory (times where the solution does not exist are skipped).
pub fn cmd_oracle(name: &str, params: &BTreeMap<String, f64>, times: &[f64], out: &Path) -> Result<usize> {
    fs::create_dir_all(out)?;
    if name == "reference-densities" {
        fs::write(out.join("reference_densities.csv"), reference_density_table())?;
        return Ok(reference_densities().len());
    }
    let count = param(params, "count", 256.0) as usize;
    let n = param(params, "n", 1.0) as usize;
    let mut items = Vec::new();
    for &t in times {
        let g: Result<Geometry> = match name {
            "sphere" => exact::sphere_at(&exact::SphereSolution::new(param(params, "radius", 1.0), n), t, count),
            "cylinder" => {
                let sol = exact::CylinderSolution::new(param(params, "radius", 1.0), n.max(2), 1);
                exact::cylinder_at(&sol, t, param(params, "length", 4.0), count).map(Into::into)
            }
            "grim-reaper" => {
                exact::grim_reaper(t, &exact::grim_reaper_grid(param(params, "p_max", 1.45), count)).map(Into::into)
            }
            "plane" => exact::line_segment(param(params, "half_length", 1e3), count).map(Into::into),
            other => {
                return Err(McfError::Config {
                    key: "oracle".into(),
                    message: format!("unknown oracle {other:?}; known: {}", ORACLES.join(", ")),
                })
            }
        };
        match g {
            Ok(g) => items.push((t, g)),
            Err(McfError::PastExtinction { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let k = items.len();
    write_history(out, &synthetic_history(items))?;
    Ok(k)
}

/// Distinct slice times of a stored history.
pub fn slice_times(history_dir: &Path) -> Result<Vec<f64>> {
    let h = read_history(history_dir)?;
    let mut t: Vec<f64> = h.slices.iter().map(|s| s.time).collect();
    t.dedup();
    Ok(t)
}

fn polyline_distance(p: Point, g: &Geometry) -> f64 {
    let pts = g.points();
    let ends = g.ends();
    (0..polyline::edge_count(pts.len(), ends))
        .map(|e| {
            let (a, b) = polyline::edge(pts, ends, e);
            polyline::point_segment_distance(p, a, b)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two polylines (vertices against
/// edges in both directions).
pub fn hausdorff(a: &Geometry, b: &Geometry) -> f64 {
    let ab = a.points().iter().map(|p| polyline_distance(*p, b)).fold(0.0, f64::max);
    let ba = b.points().iter().map(|p| polyline_distance(*p, a)).fold(0.0, f64::max);
    ab.max(ba)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    /// `(time, hausdorff / reference size, relative area difference)`.
    pub rows: Vec<(f64, f64, f64)>,
    pub max_shape: f64,
    pub max_area: f64,
    pub pass: bool,
}

/// Compares a run with a reference on the reference's time grid, which
/// must be contained in the run's. The shape error is the Hausdorff
/// distance relative to the reference half-diameter.
pub fn cmd_compare(history_dir: &Path, reference_dir: &Path, tolerance: f64, out: Option<&Path>) -> Result<CompareReport> {
    let h = read_history(history_dir)?;
    let r = read_history(reference_dir)?;
    let mut rows = Vec::new();
    for rs in &r.slices {
        let tol = 1e-9 * rs.time.abs().max(1.0);
        let hs = h
            .slices
            .iter()
            .find(|s| (s.time - rs.time).abs() <= tol)
            .ok_or_else(|| McfError::GridMismatch(format!("reference time {} not in the run", rs.time)))?;
        if hs.components.len() != rs.components.len() {
            return Err(McfError::GridMismatch(format!(
                "at t = {}: {} components against {}",
                rs.time,
                hs.components.len(),
                rs.components.len()
            )));
        }
        let (mut shape, mut area) = (0.0_f64, 0.0_f64);
        for (a, b) in hs.geometries().zip(rs.geometries()) {
            let size = 0.5 * b.diameter();
            shape = shape.max(hausdorff(a, b) / size);
            area = area.max((a.total_area() - b.total_area()).abs() / b.total_area());
        }
        rows.push((rs.time, shape, area));
    }
    if rows.is_empty() {
        return Err(McfError::GridMismatch("reference has no slices".into()));
    }
    let max_shape = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_area = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let report = CompareReport { rows, max_shape, max_area, pass: max_shape <= tolerance && max_area <= tolerance };
    let mut text = String::from("time,shape_error,area_error\n");
    for (t, s, a) in &report.rows {
        let _ = writeln!(text, "{t:?},{s:?},{a:?}");
    }
    fs::write(out.unwrap_or(history_dir).join("compare.csv"), text)?;
    Ok(report)
}
