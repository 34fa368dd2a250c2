//! Explicit time integration of `dx/dt = H_vec`.
//!
//! Each step moves every vertex by `-dt * H * nu` (outward normal `nu`), so
//! points on a sphere move toward its center. Remeshing is tangential only
//! and is triggered when edge lengths drift apart by more than the configured
//! ratio. Extinction is detected by an area threshold.

mod distance;
mod history;

pub use distance::{geometry_distance, pair_distance};
pub use history::{Component, Event, EventKind, FlowHistory, ScalarRow, Slice, SliceTag};

use crate::diagnostics::andrews;
use crate::error::{McfError, Result};
use crate::geometry::{polyline::Ends, Geometry, Point, QuantityField, SpacingRule};
use crate::par;
use std::collections::VecDeque;

/// A single geometry at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub geometry: Geometry,
    pub time: f64,
    pub step_index: u64,
}

impl FlowState {
    pub fn new(geometry: impl Into<Geometry>, time: f64) -> Self {
        Self { geometry: geometry.into(), time, step_index: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCriterion {
    /// Stop at this time.
    Horizon(f64),
    /// Remove components whose area drops below the threshold; stop when
    /// none are left.
    Extinction(f64),
    /// Stop once `max H` reaches this value.
    Blowup(f64),
    /// Stop with `max H` in `[0.99, 1.01]` times this value.
    Trigger(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpacingMode {
    /// Equal edge lengths; the vertex count is kept (or reduced when
    /// coarsening is enabled and the geometry has shrunk).
    Uniform,
    /// Curvature-adapted spacing.
    Adaptive(SpacingRule),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub cfl: f64,
    /// Remesh when (normalized) edge lengths spread by more than this ratio.
    pub remesh_ratio: f64,
    pub spacing: SpacingMode,
    /// Uniform mode: halve the vertex count as the geometry shrinks, never
    /// going below `min_vertices`.
    pub coarsen: bool,
    pub min_vertices: usize,
    /// Record a slice every this many steps (plus all event times).
    pub record_stride: u64,
    /// Push a scalar row every this many steps (1 = every step).
    pub scalar_stride: u64,
    /// Record every step while the time lies in this window.
    pub dense_window: Option<(f64, f64)>,
    /// `(duration, resolution)`: additionally keep states from the last
    /// `duration` of the run, at least `resolution` apart in time.
    pub trail: Option<(f64, f64)>,
    /// Evaluate the Andrews constant every this many steps (0 = never).
    pub alpha_stride: u64,
    pub max_steps: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            remesh_ratio: 2.0,
            spacing: SpacingMode::Uniform,
            coarsen: false,
            min_vertices: 32,
            record_stride: 100,
            scalar_stride: 1,
            dense_window: None,
            trail: None,
            alpha_stride: 0,
            max_steps: 50_000_000,
        }
    }
}

/// `dt = cfl * h^2 / (2 + h max|H|)` with `h` the shortest edge.
pub fn choose_dt(state: &FlowState, cfl: f64) -> Result<f64> {
    let q = state.geometry.quantities();
    dt_for(&state.geometry, &q, cfl)
}

fn dt_for(g: &Geometry, q: &QuantityField, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(McfError::InvalidSpec(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    let h = g.min_edge();
    if !(h > 0.0) {
        return Err(McfError::DegenerateGeometry("zero minimal edge length".into()));
    }
    Ok(cfl * h * h / (2.0 + h * q.max_abs_h()))
}

/// Velocity `H_vec = -H nu` at every vertex; free endpoints extrapolate
/// linearly from their two neighbours.
pub fn velocity(g: &Geometry, q: &QuantityField) -> Vec<Point> {
    let n = g.len();
    let mut v = par::map_indexed(n, |i| -q.normal[i] * q.h[i]);
    if g.ends() == Ends::Free {
        v[0] = v[1] * 2.0 - v[2];
        v[n - 1] = v[n - 2] * 2.0 - v[n - 3];
    }
    v
}

/// One explicit step of size `dt`.
pub fn step(state: &FlowState, dt: f64, cfg: &EngineConfig) -> Result<FlowState> {
    let q = state.geometry.quantities();
    let limit = dt_for(&state.geometry, &q, 1.0)?;
    if dt > limit * (1.0 + 1e-12) {
        return Err(McfError::StepTooLarge { dt, limit });
    }
    let geometry = advance(&state.geometry, &q, dt, cfg, None)?;
    Ok(FlowState { geometry, time: state.time + dt, step_index: state.step_index + 1 })
}

/// Moves the vertices and remeshes if needed. `h_ref` is the reference
/// spacing for uniform coarsening.
fn advance(g: &Geometry, q: &QuantityField, dt: f64, cfg: &EngineConfig, h_ref: Option<f64>) -> Result<Geometry> {
    let v = velocity(g, q);
    let old = g.points();
    let axis = g.ends() == Ends::Axis;
    let last = old.len() - 1;
    let moved: Vec<Point> = old
        .iter()
        .zip(&v)
        .enumerate()
        .map(|(i, (p, vi))| {
            let mut p = p + vi * dt;
            if axis && (i == 0 || i == last) {
                p.y = 0.0;
            }
            p
        })
        .collect();
    if g.is_axisymmetric() {
        let interior = if axis { 1..last } else { 0..last + 1 };
        for i in interior {
            if !(moved[i].y > 0.0) {
                return Err(McfError::AxisViolation { index: i, r: moved[i].y });
            }
        }
    }
    let next = g.with_points(moved)?;
    remesh_if_needed(next, q, cfg, h_ref)
}

fn remesh_if_needed(g: Geometry, q_old: &QuantityField, cfg: &EngineConfig, h_ref: Option<f64>) -> Result<Geometry> {
    let edges = g.edge_lengths();
    match cfg.spacing {
        SpacingMode::Uniform => {
            let (lo, hi) = min_max(edges.iter().copied());
            let total: f64 = edges.iter().sum();
            let mut count = edges.len() as f64;
            let mut coarsen = false;
            if cfg.coarsen {
                if let Some(h0) = h_ref {
                    let wanted = (total / h0).max(cfg.min_vertices as f64);
                    if wanted < 0.5 * count {
                        count = (0.5 * count).max(cfg.min_vertices as f64).round();
                        coarsen = true;
                    }
                }
            }
            if coarsen || hi > cfg.remesh_ratio * lo {
                return g.resample(total / count);
            }
            Ok(g)
        }
        SpacingMode::Adaptive(rule) => {
            if q_old.len() != g.len() {
                return Ok(g);
            }
            let targets = rule.targets(&g, q_old);
            let n = g.len();
            let norm = edges.iter().enumerate().map(|(e, len)| len / (0.5 * (targets[e] + targets[(e + 1) % n])));
            let (lo, hi) = min_max(norm);
            let band = cfg.remesh_ratio.sqrt();
            if hi > band || lo < 1.0 / band {
                return g.resample_adaptive(&rule);
            }
            Ok(g)
        }
    }
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// How an [`evolve_components`] run ended.
#[derive(Debug)]
pub enum StopReason {
    Horizon,
    Extinct,
    Blowup,
    Trigger,
    StepLimit,
    Failed(McfError),
}

/// State of a multi-component flow.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiState {
    pub time: f64,
    pub step_index: u64,
    pub components: Vec<Component>,
}

impl MultiState {
    pub fn single(state: FlowState) -> Self {
        Self {
            time: state.time,
            step_index: state.step_index,
            components: vec![Component { id: 0, geometry: state.geometry }],
        }
    }

    fn slice(&self, tag: SliceTag) -> Slice {
        Slice { time: self.time, step: self.step_index, tag, components: self.components.clone() }
    }
}

/// Runs the flow until the first criterion fires, recording into `history`.
pub fn evolve(initial: FlowState, stops: &[StopCriterion], cfg: &EngineConfig) -> FlowHistory {
    let mut history = FlowHistory::new();
    evolve_components(MultiState::single(initial), stops, cfg, &mut history);
    history
}

/// Lock-step evolution of several components with a common step size.
///
/// Returns the final state together with the reason for stopping; the
/// matching event is appended to `history` together with a final slice.
pub fn evolve_components(
    state: MultiState,
    stops: &[StopCriterion],
    cfg: &EngineConfig,
    history: &mut FlowHistory,
) -> (MultiState, StopReason) {
    let first = history.slices.len();
    let mut trail = VecDeque::new();
    let out = run(state, stops, cfg, history, &mut trail);
    if !trail.is_empty() {
        let mut merged: Vec<Slice> = history.slices.split_off(first);
        merged.extend(trail);
        // stable: for equal steps the recorded (possibly tagged) slice comes first
        merged.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.step.cmp(&b.step)));
        merged.dedup_by(|later, earlier| later.step == earlier.step && later.time == earlier.time);
        history.slices.extend(merged);
    }
    out
}

fn run(
    mut state: MultiState,
    stops: &[StopCriterion],
    cfg: &EngineConfig,
    history: &mut FlowHistory,
    trail: &mut VecDeque<Slice>,
) -> (MultiState, StopReason) {
    let h_ref: Vec<f64> = state
        .components
        .iter()
        .map(|c| c.geometry.edge_lengths().iter().sum::<f64>() / c.geometry.edge_lengths().len() as f64)
        .collect();
    let mut h_ref: std::collections::HashMap<usize, f64> =
        state.components.iter().map(|c| c.id).zip(h_ref).collect();
    let extinction_tol = stops.iter().find_map(|s| match s {
        StopCriterion::Extinction(tol) => Some(*tol),
        _ => None,
    });
    let horizon = stops.iter().find_map(|s| match s {
        StopCriterion::Horizon(t) => Some(*t),
        _ => None,
    });
    let blowup = stops.iter().find_map(|s| match s {
        StopCriterion::Blowup(h) => Some(*h),
        _ => None,
    });
    let trigger = stops.iter().find_map(|s| match s {
        StopCriterion::Trigger(h) => Some(*h),
        _ => None,
    });
    let cap = match (blowup, trigger) {
        (_, Some(t)) => Some(1.01 * t),
        _ => None,
    };

    let mut quants: Vec<QuantityField> = state.components.iter().map(|c| c.geometry.quantities()).collect();
    let mut steps_taken = 0u64;
    history.slices.push(state.slice(SliceTag::Regular));
    loop {
        // extinction of individual components
        if let Some(tol) = extinction_tol {
            let mut k = 0;
            while k < state.components.len() {
                let area = quants[k].total_weight();
                if area < tol {
                    let c = state.components.remove(k);
                    quants.remove(k);
                    h_ref.remove(&c.id);
                    history.push_event(state.time, EventKind::Extinction, format!("{},{}", c.id, area));
                } else {
                    k += 1;
                }
            }
            if state.components.is_empty() {
                history.slices.push(state.slice(SliceTag::PreEvent));
                return (state, StopReason::Extinct);
            }
        }
        let max_h = quants.iter().map(|q| q.max_h()).fold(f64::NEG_INFINITY, f64::max);
        if let Some(ht) = trigger {
            if max_h >= 0.99 * ht {
                let at = argmax_component(&state, &quants);
                history.slices.push(state.slice(SliceTag::PreEvent));
                history.push_event(state.time, EventKind::Trigger, format!("{at},{max_h}"));
                return (state, StopReason::Trigger);
            }
        }
        if let Some(hb) = blowup {
            if max_h >= hb {
                let at = argmax_component(&state, &quants);
                history.slices.push(state.slice(SliceTag::PreEvent));
                history.push_event(state.time, EventKind::BlowupStop, format!("{at},{max_h}"));
                return (state, StopReason::Blowup);
            }
        }
        if let Some(t_end) = horizon {
            if state.time >= t_end - 1e-15 * t_end.abs().max(1.0) {
                push_row(history, &state, &quants, cfg, 0.0);
                history.slices.push(state.slice(SliceTag::PreEvent));
                history.push_event(state.time, EventKind::Horizon, "");
                return (state, StopReason::Horizon);
            }
        }
        if steps_taken >= cfg.max_steps {
            history.slices.push(state.slice(SliceTag::PreEvent));
            return (state, StopReason::StepLimit);
        }

        let mut dt = match common_dt(&state, &quants, cfg.cfl) {
            Ok(dt) => dt,
            Err(e) => return fail(history, state, e),
        };
        if let Some(t_end) = horizon {
            dt = dt.min(t_end - state.time);
        }
        let row_pushed = cfg.scalar_stride <= 1 || state.step_index.is_multiple_of(cfg.scalar_stride);
        if row_pushed {
            push_row(history, &state, &quants, cfg, dt);
        }

        // take the step, halving dt if it would overshoot the trigger cap
        let mut attempt = 0;
        let (next, next_q) = loop {
            let result: Result<Vec<Component>> = state
                .components
                .iter()
                .zip(&quants)
                .map(|(c, q)| {
                    let href = h_ref.get(&c.id).copied();
                    advance(&c.geometry, q, dt, cfg, href).map(|g| Component { id: c.id, geometry: g })
                })
                .collect();
            let comps = match result {
                Ok(c) => c,
                Err(e) => {
                    if row_pushed {
                        if let Some(last) = history.scalars.last_mut() {
                            last.dt = 0.0;
                        }
                    }
                    return fail(history, state, e);
                }
            };
            let qs: Vec<QuantityField> = comps.iter().map(|c| c.geometry.quantities()).collect();
            let new_max = qs.iter().map(|q| q.max_h()).fold(f64::NEG_INFINITY, f64::max);
            match cap {
                Some(c) if new_max > c && attempt < 40 => {
                    attempt += 1;
                    dt *= 0.5;
                    if row_pushed {
                        if let Some(last) = history.scalars.last_mut() {
                            last.dt = dt;
                        }
                    }
                }
                _ => break (comps, qs),
            }
        };
        state.components = next;
        quants = next_q;
        state.time += dt;
        state.step_index += 1;
        steps_taken += 1;
        if let Some((duration, resolution)) = cfg.trail {
            if trail.back().is_none_or(|b: &Slice| state.time - b.time >= resolution) {
                trail.push_back(state.slice(SliceTag::Regular));
            }
            while trail.front().is_some_and(|f| f.time < state.time - duration) {
                trail.pop_front();
            }
        }
        let dense = cfg.dense_window.is_some_and(|(a, b)| state.time >= a && state.time <= b);
        if dense || (cfg.record_stride > 0 && state.step_index.is_multiple_of(cfg.record_stride)) {
            history.slices.push(state.slice(SliceTag::Regular));
        }
    }
}

fn argmax_component(state: &MultiState, quants: &[QuantityField]) -> usize {
    let mut best = 0;
    for k in 1..quants.len() {
        if quants[k].max_h() > quants[best].max_h() {
            best = k;
        }
    }
    state.components[best].id
}

fn common_dt(state: &MultiState, quants: &[QuantityField], cfl: f64) -> Result<f64> {
    let mut dt = f64::INFINITY;
    for (c, q) in state.components.iter().zip(quants) {
        dt = dt.min(dt_for(&c.geometry, q, cfl)?);
    }
    Ok(dt)
}

fn fail(history: &mut FlowHistory, state: MultiState, e: McfError) -> (MultiState, StopReason) {
    let kind = match e {
        McfError::SelfIntersection { .. } => EventKind::SelfIntersection,
        _ => EventKind::BlowupStop,
    };
    history.slices.push(state.slice(SliceTag::PreEvent));
    history.push_event(state.time, kind, format!("error,{}", e.to_string().replace(',', ";")));
    (state, StopReason::Failed(e))
}

fn push_row(history: &mut FlowHistory, state: &MultiState, quants: &[QuantityField], cfg: &EngineConfig, dt: f64) {
    let mut row = ScalarRow {
        time: state.time,
        area: 0.0,
        volume: 0.0,
        max_h: f64::NEG_INFINITY,
        min_h: f64::INFINITY,
        min_l1h: f64::INFINITY,
        alpha: f64::NAN,
        h2_integral: 0.0,
        dt,
    };
    for (c, q) in state.components.iter().zip(quants) {
        row.area += q.total_weight();
        row.volume += c.geometry.enclosed_volume();
        row.max_h = row.max_h.max(q.max_h());
        row.min_h = row.min_h.min(q.min_h());
        row.min_l1h = row.min_l1h.min(q.min_lambda1_over_h());
        row.h2_integral += q.h.iter().zip(&q.weight).map(|(h, w)| h * h * w).sum::<f64>();
    }
    if cfg.alpha_stride > 0 && state.step_index.is_multiple_of(cfg.alpha_stride) {
        row.alpha = state
            .components
            .iter()
            .map(|c| andrews::andrews_quantities(&c.geometry).map(|r| r.alpha).unwrap_or(f64::NAN))
            .fold(f64::INFINITY, f64::min);
    }
    history.scalars.push(row);
}

#[cfg(test)]
mod tests;
