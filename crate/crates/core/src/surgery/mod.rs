//! Flow with surgery for axisymmetric mean convex hypersurfaces.
//!
//! The flow runs until `max H` reaches `H_trig`. Then a minimal collection of
//! necks of curvature about `H_neck` separating the trigger region from the
//! thick part `{H <= H_th}` is cut and capped, components with `H > H_th`
//! everywhere are discarded, and the remaining pieces continue.

mod cap;
mod neck;

pub use cap::{cap_curvature_bound, cap_radius, replace_neck, standard_cap_profile, Replacement, CAP_LENGTH};
pub use neck::{detect_necks, detect_necks_final, model_radius, NeckRegion, CHECK_TIMES, TIME_TOLERANCE};

use crate::diagnostics::andrews_quantities;
use crate::error::{McfError, Result};
use crate::flow::{
    evolve_components, Component, EngineConfig, EventKind, FlowHistory, FlowState, MultiState, SliceTag,
    StopCriterion, StopReason,
};
use crate::geometry::{Closure, Geometry};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurgeryParams {
    /// Andrews constant required initially.
    pub alpha: f64,
    /// Two-convexity: `lambda_1 + lambda_2 >= beta H`.
    pub beta: f64,
    /// Curvature bound of the initial data.
    pub gamma: f64,
    /// Neck quality.
    pub delta: f64,
    pub h_th: f64,
    pub h_neck: f64,
    pub h_trig: f64,
    /// Cap scale `Gamma`.
    pub cap_scale: f64,
    /// Width of the allowed band of neck radii.
    pub mu: f64,
}

impl Default for SurgeryParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            beta: 0.5,
            gamma: 10.0,
            delta: 0.05,
            h_th: 10.0,
            h_neck: 100.0,
            h_trig: 1000.0,
            cap_scale: 20.0,
            mu: 2.0,
        }
    }
}

impl SurgeryParams {
    /// Checks the parameter ranges and returns warnings for relations that
    /// are advisory only.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |m: String| Err(McfError::InvalidSpec(m));
        if !(self.delta > 0.0 && self.delta <= 0.1) {
            return bad(format!("delta must lie in (0, 0.1], got {}", self.delta));
        }
        if !(self.h_th > 0.0 && self.h_neck > self.h_th && self.h_trig > self.h_neck) {
            return bad("need 0 < H_th < H_neck < H_trig".into());
        }
        if self.h_trig / self.h_neck < 10.0 || self.h_neck / self.h_th < 10.0 {
            return bad("curvature scales must be at least a factor 10 apart".into());
        }
        if !(self.cap_scale >= 10.0) {
            return bad(format!("cap scale must be at least 10, got {}", self.cap_scale));
        }
        if !(self.mu >= 1.0) {
            return bad(format!("mu must be at least 1, got {}", self.mu));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.gamma > 0.0) {
            return bad("alpha, beta and gamma must be positive".into());
        }
        let mut warnings = Vec::new();
        if self.delta > 1.0 / (10.0 * self.cap_scale) {
            warnings.push(format!(
                "delta = {} exceeds 1/(10 Gamma) = {}",
                self.delta,
                1.0 / (10.0 * self.cap_scale)
            ));
        }
        Ok(warnings)
    }

    /// Reference neck radius `(n - 1) / H_neck`.
    pub fn s_sharp(&self, n: usize) -> f64 {
        (n as f64 - 1.0) / self.h_neck
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Ball,
    SolidTorus,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Ball => "ball",
            Topology::SolidTorus => "solid_torus",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscardRecord {
    pub component: usize,
    pub topology: Topology,
    pub min_h: f64,
    pub time: f64,
}

/// Topology of the solid bounded by a closed component, if it has one.
pub fn topology(g: &Geometry) -> Option<Topology> {
    match g {
        Geometry::Curve(c) if !c.is_open() => Some(Topology::Ball),
        Geometry::Axisym(p) => match p.closure() {
            Closure::AxisToAxis => Some(Topology::Ball),
            Closure::OffAxisLoop => Some(Topology::SolidTorus),
            Closure::OpenSegment => None,
        },
        _ => None,
    }
}

/// Splits off the closed components with `H > H_th` everywhere.
pub fn discard_components(
    components: Vec<Component>,
    params: &SurgeryParams,
    time: f64,
) -> (Vec<Component>, Vec<DiscardRecord>) {
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for c in components {
        let min_h = c.geometry.quantities().min_h();
        match topology(&c.geometry) {
            Some(topology) if min_h > params.h_th => {
                discarded.push(DiscardRecord { component: c.id, topology, min_h, time })
            }
            _ => kept.push(c),
        }
    }
    (kept, discarded)
}

/// True iff every path along the profile from a vertex with
/// `H >= 0.99 H_trig` to one with `H <= H_th` passes a neck center.
pub fn separation_check(g: &Geometry, necks: &[NeckRegion], params: &SurgeryParams) -> bool {
    let q = g.quantities();
    let len = q.len();
    let mut cuts: Vec<usize> = necks.iter().map(|k| k.center_index).filter(|&i| i < len).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let cyclic = g.is_closed() && !matches!(g, Geometry::Axisym(p) if p.closure() == Closure::AxisToAxis);
    // cell of each vertex: vertices strictly between consecutive cuts
    let cell = |i: usize| -> Option<usize> {
        if cuts.contains(&i) {
            return None;
        }
        let k = cuts.partition_point(|&c| c < i);
        Some(if cyclic && k == cuts.len() { 0 } else { k })
    };
    let mut hot = vec![false; cuts.len() + 1];
    let mut thick = vec![false; cuts.len() + 1];
    for i in 0..len {
        if let Some(k) = cell(i) {
            if q.h[i] >= 0.99 * params.h_trig {
                hot[k] = true;
            }
            if q.h[i] <= params.h_th {
                thick[k] = true;
            }
        }
    }
    !hot.iter().zip(&thick).any(|(a, b)| *a && *b)
}

/// Drops necks from the left as long as separation survives, so that
/// removing any remaining one breaks it.
pub fn minimal_collection(g: &Geometry, necks: &[NeckRegion], params: &SurgeryParams) -> Option<Vec<NeckRegion>> {
    let mut chosen: Vec<NeckRegion> = necks.to_vec();
    chosen.sort_by(|a, b| a.center.total_cmp(&b.center));
    if !separation_check(g, &chosen, params) {
        return None;
    }
    let mut k = 0;
    while k < chosen.len() {
        let mut without = chosen.clone();
        without.remove(k);
        if separation_check(g, &without, params) {
            chosen = without;
        } else {
            k += 1;
        }
    }
    Some(chosen)
}

/// One neck cut during a run, with the invariants checked at that moment.
#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryRecord {
    pub time: f64,
    pub neck: NeckRegion,
    pub components_after: usize,
    /// `max (r_post - r_pre)` over the modified range.
    pub containment: f64,
    /// Vertices outside `B(c, 5 Gamma s)` were copied bitwise.
    pub local: bool,
    /// Removing any single neck of the collection breaks separation.
    pub minimal: bool,
    /// `max H / H_trig` at the trigger.
    pub trigger_ratio: f64,
    /// `s sup |A|` over the cap region.
    pub cap_curvature: f64,
}

#[derive(Debug)]
pub struct SurgeryRun {
    pub history: FlowHistory,
    pub surgeries: Vec<SurgeryRecord>,
    pub discards: Vec<DiscardRecord>,
    pub warnings: Vec<String>,
    /// `Err` when the run halted (for example without separating necks).
    pub outcome: Result<()>,
}

impl SurgeryRun {
    /// Largest `max H` over all recorded steps.
    pub fn max_h(&self) -> f64 {
        self.history.scalars.iter().map(|r| r.max_h).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest `(lambda_1 + lambda_2) / H` over all recorded slices.
    pub fn min_two_convexity(&self) -> f64 {
        self.history
            .slices
            .iter()
            .flat_map(|s| s.geometries())
            .map(two_convexity)
            .fold(f64::INFINITY, f64::min)
    }
}

fn two_convexity(g: &Geometry) -> f64 {
    let q = g.quantities();
    (0..q.len()).map(|i| q.lambda12(i) / q.h[i]).fold(f64::INFINITY, f64::min)
}

/// Checks the controlled initial condition: mean convex, `H <= gamma`,
/// `lambda_1 + lambda_2 >= beta H` and `alpha`-Andrews.
pub fn check_controlled(g: &Geometry, params: &SurgeryParams) -> Result<()> {
    let q = g.quantities();
    if !(q.min_h() > 0.0) {
        return Err(McfError::NotControlled(format!("not mean convex: min H = {}", q.min_h())));
    }
    if q.max_h() > params.gamma {
        return Err(McfError::NotControlled(format!("max H = {} exceeds gamma = {}", q.max_h(), params.gamma)));
    }
    let tc = two_convexity(g);
    if tc < params.beta {
        return Err(McfError::NotControlled(format!("(l1 + l2) / H = {tc} below beta = {}", params.beta)));
    }
    let alpha = andrews_quantities(g)?.alpha;
    if alpha < params.alpha {
        return Err(McfError::NotControlled(format!("Andrews alpha = {alpha} below {}", params.alpha)));
    }
    Ok(())
}

/// Time limits of a run with surgery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLimits {
    pub horizon: f64,
    /// Components with smaller area are treated as extinct.
    pub extinction_area: f64,
}

/// Runs the flow with surgery until every component is extinct or
/// discarded, or the horizon is reached.
pub fn surgery_flow(initial: FlowState, params: &SurgeryParams, limits: RunLimits, engine: &EngineConfig) -> SurgeryRun {
    let mut run = SurgeryRun {
        history: FlowHistory::new(),
        surgeries: Vec::new(),
        discards: Vec::new(),
        warnings: Vec::new(),
        outcome: Ok(()),
    };
    match params.validate() {
        Ok(w) => run.warnings = w,
        Err(e) => {
            run.outcome = Err(e);
            return run;
        }
    }
    if let Err(e) = check_controlled(&initial.geometry, params) {
        run.outcome = Err(e);
        return run;
    }
    for w in run.warnings.clone() {
        run.history.push_event(initial.time, EventKind::Warning, w.replace(',', ";"));
    }
    let n = initial.geometry.dimension();
    let s_max = params.s_sharp(n) * params.mu.sqrt();
    let s_min = params.s_sharp(n) / params.mu.sqrt();
    let cfg = EngineConfig {
        trail: Some((1.05 * s_max * s_max, 0.5 * TIME_TOLERANCE * s_min * s_min)),
        ..*engine
    };
    let stops = [
        StopCriterion::Trigger(params.h_trig),
        StopCriterion::Extinction(limits.extinction_area),
        StopCriterion::Horizon(limits.horizon),
    ];
    let mut state = MultiState::single(initial);
    let mut next_id = 1;
    loop {
        let (st, reason) = evolve_components(state, &stops, &cfg, &mut run.history);
        state = st;
        match reason {
            StopReason::Trigger => {}
            StopReason::Failed(e) => {
                run.outcome = Err(e);
                return run;
            }
            _ => return run,
        }
        match surgery_step(&mut run, &mut state, params, &mut next_id) {
            Ok(true) => {}
            Ok(false) => return run,
            Err(e) => {
                let dump = format!("{e}").replace(',', ";");
                run.history.push_event(state.time, EventKind::Warning, dump);
                run.outcome = Err(e);
                return run;
            }
        }
    }
}

/// Performs surgery and discarding at a trigger time. Returns `false` when
/// nothing is left to evolve.
fn surgery_step(run: &mut SurgeryRun, state: &mut MultiState, params: &SurgeryParams, next_id: &mut usize) -> Result<bool> {
    let time = state.time;
    let necks = match detect_necks(&run.history, time, params) {
        Ok(necks) => necks,
        Err(McfError::InsufficientHistory(t)) => {
            let msg = format!("backward neck check uncovered at t = {t}; using final-time detection");
            log::warn!("{msg}");
            run.history.push_event(time, EventKind::Warning, msg.replace(',', ";"));
            let slice = run.history.slices.last().expect("trigger slice recorded");
            detect_necks_final(slice, params)
        }
        Err(e) => return Err(e),
    };
    let mut progressed = false;
    let mut next: Vec<Component> = Vec::new();
    let mut records = Vec::new();
    for comp in std::mem::take(&mut state.components) {
        let q = comp.geometry.quantities();
        let hot = q.max_h() >= 0.99 * params.h_trig;
        let mine: Vec<NeckRegion> = necks.iter().filter(|k| k.component == comp.id).cloned().collect();
        if !hot {
            next.push(comp);
            continue;
        }
        let chosen = minimal_collection(&comp.geometry, &mine, params).ok_or_else(|| McfError::NoSeparatingNecks {
            time,
            detail: format!(
                "component {} max H {:.6e} min H {:.6e} with {} candidate necks",
                comp.id,
                q.max_h(),
                q.min_h(),
                mine.len()
            ),
        })?;
        let minimal = chosen.iter().enumerate().all(|(k, _)| {
            let mut without = chosen.clone();
            without.remove(k);
            !separation_check(&comp.geometry, &without, params)
        });
        let Geometry::Axisym(profile) = &comp.geometry else {
            next.push(comp);
            continue;
        };
        let mut rest = profile.clone();
        for neck in &chosen {
            let rep = replace_neck(&rest, neck, params)?;
            let local = locality(&rest, &rep);
            let mut pieces = rep.pieces.into_iter();
            let left = pieces.next().expect("two pieces");
            rest = pieces.next().expect("two pieces");
            next.push(Component { id: *next_id, geometry: left.into() });
            *next_id += 1;
            records.push(SurgeryRecord {
                time,
                neck: neck.clone(),
                components_after: 0,
                containment: rep.containment,
                local,
                minimal,
                trigger_ratio: q.max_h() / params.h_trig,
                cap_curvature: rep.cap_curvature,
            });
            progressed = true;
        }
        if chosen.is_empty() {
            next.push(comp);
        } else {
            next.push(Component { id: *next_id, geometry: rest.into() });
            *next_id += 1;
        }
    }
    let (kept, discarded) = discard_components(next, params, time);
    progressed |= !discarded.is_empty();
    if !progressed {
        return Err(McfError::NoSeparatingNecks { time, detail: "trigger fired but nothing was cut or discarded".into() });
    }
    let after = kept.len() + discarded.len();
    for mut r in records {
        r.components_after = after;
        run.history.push_event(
            time,
            EventKind::Surgery,
            format!("{},{},{},{}", r.neck.center, r.neck.radius, r.neck.quality, after),
        );
        run.surgeries.push(r);
    }
    for d in &discarded {
        run.history.push_event(time, EventKind::Discard, format!("{},{},{}", d.component, d.topology, d.min_h));
    }
    run.discards.extend(discarded);
    state.components = kept;
    run.history.slices.push(crate::flow::Slice {
        time,
        step: state.step_index,
        tag: SliceTag::PostEvent,
        components: state.components.clone(),
    });
    Ok(!state.components.is_empty())
}

/// Vertices of the input outside the modified range appear unchanged.
fn locality(before: &crate::geometry::AxisymProfile, rep: &Replacement) -> bool {
    let pts = before.points();
    let (l, r) = rep.unchanged;
    let left = rep.pieces[0].points();
    let right = rep.pieces[1].points();
    left[..l] == pts[..l] && right[right.len() - r..] == pts[pts.len() - r..]
}

#[cfg(test)]
mod tests;
