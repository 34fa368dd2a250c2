use crate::error::Result;
use crate::geometry::{Geometry, SpacetimePoint};
use std::fmt;

/// One connected piece of the evolving hypersurface.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: usize,
    pub geometry: Geometry,
}

/// Why a slice was recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceTag {
    Regular,
    /// Last state before an event (surgery, discard, stop).
    PreEvent,
    /// First state after a surgery/discard at the same time.
    PostEvent,
}

/// All components at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub time: f64,
    pub step: u64,
    pub tag: SliceTag,
    pub components: Vec<Component>,
}

impl Slice {
    pub fn geometries(&self) -> impl Iterator<Item = &Geometry> {
        self.components.iter().map(|c| &c.geometry)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Surgery,
    Discard,
    Extinction,
    BlowupStop,
    Trigger,
    Horizon,
    SelfIntersection,
    Warning,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Surgery => "surgery",
            EventKind::Discard => "discard",
            EventKind::Extinction => "extinction",
            EventKind::BlowupStop => "blowup_stop",
            EventKind::Trigger => "trigger",
            EventKind::Horizon => "horizon",
            EventKind::SelfIntersection => "self_intersection",
            EventKind::Warning => "warning",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "surgery" => EventKind::Surgery,
            "discard" => EventKind::Discard,
            "extinction" => EventKind::Extinction,
            "blowup_stop" => EventKind::BlowupStop,
            "trigger" => EventKind::Trigger,
            "horizon" => EventKind::Horizon,
            "self_intersection" => EventKind::SelfIntersection,
            "warning" => EventKind::Warning,
            _ => return None,
        })
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// Comma-separated payload fields (kind specific).
    pub payload: String,
}

/// Per-step scalar record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRow {
    pub time: f64,
    pub area: f64,
    pub volume: f64,
    pub max_h: f64,
    pub min_h: f64,
    /// Smallest `lambda_1 / H` over vertices with `H > 0`.
    pub min_l1h: f64,
    /// Andrews constant; NaN on steps where it was not evaluated.
    pub alpha: f64,
    /// Largest `|A|^2 * H`-free curvature bound used by some monitors: the
    /// total `sum H^2 dmu` at the start of the step (area decay check).
    pub h2_integral: f64,
    /// Step size taken from this state (0 for the last row).
    pub dt: f64,
}

/// Time-ordered record of a flow: subsampled slices, events and per-step
/// scalars.
///
/// Slice times are nondecreasing; equal times only occur for the
/// pre-/post-event pair around a surgery.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowHistory {
    pub slices: Vec<Slice>,
    pub events: Vec<Event>,
    pub scalars: Vec<ScalarRow>,
}

impl FlowHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_event(&mut self, time: f64, kind: EventKind, payload: impl Into<String>) {
        self.events.push(Event { time, kind, payload: payload.into() });
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events_of(kind).count()
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((self.slices.first()?.time, self.slices.last()?.time))
    }

    pub fn final_time(&self) -> Option<f64> {
        self.scalars.last().map(|r| r.time)
    }

    /// Largest step size recorded within `[t - window, t + window]`, or the
    /// overall largest one when nothing falls inside.
    pub fn local_dt(&self, t: f64, window: f64) -> f64 {
        let local = self
            .scalars
            .iter()
            .filter(|r| (r.time - t).abs() <= window)
            .map(|r| r.dt)
            .fold(0.0_f64, f64::max);
        if local > 0.0 {
            local
        } else {
            self.scalars.iter().map(|r| r.dt).fold(0.0_f64, f64::max)
        }
    }

    /// The recorded slice nearest in time to `t` (ties go to the later slice
    /// so that post-event states win).
    pub fn nearest_slice(&self, t: f64) -> Option<&Slice> {
        let mut best: Option<&Slice> = None;
        for s in &self.slices {
            match best {
                Some(b) if (s.time - t).abs() > (b.time - t).abs() => {}
                _ => best = Some(s),
            }
        }
        best
    }

    /// A history holding the given single-component slices (no scalars),
    /// sorted by time.
    pub fn from_geometries(items: impl IntoIterator<Item = (f64, Geometry)>) -> Self {
        let mut items: Vec<(f64, Geometry)> = items.into_iter().collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let slices = items
            .into_iter()
            .enumerate()
            .map(|(k, (time, geometry))| Slice {
                time,
                step: k as u64,
                tag: SliceTag::Regular,
                components: vec![Component { id: 0, geometry }],
            })
            .collect();
        Self { slices, ..Self::default() }
    }

    /// Parabolically rescaled copy: `x -> lambda (x - x0)`, `t -> lambda^2 (t - t0)`.
    /// Scalar rows keep their values; only times and steps are rescaled.
    pub fn parabolic_rescale(&self, center: SpacetimePoint, lambda: f64) -> Result<FlowHistory> {
        let l2 = lambda * lambda;
        let mut slices = Vec::with_capacity(self.slices.len());
        for s in &self.slices {
            let mut components = Vec::with_capacity(s.components.len());
            for c in &s.components {
                let (geometry, _) = c.geometry.parabolic_rescale(s.time, center, lambda)?;
                components.push(Component { id: c.id, geometry });
            }
            slices.push(Slice { time: l2 * (s.time - center.t0), step: s.step, tag: s.tag, components });
        }
        let scalars = self
            .scalars
            .iter()
            .map(|r| ScalarRow { time: l2 * (r.time - center.t0), dt: l2 * r.dt, ..*r })
            .collect();
        let events = self
            .events
            .iter()
            .map(|e| Event { time: l2 * (e.time - center.t0), ..e.clone() })
            .collect();
        Ok(FlowHistory { slices, events, scalars })
    }

    /// Appends another history (whose times start at or after ours).
    pub fn append(&mut self, other: FlowHistory) {
        self.slices.extend(other.slices);
        self.events.extend(other.events);
        self.scalars.extend(other.scalars);
    }
}
