//! CSV outputs and the on-disk layout of a run.
//!
//! A run directory holds `dense_scalars.csv`, `events.csv` and
//! `snapshots/` with one snapshot per component and slice plus
//! `snapshots/index.csv`. Floats are written in shortest round-trip form.

use super::snapshot::{format_snapshot, read_snapshot};
use crate::diagnostics::{DensityProbe, MonotonicityReport, TangentClass};
use crate::error::{McfError, Result};
use crate::flow::{Component, Event, EventKind, FlowHistory, ScalarRow, Slice, SliceTag};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const SCALARS_FILE: &str = "dense_scalars.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const INDEX_FILE: &str = "index.csv";

pub const SCALARS_HEADER: &str = "time,area,volume,max_h,min_h,min_l1h,alpha,h2_integral,dt";
pub const EVENTS_HEADER: &str = "time,kind,payload";
pub const INDEX_HEADER: &str = "slice,step,time,tag,component,file";
pub const PROBE_HEADER: &str = "probe,x,y,t0,rho,r,theta,defect,violation";
pub const ANDREWS_VERTEX_HEADER: &str = "component,vertex,Zstar,Zlower,H,ratio";
pub const ANDREWS_HEADER: &str = "time,component,alpha,alpha_interior,alpha_exterior";

fn tag_str(t: SliceTag) -> &'static str {
    match t {
        SliceTag::Regular => "regular",
        SliceTag::PreEvent => "pre_event",
        SliceTag::PostEvent => "post_event",
    }
}

fn parse_tag(s: &str) -> Result<SliceTag> {
    match s {
        "regular" => Ok(SliceTag::Regular),
        "pre_event" => Ok(SliceTag::PreEvent),
        "post_event" => Ok(SliceTag::PostEvent),
        _ => Err(McfError::Parse(format!("unknown slice tag {s:?}"))),
    }
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| McfError::Parse(format!("bad number {s:?}")))
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = &'a str>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => Ok(lines.filter(|l| !l.is_empty())),
        other => Err(McfError::Parse(format!("expected header {header:?}, found {other:?}"))),
    }
}

pub fn scalars_csv(rows: &[ScalarRow]) -> String {
    let mut out = String::from(SCALARS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            r.time, r.area, r.volume, r.max_h, r.min_h, r.min_l1h, r.alpha, r.h2_integral, r.dt
        );
    }
    out
}

pub fn parse_scalars(text: &str) -> Result<Vec<ScalarRow>> {
    rows(text, SCALARS_HEADER)?
        .map(|line| {
            let v = line.split(',').map(num).collect::<Result<Vec<f64>>>()?;
            if v.len() != 9 {
                return Err(McfError::Parse(format!("scalar row needs 9 fields: {line:?}")));
            }
            Ok(ScalarRow {
                time: v[0],
                area: v[1],
                volume: v[2],
                max_h: v[3],
                min_h: v[4],
                min_l1h: v[5],
                alpha: v[6],
                h2_integral: v[7],
                dt: v[8],
            })
        })
        .collect()
}

pub fn events_csv(events: &[Event]) -> String {
    let mut out = String::from(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(out, "{:?},{},{}", e.time, e.kind, e.payload.replace('\n', " "));
    }
    out
}

pub fn parse_events(text: &str) -> Result<Vec<Event>> {
    rows(text, EVENTS_HEADER)?
        .map(|line| {
            let mut it = line.splitn(3, ',');
            let (Some(t), Some(k)) = (it.next(), it.next()) else {
                return Err(McfError::Parse(format!("bad event row {line:?}")));
            };
            let kind = EventKind::parse(k).ok_or_else(|| McfError::Parse(format!("unknown event kind {k:?}")))?;
            Ok(Event { time: num(t)?, kind, payload: it.next().unwrap_or("").to_string() })
        })
        .collect()
}

/// Writes the complete history into `dir` (created if missing).
pub fn write_history(dir: &Path, h: &FlowHistory) -> Result<()> {
    let snaps = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snaps)?;
    fs::write(dir.join(SCALARS_FILE), scalars_csv(&h.scalars))?;
    fs::write(dir.join(EVENTS_FILE), events_csv(&h.events))?;
    let mut index = String::from(INDEX_HEADER);
    index.push('\n');
    for (k, s) in h.slices.iter().enumerate() {
        for c in &s.components {
            let name = format!("s{k:06}_c{:03}.txt", c.id);
            fs::write(snaps.join(&name), format_snapshot(&c.geometry, s.time))?;
            let _ = writeln!(index, "{k},{},{:?},{},{},{name}", s.step, s.time, tag_str(s.tag), c.id);
        }
    }
    fs::write(snaps.join(INDEX_FILE), index)?;
    Ok(())
}

/// Reads a history written by [`write_history`].
pub fn read_history(dir: &Path) -> Result<FlowHistory> {
    let scalars = parse_scalars(&fs::read_to_string(dir.join(SCALARS_FILE))?)?;
    let events = parse_events(&fs::read_to_string(dir.join(EVENTS_FILE))?)?;
    let snaps = dir.join(SNAPSHOT_DIR);
    let index = fs::read_to_string(snaps.join(INDEX_FILE))?;
    let mut slices: Vec<Slice> = Vec::new();
    let mut last: Option<usize> = None;
    for line in rows(&index, INDEX_HEADER)? {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(McfError::Parse(format!("bad index row {line:?}")));
        }
        let k: usize = f[0].parse().map_err(|_| McfError::Parse(format!("bad slice index {:?}", f[0])))?;
        let step: u64 = f[1].parse().map_err(|_| McfError::Parse(format!("bad step {:?}", f[1])))?;
        let id: usize = f[4].parse().map_err(|_| McfError::Parse(format!("bad component {:?}", f[4])))?;
        let (geometry, _) = read_snapshot(&snaps.join(f[5]))?;
        if last != Some(k) {
            slices.push(Slice { time: num(f[2])?, step, tag: parse_tag(f[3])?, components: Vec::new() });
            last = Some(k);
        }
        slices.last_mut().expect("pushed").components.push(Component { id, geometry });
    }
    Ok(FlowHistory { slices, events, scalars })
}

/// One row per probe radius; `violation` is `Theta(r_k) - Theta(r_(k+1))`.
pub fn probe_csv(results: &[(usize, &DensityProbe, &MonotonicityReport)]) -> String {
    let mut out = String::from(PROBE_HEADER);
    out.push('\n');
    for (k, p, report) in results {
        let c = p.center;
        for (((r, theta), defect), v) in report.series.iter().zip(&report.defect_series).zip(report.violations()) {
            let _ = writeln!(
                out,
                "{k},{:?},{:?},{:?},{:?},{r:?},{theta:?},{defect:?},{v:?}",
                c.x0.x, c.x0.y, c.t0, p.cutoff_scale
            );
        }
    }
    out
}

pub fn classification_csv(results: &[(usize, TangentClass)]) -> String {
    let mut out = String::from("probe,label,density,confidence\n");
    for (k, c) in results {
        let _ = writeln!(out, "{k},{},{:?},{:?}", c.label, c.density_value, c.confidence);
    }
    out
}

pub fn andrews_csv(h: &FlowHistory) -> Result<String> {
    let mut out = String::from(ANDREWS_HEADER);
    out.push('\n');
    for s in &h.slices {
        for c in &s.components {
            let r = crate::diagnostics::andrews_quantities(&c.geometry)?;
            let _ = writeln!(out, "{:?},{},{:?},{:?},{:?}", s.time, c.id, r.alpha, r.alpha_interior, r.alpha_exterior);
        }
    }
    Ok(out)
}

/// Per-vertex noncollapsing data of one slice. `ratio` is the largest
/// admissible alpha at the vertex (`inf` where neither bound applies).
pub fn andrews_vertex_csv(slice: &Slice) -> Result<String> {
    let mut out = String::from(ANDREWS_VERTEX_HEADER);
    out.push('\n');
    for c in &slice.components {
        let r = crate::diagnostics::andrews_quantities(&c.geometry)?;
        for (i, h) in r.h.iter().enumerate() {
            let inner = if r.z_star[i] > 0.0 { h / r.z_star[i] } else { f64::INFINITY };
            let outer = if r.z_lower[i] < 0.0 { h / -r.z_lower[i] } else { f64::INFINITY };
            let _ = writeln!(out, "{},{i},{:?},{:?},{h:?},{:?}", c.id, r.z_star[i], r.z_lower[i], inner.min(outer));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::flow::{evolve, EngineConfig, FlowState, StopCriterion};
    use crate::geometry::Point;

    #[test]
    fn history_round_trip() {
        let cfg = EngineConfig { record_stride: 20, ..EngineConfig::default() };
        let h = evolve(
            FlowState::new(exact::circle(Point::zeros(), 1.0, 64).unwrap(), 0.0),
            &[StopCriterion::Horizon(0.05)],
            &cfg,
        );
        let dir = tempfile::tempdir().unwrap();
        write_history(dir.path(), &h).unwrap();
        let back = read_history(dir.path()).unwrap();
        assert_eq!(back.slices, h.slices);
        assert_eq!(back.events, h.events);
        assert_eq!(back.scalars.len(), h.scalars.len());
        for (a, b) in back.scalars.iter().zip(&h.scalars) {
            assert_eq!(a.time.to_bits(), b.time.to_bits());
            assert_eq!(a.alpha.is_nan(), b.alpha.is_nan());
        }
        let again = tempfile::tempdir().unwrap();
        write_history(again.path(), &back).unwrap();
        for f in [SCALARS_FILE, EVENTS_FILE] {
            assert_eq!(fs::read(dir.path().join(f)).unwrap(), fs::read(again.path().join(f)).unwrap());
        }
    }

    #[test]
    fn event_payload_keeps_commas() {
        let e = vec![Event { time: 0.5, kind: EventKind::Surgery, payload: "0.1,0.01,0.02,2".into() }];
        assert_eq!(parse_events(&events_csv(&e)).unwrap(), e);
        assert!(parse_events("bogus\n").is_err());
    }
}
