//! Experiment configuration: flat `key = value` lines grouped in `[section]`s.
//!
//! `#` starts a comment. `[probe]` may repeat; every other section appears at
//! most once. Unknown sections and keys are rejected.

use crate::diagnostics::DensityProbe;
use crate::error::{McfError, Result};
use crate::exact::{self, BulbChain, DumbbellSpec, Neck};
use crate::flow::{EngineConfig, SpacingMode, StopCriterion};
use crate::geometry::{Geometry, Point, SpacetimePoint, SpacingRule};
use crate::surgery::{RunLimits, SurgeryParams};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Initial geometry of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    /// Round `S^n` of the given radius (a circle for `n = 1`).
    Sphere { radius: f64, n: usize, count: usize },
    Ellipse { a: f64, b: f64, count: usize },
    Ellipsoid { a: f64, b: f64, n: usize, count: usize },
    GrimReaper { p_max: f64, count: usize },
    Dumbbell { spec: DumbbellSpec, n: usize, count: usize },
    Chain { chain: BulbChain, n: usize, count: usize },
    /// Concentric circles about the origin, one component each.
    Circles { radii: Vec<f64>, count: usize },
    Snapshot(PathBuf),
}

impl GeometrySpec {
    /// Initial components and start time.
    pub fn build_components(&self) -> Result<(Vec<Geometry>, f64)> {
        if let GeometrySpec::Circles { radii, count } = self {
            let circles = radii.iter().map(|r| exact::circle(Point::zeros(), *r, *count).map(Into::into));
            return Ok((circles.collect::<Result<_>>()?, 0.0));
        }
        let (g, t0) = self.build()?;
        Ok((vec![g], t0))
    }

    /// The initial geometry of a single-component preset.
    pub fn build(&self) -> Result<(Geometry, f64)> {
        Ok(match self {
            GeometrySpec::Sphere { radius, n, count } => {
                (exact::sphere_at(&exact::SphereSolution::new(*radius, *n), 0.0, *count)?, 0.0)
            }
            GeometrySpec::Ellipse { a, b, count } => (exact::ellipse(*a, *b, *count)?.into(), 0.0),
            GeometrySpec::Ellipsoid { a, b, n, count } => (exact::ellipsoid_profile(*a, *b, *n, *count)?.into(), 0.0),
            GeometrySpec::GrimReaper { p_max, count } => {
                (exact::grim_reaper(0.0, &exact::grim_reaper_grid(*p_max, *count))?.into(), 0.0)
            }
            GeometrySpec::Dumbbell { spec, n, count } => (exact::dumbbell(spec, *n, *count)?.into(), 0.0),
            GeometrySpec::Chain { chain, n, count } => (chain.profile(*n, *count)?.into(), 0.0),
            GeometrySpec::Snapshot(path) => super::snapshot::read_snapshot(path)?,
            GeometrySpec::Circles { .. } => {
                return Err(McfError::InvalidSpec("concentric circles form several components".into()))
            }
        })
    }
}

/// A fully parsed experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub engine: EngineConfig,
    pub stops: Vec<StopCriterion>,
    pub probes: Vec<DensityProbe>,
    pub surgery: Option<(SurgeryParams, RunLimits)>,
    pub out_dir: PathBuf,
    pub frames: bool,
    pub seed: u64,
}

type Entries = BTreeMap<String, (String, usize)>;

/// Key access that remembers which keys were used.
struct Section<'a> {
    name: &'a str,
    entries: Entries,
}

impl Section<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> McfError {
        McfError::Config { key: format!("{}.{key}", self.name), message: message.into() }
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => match v.as_str() {
                "inf" | "infinity" => Ok(Some(f64::INFINITY)),
                _ => v.parse().map(Some).map_err(|_| self.err(key, format!("line {line}: expected a number, got {v:?}"))),
            },
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_req(&mut self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| self.err(key, "missing"))
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = match default {
            Some(d) => self.f64_or(key, d)?,
            None => self.f64_req(key)?,
        };
        if !(v > 0.0) {
            return Err(self.err(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn uint_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| self.err(key, format!("line {line}: expected an integer, got {v:?}"))),
        }
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(self.err(key, format!("line {line}: expected true/false, got {v:?}"))),
            },
        }
    }

    fn list_opt(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map(Some)
                .map_err(|_| self.err(key, format!("line {line}: expected a comma-separated list, got {v:?}"))),
        }
    }

    fn string_opt(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| v)
    }

    /// Fails on the first key that was never read.
    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            Some((k, (_, line))) => Err(McfError::Config {
                key: format!("{}.{k}", self.name),
                message: format!("line {line}: unknown key"),
            }),
            None => Ok(()),
        }
    }
}

const SECTIONS: [&str; 6] = ["geometry", "engine", "stop", "probe", "surgery", "output"];

fn split_sections(text: &str) -> Result<Vec<(String, Entries)>> {
    let mut out: Vec<(String, Entries)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(McfError::Config { key: name.into(), message: format!("line {line_no}: unknown section") });
            }
            if name != "probe" && out.iter().any(|(n, _)| n == name) {
                return Err(McfError::Config { key: name.into(), message: format!("line {line_no}: duplicate section") });
            }
            out.push((name.to_string(), Entries::new()));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(McfError::Config { key: line.into(), message: format!("line {line_no}: expected key = value") });
        };
        let key = key.trim();
        let Some((section, entries)) = out.last_mut() else {
            return Err(McfError::Config { key: key.into(), message: format!("line {line_no}: key outside any section") });
        };
        if entries.insert(key.to_string(), (value.trim().to_string(), line_no)).is_some() {
            return Err(McfError::Config { key: format!("{section}.{key}"), message: format!("line {line_no}: duplicate key") });
        }
    }
    Ok(out)
}

fn take<'a>(sections: &mut Vec<(String, Entries)>, name: &'a str) -> Option<Section<'a>> {
    let k = sections.iter().position(|(n, _)| n == name)?;
    Some(Section { name, entries: sections.remove(k).1 })
}

fn geometry_section(mut s: Section<'_>, base: &Path) -> Result<GeometrySpec> {
    let preset = s.string_opt("preset").ok_or_else(|| s.err("preset", "missing"))?;
    let count = s.uint_or("count", 256)? as usize;
    let n = s.uint_or("n", 1)? as usize;
    let spec = match preset.as_str() {
        "sphere" | "circle" => GeometrySpec::Sphere { radius: s.positive("radius", Some(1.0))?, n, count },
        "ellipse" => GeometrySpec::Ellipse { a: s.positive("a", None)?, b: s.positive("b", None)?, count },
        "ellipsoid" => GeometrySpec::Ellipsoid { a: s.positive("a", None)?, b: s.positive("b", None)?, n, count },
        "grim-reaper" => GeometrySpec::GrimReaper { p_max: s.positive("p_max", Some(1.45))?, count },
        "dumbbell" => {
            let mut spec = DumbbellSpec::new(
                s.positive("bulb", Some(1.0))?,
                s.positive("neck", Some(0.2))?,
                s.positive("halflength", Some(1.5))?,
            );
            spec.smoothing = s.positive("smoothing", Some(spec.smoothing))?;
            GeometrySpec::Dumbbell { spec, n, count }
        }
        "bulb-chain" => {
            let bulbs = s.list_opt("bulbs")?.ok_or_else(|| s.err("bulbs", "missing"))?;
            let radii = s.list_opt("necks")?.ok_or_else(|| s.err("necks", "missing"))?;
            let halflength = s.positive("halflength", Some(1.5))?;
            let smoothing = s.positive("smoothing", Some(0.6))?;
            let necks = radii.into_iter().map(|radius| Neck { radius, halflength }).collect();
            GeometrySpec::Chain { chain: BulbChain { bulbs, necks, smoothing }, n, count }
        }
        "circles" => {
            let radii = s.list_opt("radii")?.ok_or_else(|| s.err("radii", "missing"))?;
            if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
                return Err(s.err("radii", "expected positive radii"));
            }
            GeometrySpec::Circles { radii, count }
        }
        "snapshot" => {
            let file = s.string_opt("file").ok_or_else(|| s.err("file", "missing"))?;
            let path = base.join(file);
            if !path.is_file() {
                return Err(s.err("file", format!("no such file: {}", path.display())));
            }
            GeometrySpec::Snapshot(path)
        }
        "cylinder" => return Err(s.err("preset", "cylinders are noncompact; use the oracle command")),
        other => return Err(s.err("preset", format!("unknown preset {other:?}"))),
    };
    s.finish()?;
    Ok(spec)
}

fn engine_section(mut s: Section<'_>) -> Result<EngineConfig> {
    let d = EngineConfig::default();
    let cfl = s.f64_or("cfl", d.cfl)?;
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(s.err("cfl", format!("must lie in (0, 1], got {cfl}")));
    }
    let spacing = match s.string_opt("spacing").as_deref() {
        None | Some("uniform") => SpacingMode::Uniform,
        Some("adaptive") => {
            let mut rule = SpacingRule::new(s.positive("resolution", Some(8.0))?, s.positive("h_max", Some(0.05))?);
            rule.h_min = s.positive("h_min", Some(rule.h_min))?;
            SpacingMode::Adaptive(rule)
        }
        Some(other) => return Err(s.err("spacing", format!("expected uniform or adaptive, got {other:?}"))),
    };
    let dense_window = match s.list_opt("dense_window")? {
        None => None,
        Some(v) if v.len() == 2 && v[0] <= v[1] => Some((v[0], v[1])),
        Some(_) => return Err(s.err("dense_window", "expected two increasing times")),
    };
    let cfg = EngineConfig {
        cfl,
        remesh_ratio: s.f64_or("remesh_ratio", d.remesh_ratio)?,
        spacing,
        coarsen: s.bool_or("coarsen", d.coarsen)?,
        min_vertices: s.uint_or("min_vertices", d.min_vertices as u64)? as usize,
        record_stride: s.uint_or("record_stride", d.record_stride)?,
        scalar_stride: s.uint_or("scalar_stride", d.scalar_stride)?.max(1),
        dense_window,
        trail: None,
        alpha_stride: s.uint_or("alpha_stride", d.alpha_stride)?,
        max_steps: s.uint_or("max_steps", d.max_steps)?,
    };
    if !(cfg.remesh_ratio > 1.0) {
        return Err(s.err("remesh_ratio", "must exceed 1"));
    }
    s.finish()?;
    Ok(cfg)
}

fn stop_section(mut s: Section<'_>) -> Result<Vec<StopCriterion>> {
    let mut stops = Vec::new();
    if let Some(v) = s.f64_opt("horizon")? {
        stops.push(StopCriterion::Horizon(v));
    }
    if let Some(v) = s.f64_opt("extinction")? {
        stops.push(StopCriterion::Extinction(v));
    }
    if let Some(v) = s.f64_opt("blowup")? {
        stops.push(StopCriterion::Blowup(v));
    }
    if let Some(v) = s.f64_opt("trigger")? {
        stops.push(StopCriterion::Trigger(v));
    }
    if stops.is_empty() {
        return Err(s.err("horizon", "at least one stop criterion is required"));
    }
    s.finish()?;
    Ok(stops)
}

fn probe_section(mut s: Section<'_>) -> Result<DensityProbe> {
    let center = SpacetimePoint::new(s.f64_or("x", 0.0)?, s.f64_or("y", 0.0)?, s.f64_req("t0")?);
    let rho = s.positive("rho", Some(f64::INFINITY))?;
    let probe = match s.list_opt("radii")? {
        Some(r) => DensityProbe::new(center, rho, r)?,
        None => DensityProbe::geometric(
            center,
            rho,
            s.positive("r_min", Some(0.01))?,
            s.positive("r_max", Some(0.5))?,
            s.uint_or("count", 16)? as usize,
        )?,
    };
    s.finish()?;
    Ok(probe)
}

fn surgery_section(mut s: Section<'_>, stops: &[StopCriterion]) -> Result<(SurgeryParams, RunLimits)> {
    let d = SurgeryParams::default();
    let p = SurgeryParams {
        alpha: s.f64_or("alpha", d.alpha)?,
        beta: s.f64_or("beta", d.beta)?,
        gamma: s.f64_or("gamma", d.gamma)?,
        delta: s.f64_or("delta", d.delta)?,
        h_th: s.f64_or("h_th", d.h_th)?,
        h_neck: s.f64_or("h_neck", d.h_neck)?,
        h_trig: s.f64_or("h_trig", d.h_trig)?,
        cap_scale: s.f64_or("cap_scale", d.cap_scale)?,
        mu: s.f64_or("mu", d.mu)?,
    };
    p.validate().map_err(|e| s.err("delta", e.to_string()))?;
    let horizon = stops.iter().find_map(|c| if let StopCriterion::Horizon(t) = c { Some(*t) } else { None });
    let extinction = stops.iter().find_map(|c| if let StopCriterion::Extinction(a) = c { Some(*a) } else { None });
    let limits = RunLimits {
        horizon: horizon.unwrap_or(f64::INFINITY),
        extinction_area: extinction.unwrap_or(1e-8),
    };
    s.finish()?;
    Ok((p, limits))
}

/// Parses a configuration; relative file names resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut sections = split_sections(text)?;
    let geometry = geometry_section(
        take(&mut sections, "geometry").ok_or_else(|| McfError::Config { key: "geometry".into(), message: "missing section".into() })?,
        base,
    )?;
    let engine = match take(&mut sections, "engine") {
        Some(s) => engine_section(s)?,
        None => EngineConfig::default(),
    };
    let stops = match take(&mut sections, "stop") {
        Some(s) => stop_section(s)?,
        None => return Err(McfError::Config { key: "stop".into(), message: "missing section".into() }),
    };
    let surgery = match take(&mut sections, "surgery") {
        Some(s) => Some(surgery_section(s, &stops)?),
        None => None,
    };
    let (out_dir, frames, seed) = match take(&mut sections, "output") {
        Some(mut s) => {
            let dir = s.string_opt("dir").map(|d| base.join(d)).unwrap_or_else(|| base.join("out"));
            let frames = s.bool_or("frames", false)?;
            let seed = s.uint_or("seed", 0)?;
            s.finish()?;
            (dir, frames, seed)
        }
        None => (base.join("out"), false, 0),
    };
    let mut probes = Vec::new();
    while let Some(s) = take(&mut sections, "probe") {
        probes.push(probe_section(s)?);
    }
    Ok(ExperimentConfig { geometry, engine, stops, probes, surgery, out_dir, frames, seed })
}

/// Parses a file holding only `[probe]` sections.
pub fn parse_probes(text: &str) -> Result<Vec<DensityProbe>> {
    let mut sections = split_sections(text)?;
    let mut probes = Vec::new();
    while let Some(s) = take(&mut sections, "probe") {
        probes.push(probe_section(s)?);
    }
    if let Some((name, _)) = sections.first() {
        return Err(McfError::Config { key: name.clone(), message: "only [probe] sections are allowed here".into() });
    }
    Ok(probes)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}
