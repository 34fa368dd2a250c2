//! Plain-text geometry snapshots.
//!
//! ```text
//! MCFLAB v1 <kind> <n> <N> <time>
//! x0 y0
//! ...
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! bits, so write, read, write is byte-identical.

use crate::error::{McfError, Result};
use crate::geometry::{AxisymProfile, Closure, Geometry, Point, PolyCurve};
use std::fmt::Write as _;
use std::path::Path;

pub const SNAPSHOT_MAGIC: &str = "MCFLAB";
pub const SNAPSHOT_VERSION: &str = "v1";

pub fn format_snapshot(g: &Geometry, time: f64) -> String {
    let pts = g.points();
    let mut out = String::with_capacity(48 * (pts.len() + 1));
    let _ = writeln!(out, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} {} {} {} {time:?}", g.kind_tag(), g.dimension(), pts.len());
    for p in pts {
        let _ = writeln!(out, "{:?} {:?}", p.x, p.y);
    }
    out
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| McfError::Parse(format!("bad {what}: {s:?}")))
}

pub fn parse_snapshot(text: &str) -> Result<(Geometry, f64)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| McfError::Parse("empty snapshot".into()))?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 6 || f[0] != SNAPSHOT_MAGIC {
        return Err(McfError::Parse(format!("bad snapshot header: {header:?}")));
    }
    if f[1] != SNAPSHOT_VERSION {
        return Err(McfError::Parse(format!("unsupported snapshot version {}", f[1])));
    }
    let n: usize = f[3].parse().map_err(|_| McfError::Parse(format!("bad dimension {:?}", f[3])))?;
    let count: usize = f[4].parse().map_err(|_| McfError::Parse(format!("bad vertex count {:?}", f[4])))?;
    let time = parse_f64(f[5], "time")?;
    let mut pts = Vec::with_capacity(count);
    for line in lines {
        let mut it = line.split_whitespace();
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(McfError::Parse(format!("bad vertex line: {line:?}")));
        };
        pts.push(Point::new(parse_f64(x, "coordinate")?, parse_f64(y, "coordinate")?));
    }
    if pts.len() != count {
        return Err(McfError::Parse(format!("header announces {count} vertices, found {}", pts.len())));
    }
    let g: Geometry = match f[2] {
        "curve" => PolyCurve::closed(pts)?.into(),
        "curve-open" => PolyCurve::open(pts)?.into(),
        "axisym-open" => AxisymProfile::new(pts, n, Closure::AxisToAxis)?.into(),
        "axisym-loop" => AxisymProfile::new(pts, n, Closure::OffAxisLoop)?.into(),
        "axisym-segment" => AxisymProfile::new(pts, n, Closure::OpenSegment)?.into(),
        other => return Err(McfError::Parse(format!("unknown snapshot kind {other:?}"))),
    };
    if g.dimension() != n {
        return Err(McfError::Parse(format!("kind {} cannot have dimension {n}", f[2])));
    }
    Ok((g, time))
}

pub fn write_snapshot(path: &Path, g: &Geometry, time: f64) -> Result<()> {
    std::fs::write(path, format_snapshot(g, time))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Geometry, f64)> {
    parse_snapshot(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;

    #[test]
    fn round_trip_is_byte_identical() {
        let shapes: Vec<Geometry> = vec![
            exact::ellipse(2.0, 0.7, 97).unwrap().into(),
            exact::grim_reaper(0.3, &exact::grim_reaper_grid(1.4, 64)).unwrap().into(),
            exact::dumbbell(&exact::DumbbellSpec::new(1.0, 0.2, 1.5), 3, 300).unwrap().into(),
            exact::cylinder_at(&exact::CylinderSolution::new(0.5, 2, 1), 0.01, 2.0, 50).unwrap().into(),
        ];
        for g in shapes {
            let a = format_snapshot(&g, 0.1 + 0.2);
            let (back, t) = parse_snapshot(&a).unwrap();
            assert_eq!(t, 0.1 + 0.2);
            assert_eq!(back, g);
            assert_eq!(format_snapshot(&back, t), a);
        }
    }

    #[test]
    fn header_is_checked() {
        let g: Geometry = exact::circle(Point::zeros(), 1.0, 16).unwrap().into();
        let text = format_snapshot(&g, 0.0);
        assert!(text.starts_with("MCFLAB v1 curve 1 16 0.0\n"));
        assert!(parse_snapshot(&text.replace("v1", "v2")).is_err());
        assert!(parse_snapshot(&text.replace("curve", "blob")).is_err());
        assert!(parse_snapshot(&text.replace(" 16 ", " 17 ")).is_err());
    }
}
