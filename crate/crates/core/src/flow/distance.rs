use super::FlowState;
use crate::geometry::{polyline, Geometry};
use crate::par;

/// Smallest distance between the two discrete hypersurfaces.
///
/// Curves are compared segment against segment. Two hypersurfaces of
/// revolution about the same axis are closest along a common meridian, so
/// their distance is the planar distance between the profiles.
pub fn pair_distance(a: &FlowState, b: &FlowState) -> f64 {
    geometry_distance(&a.geometry, &b.geometry)
}

pub fn geometry_distance(a: &Geometry, b: &Geometry) -> f64 {
    assert_eq!(a.dimension(), b.dimension(), "pair_distance needs equal dimensions");
    let (pa, ea) = (a.points(), a.ends());
    let (pb, eb) = (b.points(), b.ends());
    let mb = polyline::edge_count(pb.len(), eb);
    let per_edge = par::map_indexed(polyline::edge_count(pa.len(), ea), |e| {
        let (p, q) = polyline::edge(pa, ea, e);
        (0..mb).fold(f64::INFINITY, |best, f| {
            let (r, s) = polyline::edge(pb, eb, f);
            best.min(polyline::segment_distance(p, q, r, s))
        })
    });
    per_edge.into_iter().fold(f64::INFINITY, f64::min)
}
