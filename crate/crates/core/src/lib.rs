//! Numerical laboratory for mean curvature flow of planar curves and
//! axisymmetric hypersurfaces of revolution.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] discrete curves/profiles and their pointwise curvature data,
//! * [`exact`] closed-form solutions and parameterised initial data,
//! * [`flow`] explicit time integration, remeshing and history recording,
//! * [`diagnostics`] Gaussian density ratios, noncollapsing and convexity monitors,
//! * [`surgery`] neck detection, cap replacement and the flow-with-surgery loop,
//! * [`io`] snapshot/CSV formats, experiment configs and command drivers.
//!
//! Per-vertex work goes through [`par`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise. Every reduction is done
//! sequentially in index order, so results do not depend on the thread count.

// `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod par;
pub mod surgery;

pub use error::{McfError, Result};
pub use geometry::{AxisymProfile, Closure, Geometry, Point, PolyCurve, QuantityField, SpacetimePoint};
