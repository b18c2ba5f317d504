//! B-spline / NURBS kernel.
//!
//! Everything here works on clamped knot vectors. Curves are non-rational
//! B-splines of arbitrary degree (cubic in practice); surfaces are NURBS
//! with per-control-point weights, which reduces to a B-spline surface for
//! the unit-weight extruded surfaces used by the reconstruction.

mod curve;
mod intersect;
mod inversion;
mod knots;
mod merge;
mod pipe;
mod surface;

pub use curve::{chord_length_params, BSplineCurve, BSplineCurve2, BSplineCurve3, ParamCurve3};
pub use intersect::{
    intersect_surfaces, surface_distance_brute_force, IntersectParams, IntersectionOutcome,
    TracedBranch,
};
pub use inversion::point_inversion;
pub use knots::{basis, KnotVector};
pub use merge::{merge_c1, resample};
pub use pipe::{pipe_surface, tessellate_closed_v, unit_circle_polygon, TriMesh};
pub use surface::{extrude_surface, NurbsSurface};

/// Errors raised by the spline kernel.
#[derive(Debug, thiserror::Error)]
pub enum SplineError {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("need at least {needed} points to fit {ctrl} control points, got {got}")]
    InsufficientPoints {
        needed: usize,
        got: usize,
        ctrl: usize,
    },
    #[error("chain is degenerate (all points coincident)")]
    DegenerateChain,
    #[error("parameter ({0}, {1}) outside the surface domain")]
    DomainViolation(f64, f64),
    #[error("extrusion source lies on the curve plane")]
    SourceOnPlane,
    #[error("join gap {gap:.3} mm exceeds tolerance {tol:.3} mm")]
    JoinGapTooLarge { gap: f64, tol: f64 },
    #[error("axis tangent vanishes at parameter {0}")]
    VanishingTangent(f64),
    #[error("basis index {index} out of range for {count} basis functions")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("control net is inconsistent: {0}")]
    InvalidNet(String),
    #[error("geometry parse error: {0}")]
    Parse(String),
}
