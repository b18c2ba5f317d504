//! Reconstruction of 3D coronary vessel trees from two binary-segmented
//! X-ray angiography sequences acquired at different C-arm angles.
//!
//! The library is organised around the stages of the reconstruction
//! workflow:
//!
//! * [`camera`] — cone-beam C-arm projection geometry, ray casting and
//!   midpoint triangulation.
//! * [`raster`] — binary-mask processing: thinning, branch/end-point
//!   classification, chain extraction and vessel-width estimation.
//! * [`spline`] — B-spline/NURBS kernel: basis evaluation, least-squares
//!   curve fitting, extruded surfaces, surface–surface intersection,
//!   curve merging and pipe surfaces.
//! * [`matching`] — motion-phase matching between two videos and
//!   landmark correspondence between the selected frame pair.
//! * [`pipeline`] — the end-to-end reconstruction and its reprojection
//!   evaluation.
//! * [`phantom`] — synthetic ground-truth generator used for validation.

pub mod camera;
pub mod matching;
pub mod phantom;
pub mod pipeline;
pub mod raster;
pub mod spline;

pub use camera::{
    reconstruction_error, triangulate_midpoint, CArmPose, CameraError, ProjectionModel, Ray,
};
pub use matching::{
    match_landmarks, pair_branch_curves, phase_match, ChainPair, Correspondence, ErrorMatrix,
    LabeledChain, MatchError, PhaseMatch,
};
pub use phantom::{
    forward_project, generate_tree, simulate_videos, MotionModel, MotionTrace, PhantomError,
    PhantomTree, SimulatedVideos,
};
pub use pipeline::{
    evaluate_reprojection, reconstruct, PipelineError, ReconstructionInputs, ReconstructionOutcome,
    ReconstructionParams, ReprojectionReport, VesselBranch, VesselTree3D,
};
pub use raster::{
    classify_points, device_keypoint, extract_chains, radius_profile, thin, BinaryMask, ChainSet,
    DeviceKind, PixelChain, RasterError, Skeleton,
};
pub use spline::{
    basis, extrude_surface, intersect_surfaces, merge_c1, pipe_surface, point_inversion, resample,
    BSplineCurve, BSplineCurve2, BSplineCurve3, IntersectParams, KnotVector, NurbsSurface,
    ParamCurve3, SplineError,
};
