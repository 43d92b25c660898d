//! Pinhole camera model, pose algebra and the minimal solvers used by the
//! calibration pipeline.
//!
//! Observations are undistorted pixels; there is no lens distortion model.
//! Poses map world coordinates into the camera frame (`x_cam = R X + t`),
//! with the camera looking down its +z axis, x right and y down.

pub(crate) mod camera;
mod homography;
mod pnp;
mod pose;
mod ransac;
mod rig;
mod triangulation;

pub use camera::{project, CameraIntrinsics, NormalizedPoint, PixelPoint, ScenePoint};
pub use homography::{
    decompose_homography, estimate_homography_ransac, homography_dlt, homography_motion_candidates,
    Homography, HomographyMotion, MIN_HOMOGRAPHY_CONSENSUS,
};

pub use pnp::{refine_pose, solve_pnp_ransac, PnpSolution};
pub use pose::Pose;
pub use ransac::{RansacConfig, DEFAULT_CONFIDENCE, DEFAULT_MAX_ITERATIONS};
pub use rig::{CameraRig, RigCamera};
pub use triangulation::{triangulate_normalized, triangulate_two_view};

use thiserror::Error;

/// Failures of the geometric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("point has non-positive depth {depth} in the camera frame")]
    NonPositiveDepth { depth: f64 },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("need at least {needed} matches, got {got}")]
    InsufficientMatches { needed: usize, got: usize },
    #[error("no consensus: best model has {inliers} inliers, {required} required")]
    NoConsensus { inliers: usize, required: usize },
    #[error("homography decomposition is ambiguous ({best} vs {second} points in front)")]
    AmbiguousDecomposition { best: usize, second: usize },
    #[error("homography matrix is singular")]
    SingularHomography,
}
