//! Incremental external calibration.
//!
//! The pipeline selects the camera pair whose shared correspondences are
//! best spread over both images, recovers its relative motion from the
//! floor-induced homography, then grows the reconstruction one camera at a
//! time by PnP against triangulated marker centers. Bundle adjustment runs
//! after the pair initialization, after every registration and once more at
//! the end.
//!
//! Gauge: the first camera of the initial pair sits at the identity pose and
//! the second one at unit distance from it.

mod bundle;
mod calibrate;
mod graph;
mod init;
mod reconstruction;
mod register;
mod score;

pub use bundle::{bundle_adjust, max_jacobian_deviation, BundleMode, BundleSummary};
pub use calibrate::calibrate;
pub use graph::CorrespondenceGraph;
pub use init::{initialize_pair, rank_initial_pairs, select_initial_pair, MIN_PAIR_PARALLAX_DEG};
pub use reconstruction::{Gauge, PlaneFrame, Reconstruction, ReprojectionStats};
pub use register::{register_next_camera, triangulate_tracks, MIN_TRIANGULATION_ANGLE_DEG};
pub use score::{compute_view_score, PYRAMID_LEVELS};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::msm::CameraId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no camera pair shares enough correspondences")]
    NoValidPair,
    #[error("initialization failed: {0}")]
    InitializationFailed(GeometryError),
    #[error("no remaining camera can be registered")]
    NoRegistrableCamera,
    #[error("bundle adjustment produced a non-finite cost")]
    NonConvergence,
    #[error("no intrinsics for camera {0}")]
    MissingIntrinsics(CameraId),
    #[error("invalid solver options: {0}")]
    InvalidOptions(&'static str),
}

/// Penalty applied to each reprojection residual norm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Loss {
    Squared,
    /// Quadratic up to `scale` pixels, linear beyond.
    Huber { scale: f64 },
}

/// How the two view scores of a candidate pair are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PairScore {
    Min,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverOptions {
    pub ransac_threshold_px: f64,
    pub min_pair_matches: usize,
    pub pnp_min_inliers: usize,
    pub triangulation_max_reproj_px: f64,
    /// Relative cost decrease below which bundle adjustment stops.
    pub ba_tolerance: f64,
    pub ba_max_iterations: usize,
    /// Iteration cap for the bundle adjustment after each registration.
    pub intermediate_ba_iterations: usize,
    pub loss: Loss,
    /// Constrain all points to one jointly optimized plane.
    pub coplanar: bool,
    pub pair_score: PairScore,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ransac_threshold_px: 3.0,
            min_pair_matches: 50,
            pnp_min_inliers: 6,
            triangulation_max_reproj_px: 4.0,
            ba_tolerance: 1e-8,
            ba_max_iterations: 100,
            intermediate_ba_iterations: 25,
            loss: Loss::Squared,
            coplanar: false,
            pair_score: PairScore::Min,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.ransac_threshold_px) || !positive(self.triangulation_max_reproj_px) {
            return Err(SolverError::InvalidOptions("pixel thresholds must be positive"));
        }
        if self.min_pair_matches < 4 || self.pnp_min_inliers < 6 {
            return Err(SolverError::InvalidOptions("match minimums are below the solver sample sizes"));
        }
        if !(self.ba_tolerance >= 0.0) || self.ba_max_iterations == 0 {
            return Err(SolverError::InvalidOptions("bundle adjustment needs a tolerance and iterations"));
        }
        if let Loss::Huber { scale } = self.loss {
            if !positive(scale) {
                return Err(SolverError::InvalidOptions("Huber scale must be positive"));
            }
        }
        Ok(())
    }
}
