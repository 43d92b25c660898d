//! Accuracy and robustness metrics.
//!
//! Reconstructions live in an arbitrary similarity gauge, so every pose and
//! point comparison against ground truth goes through a Sim(3) estimated on
//! the camera centers.

mod align;
mod heldout;
mod metrics;
mod report;

pub use align::{align_cameras, umeyama_align, Sim3Transform};
pub use heldout::{heldout_reprojection, HeldoutReport};
pub use metrics::{pose_errors, success_rate, PoseErrors, SUCCESS_THRESHOLDS_PX};
pub use report::{evaluate, CameraReport, EvaluationInput, EvaluationReport, PointErrors};

use thiserror::Error;

use crate::msm::CameraId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("camera {0} is missing from one of the compared sets")]
    IdMismatch(CameraId),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("point sets differ in length ({source_len} vs {target_len})")]
    LengthMismatch { source_len: usize, target_len: usize },
    #[error("no held-out track is observed by two registered cameras")]
    NoEvaluableTracks,
}
