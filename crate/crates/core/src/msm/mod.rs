//! Multi-scale markers (MSMs).
//!
//! An MSM is one square pattern projected several times, each time scaled
//! about the same projector point `p`. Cameras that cannot resolve one scale
//! resolve another, and because the imaged diagonal intersection is a
//! projective invariant every detected scale yields the same imaged center.
//! These centers are the correspondences the solver works with.

mod center;
mod fusion;
mod observations;
mod pattern;
mod schedule;

pub use center::center_from_square_corners;
pub use fusion::{fuse_detections, DetectionGeometry, RawDetection, CONSISTENCY_GATE_PX};
pub use observations::{CameraId, Observation, ObservationSet, PointId};
pub use pattern::{build_msm_definition, MsmDefinition, PatternKind, PatternSpec, Placement, ProjectorImage, ScaleSet};
pub use schedule::{generate_schedule, GridSpec, ProjectionSchedule, ScheduleSpec, ScheduleStep};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MsmError {
    #[error("scale factors must be positive and strictly increasing")]
    InvalidScales,
    #[error("invalid pattern: {0}")]
    InvalidPattern(&'static str),
    #[error("pattern kind {0:?} is not supported")]
    UnsupportedPattern(PatternKind),
    #[error("marker at ({x}, {y}) scaled by {scale} leaves the projector image")]
    OutOfBounds { x: f64, y: f64, scale: f64 },
    #[error("{arrays} arrays of {per_array} markers do not tile a {rows}x{cols} grid")]
    ShapeMismatch { arrays: usize, per_array: usize, rows: usize, cols: usize },
    #[error("corner quad is degenerate")]
    DegenerateQuad,
    #[error("step {0} is not part of the schedule")]
    UnknownStep(u32),
    #[error("marker {marker} at scale {scale_index} is not shown in step {step}")]
    InconsistentDetection { step: u32, marker: u32, scale_index: usize },
    #[error("observation for camera {camera} and point {point} already present")]
    DuplicateObservation { camera: u32, point: u32 },
    #[error("observation weight {0} outside (0, 1]")]
    InvalidWeight(f64),
}
