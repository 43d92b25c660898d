//! External calibration of multi-camera rigs from projected multi-scale
//! markers (MSMs).
//!
//! A ceiling projector paints arrays of square markers on the floor, each
//! displayed at several scales around a fixed center. Every camera detects
//! whichever scales it can resolve; the shared, scale-invariant centers give
//! 2D-2D correspondences across views with very different zoom levels. The
//! calibration itself is an incremental structure-from-motion loop whose
//! initial pair is recovered from the inter-image floor homography rather
//! than from epipolar geometry, followed by bundle adjustment.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command-line
//! front end and the parallel Monte-Carlo runner live in the `projcalib`
//! crate.
//!
//! Modules:
//!
//! - [`geometry`]: pinhole camera, poses, triangulation, homography
//!   estimation/decomposition and PnP.
//! - [`msm`]: marker definitions, projection schedules, center extraction
//!   and fusion of per-scale detections into observations.
//! - [`simulator`]: synthetic rigs, point distributions and noisy
//!   observations.
//! - [`solver`]: view scoring, initialization, incremental registration and
//!   bundle adjustment.
//! - [`eval`]: Sim(3) alignment, pose errors, held-out reprojection and
//!   success rates.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eval;
pub mod geometry;
mod math;
pub mod msm;
pub mod simulator;
pub mod solver;

pub use msm::{CameraId, Observation, ObservationSet, PointId};
pub use geometry::{
    CameraIntrinsics, GeometryError, Homography, NormalizedPoint, PixelPoint, Pose, ScenePoint,
};

