//! Synthetic rigs, point distributions and noisy observations.
//!
//! Far-field cameras sit on a high circle and near-field cameras on a low
//! one, all looking at the floor origin. Points come from one of three
//! distributions: calibration boards floating in a cylindrical volume,
//! boards lying on the floor, or the regular floor grid of projected marker
//! centers. For the grid, detection can be gated by the imaged size of each
//! marker scale, which is what makes multi-scale markers visible to cameras
//! of very different zoom.
//!
//! All randomness derives from one seed through independent generator
//! streams, so the noise-free geometry of a scene is shared by every noise
//! level.

mod config;
mod montecarlo;
mod observe;
mod points;
mod rig;
mod scene;

pub use config::{
    BoardSpec, CameraClass, CloseUpSpec, GridFloorSpec, MsmVisibility, RingSpec, Scenario, ScenarioConfig,
    VisibilityModel,
};
pub use montecarlo::{run_monte_carlo, run_trial, summarize, CurvePoint, TrialRecord};
pub use observe::{imaged_marker_diameter, simulate_detections, simulate_observations, MarkerView};
pub use points::{grid_floor_points, sample_points, BoardPlacement, ScenePoints};
pub use rig::{sample_rig, SampledRig};
pub use scene::{simulate_heldout, simulate_scene, SyntheticScene};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid scenario configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("observation quotas not met after {attempts} boards")]
    QuotaUnreachable { attempts: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Generator streams of one seed.
pub(crate) mod stream {
    pub const RIG: u64 = 1;
    pub const POINTS: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const HELDOUT_POINTS: u64 = 4;
    pub const HELDOUT_NOISE: u64 = 5;
    pub const DETECTIONS: u64 = 6;
}

pub(crate) fn rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
