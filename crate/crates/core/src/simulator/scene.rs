use alloc::collections::BTreeMap;

use super::observe::simulate_observations_from;
use super::points::sample_points_from;
use super::{sample_rig, stream, CameraClass, MsmVisibility, SampledRig, Scenario, ScenarioConfig, ScenePoints, SimulationError};
use crate::geometry::CameraRig;
use crate::msm::{CameraId, ObservationSet};

/// Ground truth and noisy observations of one synthetic acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub rig: CameraRig,
    pub classes: BTreeMap<CameraId, CameraClass>,
    pub points: ScenePoints,
    pub observations: ObservationSet,
}

impl SyntheticScene {
    pub fn sampled_rig(&self) -> SampledRig {
        SampledRig { rig: self.rig.clone(), classes: self.classes.clone() }
    }
}

fn gating(config: &ScenarioConfig) -> Option<&MsmVisibility> {
    match config.scenario {
        Scenario::GridFloor => config.msm.as_ref(),
        _ => None,
    }
}

/// Samples the rig and points of `config` and observes them with noise
/// `config.sigma`.
pub fn simulate_scene(config: &ScenarioConfig, seed: u64) -> Result<SyntheticScene, SimulationError> {
    let rig = sample_rig(config, seed)?;
    let points = sample_points_from(config, &rig, seed, stream::POINTS, false)?;
    let observations = simulate_observations_from(&rig.rig, &points, config.sigma, gating(config), seed, stream::NOISE);
    Ok(SyntheticScene { config: config.clone(), seed, rig: rig.rig, classes: rig.classes, points, observations })
}

/// Independent evaluation points seen by the same rig: the cell centers of
/// the floor grid, or freshly sampled boards. Noise uses its own stream.
pub fn simulate_heldout(
    config: &ScenarioConfig,
    rig: &SampledRig,
    seed: u64,
) -> Result<(ScenePoints, ObservationSet), SimulationError> {
    let points = sample_points_from(config, rig, seed, stream::HELDOUT_POINTS, true)?;
    let observations =
        simulate_observations_from(&rig.rig, &points, config.sigma, gating(config), seed, stream::HELDOUT_NOISE);
    Ok((points, observations))
}
