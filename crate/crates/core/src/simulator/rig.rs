use alloc::collections::BTreeMap;
use core::f64::consts::TAU;
use nalgebra::Vector3;
use rand::Rng;

use super::{rng, stream, CameraClass, ScenarioConfig, SimulationError};
use crate::geometry::{CameraIntrinsics, CameraRig, Pose};
use crate::msm::CameraId;

/// Ground-truth rig with the class of each camera.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRig {
    pub rig: CameraRig,
    pub classes: BTreeMap<CameraId, CameraClass>,
}

/// Cameras at uniformly random azimuths on their circles, each looking at
/// the floor origin without roll. Far cameras come first, then near ones,
/// then the optional close-up camera.
pub fn sample_rig(config: &ScenarioConfig, seed: u64) -> Result<SampledRig, SimulationError> {
    config.validate()?;
    let mut rng = rng(seed, stream::RIG);
    let mut rig = CameraRig::new();
    let mut classes = BTreeMap::new();
    let (w, h) = (config.image_width, config.image_height);
    let mut place = |class: CameraClass, radius: f64, height: f64, focal: f64, rng: &mut rand_chacha::ChaCha8Rng| {
        let id = CameraId(classes.len() as u32);
        let azimuth = rng.random_range(0.0..TAU);
        let eye = Vector3::new(radius * libm::cos(azimuth), radius * libm::sin(azimuth), height);
        let k = CameraIntrinsics::centered(focal, w, h)?;
        rig.insert(id, k, Pose::look_at(&eye, &Vector3::zeros(), &Vector3::z()));
        classes.insert(id, class);
        Ok::<(), SimulationError>(())
    };
    for _ in 0..config.far.count {
        place(CameraClass::Far, config.far.radius, config.far.height, config.far.focal_px, &mut rng)?;
    }
    for _ in 0..config.near.count {
        place(CameraClass::Near, config.near.radius, config.near.height, config.near.focal_px, &mut rng)?;
    }
    if let Some(c) = config.close_up {
        place(CameraClass::CloseUp, c.radius, c.height, c.focal_px, &mut rng)?;
    }
    Ok(SampledRig { rig, classes })
}
