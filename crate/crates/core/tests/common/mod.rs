#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{UnitQuaternion, Vector3};
use projcalib_core::eval::{align_cameras, pose_errors, PoseErrors};
use projcalib_core::simulator::{simulate_scene, Scenario, ScenarioConfig, SyntheticScene};
use projcalib_core::solver::Reconstruction;
use projcalib_core::{CameraId, Observation, ObservationSet, Pose};

pub fn grid_scene(far: usize, near: usize, sigma: f64, seed: u64) -> SyntheticScene {
    let mut config = ScenarioConfig::new(Scenario::GridFloor).with_sigma(sigma);
    config.far.count = far;
    config.near.count = near;
    simulate_scene(&config, seed).unwrap()
}

pub fn errors(recon: &Reconstruction, truth: &BTreeMap<CameraId, Pose>) -> PoseErrors {
    let truth: BTreeMap<_, _> = truth.iter().filter(|(id, _)| recon.poses.contains_key(id)).map(|(k, v)| (*k, *v)).collect();
    let align = align_cameras(&recon.poses, &truth).unwrap();
    pose_errors(&recon.poses, &truth, &align).unwrap()
}

pub fn filter(obs: &ObservationSet, keep: impl Fn(&Observation) -> bool) -> ObservationSet {
    ObservationSet::from_observations(obs.iter().filter(|o| keep(o))).unwrap()
}

pub fn perturb(pose: &Pose, axis: Vector3<f64>, angle_deg: f64, shift: Vector3<f64>) -> Pose {
    let dr = UnitQuaternion::from_scaled_axis(axis.normalize() * angle_deg.to_radians());
    Pose::from_rotation_center(&(dr * pose.rotation).to_rotation_matrix(), &(pose.center() + shift))
}
