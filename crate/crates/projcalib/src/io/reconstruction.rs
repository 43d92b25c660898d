use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Vector3;
use projcalib_core::geometry::CameraIntrinsics;
use projcalib_core::solver::{CorrespondenceGraph, Gauge, PlaneFrame, Reconstruction, ReprojectionStats, SolverOptions};
use projcalib_core::{CameraId, ObservationSet, PointId, ScenePoint};
use serde::{Deserialize, Serialize};

use super::scene::{PointRecord, PoseRecord};
use crate::error::CliError;
use crate::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraEntry {
    pub id: u32,
    pub registered: bool,
    #[serde(flatten)]
    pub pose: Option<PoseRecord>,
    /// Calibration reprojection statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reprojection: Option<ReprojectionStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneEntry {
    pub origin: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

/// Calibrated rig in the solver gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionFile {
    pub generator: Generator,
    pub seed: u64,
    pub options: SolverOptions,
    pub gauge: Gauge,
    pub registration_order: Vec<CameraId>,
    pub cameras: Vec<CameraEntry>,
    pub plane: Option<PlaneEntry>,
    /// Mean squared residual per observation after the final adjustment.
    pub final_cost: Option<f64>,
    pub overall: Option<ReprojectionStats>,
    pub points: Vec<PointRecord>,
}

impl ReconstructionFile {
    pub fn new(
        recon: &Reconstruction,
        observations: &ObservationSet,
        intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
        options: &SolverOptions,
    ) -> Self {
        let graph = CorrespondenceGraph::new(observations);
        let stats = recon.camera_stats(&graph, intrinsics);
        let ids: BTreeSet<CameraId> = intrinsics.keys().chain(recon.poses.keys()).copied().collect();
        let cameras = ids
            .into_iter()
            .map(|id| CameraEntry {
                id: id.0,
                registered: recon.is_registered(id),
                pose: recon.poses.get(&id).map(PoseRecord::from),
                reprojection: stats.get(&id).copied(),
            })
            .collect();
        let v = |x: &Vector3<f64>| [x.x, x.y, x.z];
        Self {
            generator: Generator::default(),
            seed: options.seed,
            options: *options,
            gauge: recon.gauge,
            registration_order: recon.registration_order.clone(),
            cameras,
            plane: recon.plane.map(|p| PlaneEntry { origin: v(&p.origin), e1: v(&p.e1), e2: v(&p.e2) }),
            final_cost: recon.final_cost.is_finite().then_some(recon.final_cost),
            overall: recon.overall_stats(&graph, intrinsics),
            points: recon.points.iter().map(|(id, p)| PointRecord { id: id.0, x: p.x, y: p.y, z: p.z }).collect(),
        }
    }

    pub fn to_reconstruction(&self) -> Result<Reconstruction, CliError> {
        let mut poses = BTreeMap::new();
        let mut unregistered = BTreeSet::new();
        for c in &self.cameras {
            match (&c.pose, c.registered) {
                (Some(p), true) => {
                    poses.insert(CameraId(c.id), p.to_pose()?);
                }
                (None, false) => {
                    unregistered.insert(CameraId(c.id));
                }
                _ => return Err(CliError::Format(format!("camera {}: pose must be given iff registered", c.id))),
            }
        }
        let mut recon = Reconstruction::new(self.gauge, poses);
        recon.registration_order = self.registration_order.clone();
        recon.unregistered = unregistered;
        recon.points =
            self.points.iter().map(|p| (PointId(p.id), ScenePoint::new(p.x, p.y, p.z))).collect();
        let v = |a: [f64; 3]| Vector3::new(a[0], a[1], a[2]);
        recon.plane = self.plane.map(|p| PlaneFrame { origin: v(p.origin), e1: v(p.e1), e2: v(p.e2) });
        recon.final_cost = self.final_cost.unwrap_or(f64::NAN);
        Ok(recon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use projcalib_core::simulator::{simulate_scene, ScenarioConfig};
    use projcalib_core::solver::calibrate;

    #[test]
    fn reconstruction_round_trip() {
        let scene = simulate_scene(&ScenarioConfig::full_like().with_sigma(0.3), 2).unwrap();
        let k = scene.rig.intrinsics();
        let options = SolverOptions { coplanar: true, ..SolverOptions::default() };
        let recon = calibrate(&scene.observations, &k, &options).unwrap();
        let file = ReconstructionFile::new(&recon, &scene.observations, &k, &options);
        let back: ReconstructionFile = serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(back, file);
        let r = back.to_reconstruction().unwrap();
        assert_eq!(r.points, recon.points);
        assert_eq!(r.registration_order, recon.registration_order);
        assert_eq!(r.plane, recon.plane);
        for (id, p) in &recon.poses {
            assert!(r.poses[id].rotation_angle_to(p) < 1e-12);
        }
    }
}
