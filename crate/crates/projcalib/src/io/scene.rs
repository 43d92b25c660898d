use std::collections::BTreeMap;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use projcalib_core::geometry::{CameraIntrinsics, CameraRig, Pose};
use projcalib_core::simulator::{CameraClass, ScenarioConfig, ScenePoints, SyntheticScene};
use projcalib_core::{CameraId, Observation, ObservationSet, PixelPoint, PointId, ScenePoint};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::Generator;

/// Camera with intrinsics and, when known, its world-to-camera pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<CameraClass>,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: u32,
    pub h: u32,
    #[serde(flatten)]
    pub pose: Option<PoseRecord>,
}

/// Unit quaternion and translation of `x_cam = R X + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl From<&Pose> for PoseRecord {
    fn from(p: &Pose) -> Self {
        let q = p.rotation.quaternion();
        Self { qw: q.w, qx: q.i, qy: q.j, qz: q.k, tx: p.translation.x, ty: p.translation.y, tz: p.translation.z }
    }
}

impl PoseRecord {
    pub fn to_pose(&self) -> Result<Pose, CliError> {
        let q = Quaternion::new(self.qw, self.qx, self.qy, self.qz);
        if !(q.norm() > 0.0) || !q.coords.iter().all(|c| c.is_finite()) {
            return Err(CliError::Format("camera quaternion must be finite and non-zero".into()));
        }
        Ok(Pose::new(UnitQuaternion::from_quaternion(q), Vector3::new(self.tx, self.ty, self.tz)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub id: u32,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "Z")]
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub camera_id: u32,
    pub point_id: u32,
    pub u: f64,
    pub v: f64,
}

/// Cameras, optional ground-truth points and 2D observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ScenarioConfig>,
    pub cameras: Vec<CameraRecord>,
    #[serde(default)]
    pub points: Vec<PointRecord>,
    pub observations: Vec<ObservationRecord>,
}

impl SceneFile {
    pub fn new(
        rig: &CameraRig,
        classes: Option<&BTreeMap<CameraId, CameraClass>>,
        points: &BTreeMap<PointId, ScenePoint>,
        observations: &ObservationSet,
    ) -> Self {
        let cameras = rig
            .iter()
            .map(|(id, cam)| {
                let k = cam.intrinsics;
                CameraRecord {
                    id: id.0,
                    class: classes.and_then(|c| c.get(&id).copied()),
                    fx: k.fx,
                    fy: k.fy,
                    cx: k.cx,
                    cy: k.cy,
                    w: k.width,
                    h: k.height,
                    pose: Some(PoseRecord::from(&cam.pose)),
                }
            })
            .collect();
        Self {
            generator: Generator::default(),
            seed: None,
            config: None,
            cameras,
            points: points.iter().map(|(id, p)| PointRecord { id: id.0, x: p.x, y: p.y, z: p.z }).collect(),
            observations: observations
                .iter()
                .map(|o| ObservationRecord { camera_id: o.camera.0, point_id: o.point.0, u: o.pixel.u, v: o.pixel.v })
                .collect(),
        }
    }

    pub fn from_scene(scene: &SyntheticScene) -> Self {
        Self {
            seed: Some(scene.seed),
            config: Some(scene.config.clone()),
            ..Self::new(&scene.rig, Some(&scene.classes), &scene.points.points, &scene.observations)
        }
    }

    pub fn from_heldout(scene: &SyntheticScene, points: &ScenePoints, observations: &ObservationSet) -> Self {
        Self {
            seed: Some(scene.seed),
            config: Some(scene.config.clone()),
            ..Self::new(&scene.rig, Some(&scene.classes), &points.points, observations)
        }
    }

    pub fn intrinsics(&self) -> Result<BTreeMap<CameraId, CameraIntrinsics>, CliError> {
        let mut out = BTreeMap::new();
        for c in &self.cameras {
            let k = CameraIntrinsics::new(c.fx, c.fy, c.cx, c.cy, c.w, c.h)
                .map_err(|e| CliError::Format(format!("camera {}: {e}", c.id)))?;
            if out.insert(CameraId(c.id), k).is_some() {
                return Err(CliError::Format(format!("duplicate camera id {}", c.id)));
            }
        }
        Ok(out)
    }

    /// Poses of all cameras, or `None` if any camera lacks one.
    pub fn poses(&self) -> Result<Option<BTreeMap<CameraId, Pose>>, CliError> {
        let mut out = BTreeMap::new();
        for c in &self.cameras {
            let Some(p) = &c.pose else { return Ok(None) };
            out.insert(CameraId(c.id), p.to_pose()?);
        }
        Ok(Some(out))
    }

    pub fn classes(&self) -> BTreeMap<CameraId, CameraClass> {
        self.cameras.iter().filter_map(|c| Some((CameraId(c.id), c.class?))).collect()
    }

    pub fn points(&self) -> BTreeMap<PointId, ScenePoint> {
        self.points.iter().map(|p| (PointId(p.id), ScenePoint::new(p.x, p.y, p.z))).collect()
    }

    pub fn observation_set(&self) -> Result<ObservationSet, CliError> {
        ObservationSet::from_observations(self.observations.iter().map(|o| Observation {
            camera: CameraId(o.camera_id),
            point: PointId(o.point_id),
            pixel: PixelPoint::new(o.u, o.v),
            weight: 1.0,
        }))
        .map_err(|e| CliError::Format(e.to_string()))
    }
}
