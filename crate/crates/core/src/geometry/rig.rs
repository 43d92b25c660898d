use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{CameraIntrinsics, Pose};
use crate::msm::CameraId;

/// One calibrated camera: intrinsics `K_c` and pose `P_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigCamera {
    pub intrinsics: CameraIntrinsics,
    pub pose: Pose,
}

/// A set of cameras keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CameraRig {
    cameras: BTreeMap<CameraId, RigCamera>,
}

impl CameraRig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: CameraId, intrinsics: CameraIntrinsics, pose: Pose) {
        self.cameras.insert(id, RigCamera { intrinsics, pose });
    }

    pub fn get(&self, id: CameraId) -> Option<&RigCamera> {
        self.cameras.get(&id)
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = CameraId> + '_ {
        self.cameras.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CameraId, &RigCamera)> + '_ {
        self.cameras.iter().map(|(&id, c)| (id, c))
    }

    pub fn intrinsics(&self) -> BTreeMap<CameraId, CameraIntrinsics> {
        self.cameras.iter().map(|(&id, c)| (id, c.intrinsics)).collect()
    }

    pub fn poses(&self) -> BTreeMap<CameraId, Pose> {
        self.cameras.iter().map(|(&id, c)| (id, c.pose)).collect()
    }

    /// Mean distance between camera centers over all unordered pairs.
    pub fn mean_inter_camera_distance(&self) -> f64 {
        let centers: Vec<_> = self.cameras.values().map(|c| c.pose.center()).collect();
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                sum += (centers[i] - centers[j]).norm();
                pairs += 1;
            }
        }
        if pairs == 0 {
            0.0
        } else {
            sum / pairs as f64
        }
    }
}
