use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use super::MsmError;
use crate::geometry::PixelPoint;

/// Camera identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct CameraId(pub u32);

/// Identifier of a 3D point; for projected markers this is the MSM id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct PointId(pub u32);

impl fmt::Display for CameraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub camera: CameraId,
    pub point: PointId,
    pub pixel: PixelPoint,
    pub weight: f64,
}

/// Image measurements `x_{c,k}` with at most one entry per (camera, point).
///
/// A missing entry is `v_{c,k} = 0`. Iteration is ordered by camera, then
/// point, so everything built from the set is deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationSet {
    entries: BTreeMap<(CameraId, PointId), (PixelPoint, f64)>,
}

impl ObservationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_observations(obs: impl IntoIterator<Item = Observation>) -> Result<Self, MsmError> {
        let mut set = Self::new();
        for o in obs {
            set.insert(o)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, obs: Observation) -> Result<(), MsmError> {
        if !(obs.weight > 0.0 && obs.weight <= 1.0) {
            return Err(MsmError::InvalidWeight(obs.weight));
        }
        let key = (obs.camera, obs.point);
        if self.entries.contains_key(&key) {
            return Err(MsmError::DuplicateObservation { camera: obs.camera.0, point: obs.point.0 });
        }
        self.entries.insert(key, (obs.pixel, obs.weight));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, camera: CameraId, point: PointId) -> Option<Observation> {
        self.entries
            .get(&(camera, point))
            .map(|&(pixel, weight)| Observation { camera, point, pixel, weight })
    }

    /// Visibility flag `v_{c,k}`.
    pub fn is_visible(&self, camera: CameraId, point: PointId) -> bool {
        self.entries.contains_key(&(camera, point))
    }

    pub fn iter(&self) -> impl Iterator<Item = Observation> + '_ {
        self.entries
            .iter()
            .map(|(&(camera, point), &(pixel, weight))| Observation { camera, point, pixel, weight })
    }

    pub fn for_camera(&self, camera: CameraId) -> impl Iterator<Item = Observation> + '_ {
        self.entries
            .range((camera, PointId(0))..=(camera, PointId(u32::MAX)))
            .map(|(&(camera, point), &(pixel, weight))| Observation { camera, point, pixel, weight })
    }

    pub fn cameras(&self) -> BTreeSet<CameraId> {
        self.entries.keys().map(|k| k.0).collect()
    }

    /// Observing cameras per point; every listed track is non-empty.
    pub fn tracks(&self) -> BTreeMap<PointId, Vec<CameraId>> {
        let mut tracks: BTreeMap<PointId, Vec<CameraId>> = BTreeMap::new();
        for &(camera, point) in self.entries.keys() {
            tracks.entry(point).or_default().push(camera);
        }
        tracks
    }

    pub fn mean_track_length(&self) -> f64 {
        let tracks = self.tracks();
        if tracks.is_empty() {
            return 0.0;
        }
        self.len() as f64 / tracks.len() as f64
    }
}
