use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geometry::PixelPoint;
use crate::msm::{CameraId, ObservationSet, PointId};

/// Observations indexed both per camera and per track.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrespondenceGraph {
    by_camera: BTreeMap<CameraId, BTreeMap<PointId, PixelPoint>>,
    tracks: BTreeMap<PointId, Vec<(CameraId, PixelPoint)>>,
    pair_counts: BTreeMap<(CameraId, CameraId), usize>,
}

impl CorrespondenceGraph {
    pub fn new(observations: &ObservationSet) -> Self {
        let mut graph = Self::default();
        for o in observations.iter() {
            graph.by_camera.entry(o.camera).or_default().insert(o.point, o.pixel);
            graph.tracks.entry(o.point).or_default().push((o.camera, o.pixel));
        }
        for track in graph.tracks.values() {
            for i in 0..track.len() {
                for j in i + 1..track.len() {
                    *graph.pair_counts.entry((track[i].0, track[j].0)).or_insert(0) += 1;
                }
            }
        }
        graph
    }

    pub fn cameras(&self) -> impl Iterator<Item = CameraId> + '_ {
        self.by_camera.keys().copied()
    }

    pub fn observations(&self, camera: CameraId) -> Option<&BTreeMap<PointId, PixelPoint>> {
        self.by_camera.get(&camera)
    }

    pub fn observation(&self, camera: CameraId, point: PointId) -> Option<PixelPoint> {
        self.by_camera.get(&camera)?.get(&point).copied()
    }

    /// Observing cameras of a track, in camera order.
    pub fn track(&self, point: PointId) -> Option<&[(CameraId, PixelPoint)]> {
        self.tracks.get(&point).map(|t| t.as_slice())
    }

    pub fn tracks(&self) -> impl Iterator<Item = (PointId, &[(CameraId, PixelPoint)])> + '_ {
        self.tracks.iter().map(|(&p, t)| (p, t.as_slice()))
    }

    /// Number of tracks seen by both cameras; symmetric in its arguments.
    pub fn shared_count(&self, a: CameraId, b: CameraId) -> usize {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.pair_counts.get(&key).copied().unwrap_or(0)
    }

    /// Camera pairs `(a, b)` with `a < b` that share at least one track.
    pub fn pairs(&self) -> impl Iterator<Item = ((CameraId, CameraId), usize)> + '_ {
        self.pair_counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Correspondences of the tracks seen by both cameras.
    pub fn shared(&self, a: CameraId, b: CameraId) -> Vec<(PointId, PixelPoint, PixelPoint)> {
        let (Some(oa), Some(ob)) = (self.by_camera.get(&a), self.by_camera.get(&b)) else {
            return Vec::new();
        };
        oa.iter().filter_map(|(p, &xa)| ob.get(p).map(|&xb| (*p, xa, xb))).collect()
    }
}
