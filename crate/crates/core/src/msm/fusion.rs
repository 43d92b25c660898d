use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{center_from_square_corners, CameraId, MsmError, Observation, ObservationSet, PointId, ProjectionSchedule};
use crate::geometry::PixelPoint;
use crate::math::median;

/// Detections farther than this from the per-marker median are dropped.
pub const CONSISTENCY_GATE_PX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DetectionGeometry {
    Corners([PixelPoint; 4]),
    Center(PixelPoint),
}

/// One marker detected by one camera in one projector step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawDetection {
    pub camera: CameraId,
    pub step_id: u32,
    pub marker: PointId,
    pub scale_index: usize,
    pub geometry: DetectionGeometry,
}

/// Combines per-scale detections into one observation per (camera, marker).
///
/// The fused pixel is the component-wise median of the detected centers
/// after discarding those more than [`CONSISTENCY_GATE_PX`] from a first
/// median. Corner quads that are degenerate yield no center and are
/// skipped.
pub fn fuse_detections(raw: &[RawDetection], schedule: &ProjectionSchedule) -> Result<ObservationSet, MsmError> {
    let mut groups: BTreeMap<(CameraId, PointId), Vec<PixelPoint>> = BTreeMap::new();
    for d in raw {
        let step = schedule.step(d.step_id).ok_or(MsmError::UnknownStep(d.step_id))?;
        if step.scale_index != d.scale_index || step.markers.binary_search(&d.marker).is_err() {
            return Err(MsmError::InconsistentDetection { step: d.step_id, marker: d.marker.0, scale_index: d.scale_index });
        }
        let center = match d.geometry {
            DetectionGeometry::Center(c) => c,
            DetectionGeometry::Corners(q) => match center_from_square_corners(&q) {
                Ok(c) => c,
                Err(_) => continue,
            },
        };
        if center.u.is_finite() && center.v.is_finite() {
            groups.entry((d.camera, d.marker)).or_default().push(center);
        }
    }
    let mut set = ObservationSet::new();
    for ((camera, point), centers) in groups {
        if let Some(pixel) = robust_center(&centers) {
            set.insert(Observation { camera, point, pixel, weight: 1.0 })?;
        }
    }
    Ok(set)
}

fn robust_center(centers: &[PixelPoint]) -> Option<PixelPoint> {
    let first = component_median(centers.iter())?;
    let kept: Vec<&PixelPoint> = centers.iter().filter(|c| c.distance(first) <= CONSISTENCY_GATE_PX).collect();
    component_median(kept.into_iter())
}

fn component_median<'a>(points: impl Iterator<Item = &'a PixelPoint>) -> Option<PixelPoint> {
    let (mut us, mut vs): (Vec<f64>, Vec<f64>) = points.map(|p| (p.u, p.v)).unzip();
    if us.is_empty() {
        return None;
    }
    Some(PixelPoint::new(median(&mut us), median(&mut vs)))
}
