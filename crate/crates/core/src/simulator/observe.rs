use alloc::vec::Vec;
use nalgebra::{Vector2, Vector3};
use rand_distr::{Distribution, StandardNormal};

use super::{rng, stream, MsmVisibility, ScenePoints};
use crate::geometry::{project, CameraIntrinsics, CameraRig, PixelPoint, Pose, RigCamera, ScenePoint};
use crate::msm::{DetectionGeometry, Observation, ObservationSet, ProjectionSchedule, RawDetection};

/// Image of a square floor footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerView {
    pub corners: [PixelPoint; 4],
    /// Square root of the imaged quad area.
    pub diameter_px: f64,
}

/// Projects the axis-aligned square of side `side_m` centered at `center`
/// on the floor. `None` if a corner is behind the camera.
pub fn imaged_marker_diameter(
    intrinsics: &CameraIntrinsics,
    pose: &Pose,
    center: &ScenePoint,
    side_m: f64,
) -> Option<MarkerView> {
    let h = side_m / 2.0;
    let offsets = [(-h, h), (h, h), (h, -h), (-h, -h)];
    let mut corners = [PixelPoint::new(0.0, 0.0); 4];
    for (c, (dx, dy)) in corners.iter_mut().zip(offsets) {
        *c = project(intrinsics, pose, &ScenePoint::new(center.x + dx, center.y + dy, center.z)).ok()?;
    }
    let mut area2 = 0.0;
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        area2 += a.u * b.v - b.u * a.v;
    }
    Some(MarkerView { corners, diameter_px: libm::sqrt(0.5 * area2.abs()) })
}

fn scale_detected(cam: &RigCamera, center: &ScenePoint, side_m: f64, msm: &MsmVisibility) -> Option<MarkerView> {
    let view = imaged_marker_diameter(&cam.intrinsics, &cam.pose, center, side_m)?;
    let m = &msm.model;
    let sized = view.diameter_px >= m.min_diameter_px && view.diameter_px <= m.max_diameter_px;
    let inside = !m.require_full_quad || view.corners.iter().all(|c| cam.intrinsics.contains(*c));
    (sized && inside).then_some(view)
}

/// A point is visible if it projects inside the image with positive depth,
/// its surface faces the camera and, under marker gating, at least one
/// marker scale is detectable.
pub(crate) fn is_visible(cam: &RigCamera, x: &ScenePoint, normal: &Vector3<f64>, msm: Option<&MsmVisibility>) -> bool {
    let Ok(px) = project(&cam.intrinsics, &cam.pose, x) else { return false };
    if !cam.intrinsics.contains(px) || normal.dot(&(cam.pose.center() - x.coords)) <= 0.0 {
        return false;
    }
    match msm {
        None => true,
        Some(m) => m.scales.as_slice().iter().any(|&s| scale_detected(cam, x, m.marker_size_m * s, m).is_some()),
    }
}

pub(crate) fn simulate_observations_from(
    rig: &CameraRig,
    points: &ScenePoints,
    sigma: f64,
    msm: Option<&MsmVisibility>,
    seed: u64,
    noise_stream: u64,
) -> ObservationSet {
    let mut rng = rng(seed, noise_stream);
    let mut set = ObservationSet::new();
    for (camera, cam) in rig.iter() {
        for (&point, x) in &points.points {
            if !is_visible(cam, x, &points.normal(point), msm) {
                continue;
            }
            let px = project(&cam.intrinsics, &cam.pose, x).expect("visible points have positive depth");
            let du: f64 = StandardNormal.sample(&mut rng);
            let dv: f64 = StandardNormal.sample(&mut rng);
            let pixel = PixelPoint::new(px.u + sigma * du, px.v + sigma * dv);
            set.insert(Observation { camera, point, pixel, weight: 1.0 }).expect("one observation per pair");
        }
    }
    set
}

/// Noisy observations of every visible point, `N(0, sigma^2)` per axis.
///
/// Noise draws depend only on the seed and the visible (camera, point)
/// pairs, so scenes that differ only in `sigma` share the same
/// standard-normal samples.
pub fn simulate_observations(
    rig: &CameraRig,
    points: &ScenePoints,
    sigma: f64,
    msm: Option<&MsmVisibility>,
    seed: u64,
) -> ObservationSet {
    simulate_observations_from(rig, points, sigma, msm, seed, stream::NOISE)
}

/// Per-scale corner detections of the scheduled markers.
///
/// Marker ids index `points`; each scale of the schedule is detected by a
/// camera when its imaged footprint passes the visibility window. Corner
/// coordinates receive independent `N(0, sigma^2)` noise.
pub fn simulate_detections(
    schedule: &ProjectionSchedule,
    rig: &CameraRig,
    points: &ScenePoints,
    msm: &MsmVisibility,
    sigma: f64,
    seed: u64,
) -> Vec<RawDetection> {
    let mut rng = rng(seed, stream::DETECTIONS);
    let mut out = Vec::new();
    for step in &schedule.steps {
        let scale = schedule.scales.as_slice()[step.scale_index];
        for &marker in &step.markers {
            let Some(x) = points.points.get(&marker) else { continue };
            for (camera, cam) in rig.iter() {
                let Some(view) = scale_detected(cam, x, msm.marker_size_m * scale, msm) else { continue };
                if !is_visible(cam, x, &points.normal(marker), None) {
                    continue;
                }
                let corners = view.corners.map(|c| {
                    let n = Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                    PixelPoint::from_vector(c.to_vector() + n * sigma)
                });
                out.push(RawDetection {
                    camera,
                    step_id: step.step_id,
                    marker,
                    scale_index: step.scale_index,
                    geometry: DetectionGeometry::Corners(corners),
                });
            }
        }
    }
    out
}
