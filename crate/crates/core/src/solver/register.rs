use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{compute_view_score, CorrespondenceGraph, Reconstruction, SolverError, SolverOptions};
use crate::geometry::{project, solve_pnp_ransac, triangulate_two_view, CameraIntrinsics, PixelPoint, ScenePoint};
use crate::msm::{CameraId, PointId};

/// RANSAC seed for a per-camera sub-problem.
pub(crate) fn camera_seed(seed: u64, camera: CameraId) -> u64 {
    seed ^ (u64::from(camera.0) + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Tracks whose widest pair of viewing rays is narrower than this are
/// left untriangulated.
pub const MIN_TRIANGULATION_ANGLE_DEG: f64 = 1.0;

/// Triangulates one track from its registered observers, using the pair
/// with the widest ray angle. The point is accepted only if it lies in front
/// of every registered observer and reprojects within the triangulation
/// threshold in all of them.
pub(crate) fn triangulate_track(
    recon: &Reconstruction,
    track: &[(CameraId, PixelPoint)],
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Option<ScenePoint> {
    let observers: Vec<_> = track
        .iter()
        .filter_map(|&(c, px)| Some((c, px, recon.poses.get(&c)?, intrinsics.get(&c)?)))
        .collect();
    if observers.len() < 2 {
        return None;
    }
    let rays: Vec<_> = observers
        .iter()
        .map(|(_, px, pose, k)| (pose.rotation.inverse() * k.normalize(*px).homogeneous()).normalize())
        .collect();
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            let cos = rays[i].dot(&rays[j]);
            if cos < best.2 {
                best = (i, j, cos);
            }
        }
    }
    if best.2 > libm::cos(MIN_TRIANGULATION_ANGLE_DEG.to_radians()) {
        return None;
    }
    let (a, b) = (&observers[best.0], &observers[best.1]);
    let mut x = triangulate_two_view((a.3, a.2), (b.3, b.2), a.1, b.1).ok()?;
    if let Some(plane) = &recon.plane {
        x = plane.snap(&x);
    }
    let consistent = observers.iter().all(|(_, px, pose, k)| match project(k, pose, &x) {
        Ok(p) => p.distance(*px) < options.triangulation_max_reproj_px,
        Err(_) => false,
    });
    consistent.then_some(x)
}

/// Triangulates every track that has at least two registered observers and
/// no point yet. Returns the number of new points.
pub fn triangulate_tracks(
    recon: &mut Reconstruction,
    graph: &CorrespondenceGraph,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> usize {
    let new: Vec<(PointId, ScenePoint)> = graph
        .tracks()
        .filter(|(p, _)| !recon.points.contains_key(p))
        .filter_map(|(p, track)| Some((p, triangulate_track(recon, track, intrinsics, options)?)))
        .collect();
    let count = new.len();
    recon.points.extend(new);
    count
}

/// Registers the unregistered camera with the best-spread view of the
/// triangulated points.
///
/// Candidates need at least `pnp_min_inliers` correspondences with
/// triangulated points and are tried in decreasing view-score order; a
/// candidate whose PnP fails is skipped in favor of the next one.
pub fn register_next_camera(
    recon: &mut Reconstruction,
    graph: &CorrespondenceGraph,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Result<CameraId, SolverError> {
    let mut candidates = Vec::new();
    for cam in graph.cameras().filter(|c| !recon.is_registered(*c)) {
        let (Some(obs), Some(k)) = (graph.observations(cam), intrinsics.get(&cam)) else { continue };
        let corr: Vec<(ScenePoint, PixelPoint)> =
            obs.iter().filter_map(|(p, &px)| Some((*recon.points.get(p)?, px))).collect();
        if corr.len() < options.pnp_min_inliers {
            continue;
        }
        let score = compute_view_score(corr.iter().map(|c| c.1), k.width, k.height);
        candidates.push((score, corr, cam, *k));
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.len().cmp(&a.1.len())).then(a.2.cmp(&b.2)));
    for (_, corr, cam, k) in candidates {
        let (xs, us): (Vec<ScenePoint>, Vec<PixelPoint>) = corr.into_iter().unzip();
        let Ok(solution) = solve_pnp_ransac(&xs, &us, &k, options.ransac_threshold_px, camera_seed(options.seed, cam)) else {
            continue;
        };
        if solution.inlier_count < options.pnp_min_inliers {
            continue;
        }
        recon.poses.insert(cam, solution.pose);
        recon.registration_order.push(cam);
        recon.unregistered.remove(&cam);
        return Ok(cam);
    }
    Err(SolverError::NoRegistrableCamera)
}
