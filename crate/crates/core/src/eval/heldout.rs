use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::{Matrix3, Vector3};

use super::EvalError;
use crate::geometry::camera::project_with_jacobian;
use crate::geometry::{project, triangulate_two_view, CameraIntrinsics, PixelPoint, Pose, ScenePoint};
use crate::msm::{CameraId, ObservationSet, PointId};
use crate::solver::{CorrespondenceGraph, Reconstruction, ReprojectionStats};

#[derive(Debug, Clone, PartialEq)]
pub struct HeldoutReport {
    pub per_camera: BTreeMap<CameraId, ReprojectionStats>,
    pub overall: ReprojectionStats,
    /// Held-out points triangulated with the frozen poses.
    pub points: BTreeMap<PointId, ScenePoint>,
}

type Observer<'a> = (PixelPoint, &'a Pose, &'a CameraIntrinsics);

fn refine_point(x: ScenePoint, observers: &[(CameraId, Observer<'_>)]) -> ScenePoint {
    let cost = |x: &ScenePoint| -> f64 {
        observers
            .iter()
            .map(|(_, (px, pose, k))| match project(k, pose, x) {
                Ok(p) => crate::math::sq(p.u - px.u) + crate::math::sq(p.v - px.v),
                Err(_) => f64::INFINITY,
            })
            .sum()
    };
    let mut x = x;
    let mut current = cost(&x);
    let mut lambda = 1e-3;
    for _ in 0..30 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (_, (px, pose, k)) in observers {
            let Ok((p, a)) = project_with_jacobian(k, &pose.transform_point(&x)) else { continue };
            let j = a * pose.rotation_matrix();
            let r = p.to_vector() - px.to_vector();
            jtj += j.transpose() * j;
            jtr += j.transpose() * r;
        }
        let mut improved = false;
        while lambda < 1e10 {
            let mut m = jtj;
            for i in 0..3 {
                m[(i, i)] += lambda * m[(i, i)].max(1e-12);
            }
            let Some(step) = m.try_inverse().map(|mi| mi * -jtr) else {
                lambda *= 10.0;
                continue;
            };
            let candidate = x + step;
            let c = cost(&candidate);
            if c < current {
                improved = (current - c) > 1e-12 * current;
                x = candidate;
                current = c;
                lambda = (lambda * 0.1).max(1e-12);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    x
}

/// Reprojection error on observations that took no part in calibration.
///
/// With the estimated poses frozen, every held-out track seen by at least two
/// registered cameras is triangulated from its widest-angle pair and refined
/// by Levenberg-Marquardt over all its registered observers; the residuals
/// of that refinement are reported per camera.
pub fn heldout_reprojection(
    recon: &Reconstruction,
    heldout: &ObservationSet,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
) -> Result<HeldoutReport, EvalError> {
    let graph = CorrespondenceGraph::new(heldout);
    let mut norms: BTreeMap<CameraId, Vec<f64>> = BTreeMap::new();
    let mut points = BTreeMap::new();
    for (pid, track) in graph.tracks() {
        let observers: Vec<(CameraId, Observer<'_>)> = track
            .iter()
            .filter_map(|&(c, px)| Some((c, (px, recon.poses.get(&c)?, intrinsics.get(&c)?))))
            .collect();
        if observers.len() < 2 {
            continue;
        }
        let rays: Vec<Vector3<f64>> = observers
            .iter()
            .map(|(_, (px, pose, k))| (pose.rotation.inverse() * k.normalize(*px).homogeneous()).normalize())
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
        let (a, b) = (observers[best.0].1, observers[best.1].1);
        let Ok(x0) = triangulate_two_view((a.2, a.1), (b.2, b.1), a.0, b.0) else { continue };
        let x = refine_point(x0, &observers);
        let mut any = false;
        for (c, (px, pose, k)) in &observers {
            if let Ok(p) = project(k, pose, &x) {
                norms.entry(*c).or_default().push(p.distance(*px));
                any = true;
            }
        }
        if any {
            points.insert(pid, x);
        }
    }
    let overall = ReprojectionStats::from_norms(norms.values().flatten().copied()).ok_or(EvalError::NoEvaluableTracks)?;
    let per_camera = norms.into_iter().filter_map(|(c, v)| ReprojectionStats::from_norms(v).map(|s| (c, s))).collect();
    Ok(HeldoutReport { per_camera, overall, points })
}
