use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{align_cameras, heldout_reprojection, pose_errors, success_rate, EvalError, PoseErrors, Sim3Transform, SUCCESS_THRESHOLDS_PX};
use crate::geometry::{CameraIntrinsics, Pose, ScenePoint};
use crate::msm::{CameraId, ObservationSet, PointId};
use crate::solver::{CorrespondenceGraph, Reconstruction, ReprojectionStats};

/// What to evaluate a reconstruction against; ground truth and held-out
/// data are optional.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationInput<'a> {
    pub reconstruction: &'a Reconstruction,
    pub calibration: &'a ObservationSet,
    pub intrinsics: &'a BTreeMap<CameraId, CameraIntrinsics>,
    pub ground_truth_poses: Option<&'a BTreeMap<CameraId, Pose>>,
    pub ground_truth_points: Option<&'a BTreeMap<PointId, ScenePoint>>,
    pub heldout: Option<&'a ObservationSet>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraReport {
    pub registered: bool,
    pub calibration: Option<ReprojectionStats>,
    pub heldout: Option<ReprojectionStats>,
    pub rotation_error_deg: Option<f64>,
    pub translation_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointErrors {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub cameras: BTreeMap<CameraId, CameraReport>,
    pub calibration: Option<ReprojectionStats>,
    pub heldout: Option<ReprojectionStats>,
    pub alignment: Option<Sim3Transform>,
    pub pose: Option<PoseErrors>,
    pub points: Option<PointErrors>,
    /// Percentages at [`SUCCESS_THRESHOLDS_PX`], from the held-out errors
    /// when available and the calibration errors otherwise.
    pub success: Vec<u32>,
    pub all_registered: bool,
}

pub fn evaluate(input: EvaluationInput<'_>) -> Result<EvaluationReport, EvalError> {
    let recon = input.reconstruction;
    let graph = CorrespondenceGraph::new(input.calibration);
    let calib_stats = recon.camera_stats(&graph, input.intrinsics);
    let heldout = input.heldout.map(|h| heldout_reprojection(recon, h, input.intrinsics)).transpose()?;

    let (alignment, pose) = match input.ground_truth_poses {
        Some(gt) => {
            let gt_registered: BTreeMap<CameraId, Pose> =
                gt.iter().filter(|(id, _)| recon.poses.contains_key(id)).map(|(id, p)| (*id, *p)).collect();
            let align = align_cameras(&recon.poses, &gt_registered)?;
            (Some(align), Some(pose_errors(&recon.poses, &gt_registered, &align)?))
        }
        None => (None, None),
    };
    let points = match (alignment, input.ground_truth_points) {
        (Some(align), Some(gt)) => {
            let errs: Vec<f64> = recon
                .points
                .iter()
                .filter_map(|(id, x)| Some((align.apply_point(x) - gt.get(id)?).norm()))
                .collect();
            (!errs.is_empty()).then(|| {
                let n = errs.len() as f64;
                let mean = errs.iter().sum::<f64>() / n;
                let var = errs.iter().map(|e| crate::math::sq(e - mean)).sum::<f64>() / n;
                PointErrors { count: errs.len(), mean, std: libm::sqrt(var) }
            })
        }
        _ => None,
    };

    let ids: BTreeSet<CameraId> = input.intrinsics.keys().chain(recon.poses.keys()).copied().collect();
    let mut cameras = BTreeMap::new();
    for id in ids {
        let registered = recon.is_registered(id);
        let per = pose.as_ref().and_then(|p| p.per_camera.get(&id));
        cameras.insert(
            id,
            CameraReport {
                registered,
                calibration: calib_stats.get(&id).copied(),
                heldout: heldout.as_ref().and_then(|h| h.per_camera.get(&id).copied()),
                rotation_error_deg: per.map(|e| e.0),
                translation_error: per.map(|e| e.1),
            },
        );
    }
    let errors: Vec<Option<f64>> = cameras
        .values()
        .map(|c| {
            let stats = if heldout.is_some() { c.heldout } else { c.calibration };
            stats.filter(|_| c.registered).map(|s| s.mean_px)
        })
        .collect();
    Ok(EvaluationReport {
        all_registered: cameras.values().all(|c| c.registered),
        success: success_rate(&errors, &SUCCESS_THRESHOLDS_PX),
        calibration: recon.overall_stats(&graph, input.intrinsics),
        heldout: heldout.map(|h| h.overall),
        alignment,
        pose,
        points,
        cameras,
    })
}
