use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{EvalError, Sim3Transform};
use crate::geometry::Pose;
use crate::math::rad_to_deg;
use crate::msm::CameraId;

/// Success thresholds on the mean reprojection error, in pixels.
pub const SUCCESS_THRESHOLDS_PX: [f64; 3] = [0.5, 2.0, 5.0];

#[derive(Debug, Clone, PartialEq)]
pub struct PoseErrors {
    pub rot_rmse_deg: f64,
    pub trans_rmse: f64,
    /// Per camera: (geodesic rotation error in degrees, center distance).
    pub per_camera: BTreeMap<CameraId, (f64, f64)>,
}

/// Rotation and translation RMSE of the aligned estimate against ground
/// truth. Both maps must hold the same cameras.
pub fn pose_errors(
    estimated: &BTreeMap<CameraId, Pose>,
    ground_truth: &BTreeMap<CameraId, Pose>,
    alignment: &Sim3Transform,
) -> Result<PoseErrors, EvalError> {
    if let Some(id) = estimated.keys().find(|id| !ground_truth.contains_key(id)) {
        return Err(EvalError::IdMismatch(*id));
    }
    if let Some(id) = ground_truth.keys().find(|id| !estimated.contains_key(id)) {
        return Err(EvalError::IdMismatch(*id));
    }
    let mut per_camera = BTreeMap::new();
    let (mut rot_sq, mut trans_sq) = (0.0, 0.0);
    for (id, est) in estimated {
        let aligned = alignment.apply_pose(est);
        let gt = &ground_truth[id];
        let rot = rad_to_deg(aligned.rotation.angle_to(&gt.rotation));
        let trans = (aligned.center() - gt.center()).norm();
        rot_sq += rot * rot;
        trans_sq += trans * trans;
        per_camera.insert(*id, (rot, trans));
    }
    let n = estimated.len().max(1) as f64;
    Ok(PoseErrors { rot_rmse_deg: libm::sqrt(rot_sq / n), trans_rmse: libm::sqrt(trans_sq / n), per_camera })
}

/// Percentage of cameras (rounded to the nearest integer) whose mean
/// reprojection error is below each threshold. `None` marks a camera that
/// was not registered and fails every threshold.
pub fn success_rate(errors: &[Option<f64>], thresholds: &[f64]) -> Vec<u32> {
    thresholds
        .iter()
        .map(|&t| {
            if errors.is_empty() {
                return 0;
            }
            let ok = errors.iter().filter(|e| matches!(e, Some(v) if *v < t)).count();
            libm::round(100.0 * ok as f64 / errors.len() as f64) as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::align_cameras;
    use nalgebra::{UnitQuaternion, Vector3};
    use proptest::prelude::*;

    fn rig(n: usize) -> BTreeMap<CameraId, Pose> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 0.7;
                let eye = Vector3::new(3.0 * libm::cos(a), 3.0 * libm::sin(a), 1.0 + 0.3 * i as f64);
                (CameraId(i as u32), Pose::look_at(&eye, &Vector3::zeros(), &Vector3::z()))
            })
            .collect()
    }

    #[test]
    fn exact_estimate_has_no_error() {
        let gt = rig(6);
        let e = pose_errors(&gt, &gt, &Sim3Transform::identity()).unwrap();
        assert!(e.rot_rmse_deg < 1e-12 && e.trans_rmse < 1e-12);
    }

    #[test]
    fn one_degree_on_one_camera() {
        let gt = rig(9);
        let mut est = gt.clone();
        let axis = Vector3::new(0.3, -0.5, 0.8).normalize();
        let p = est.get_mut(&CameraId(4)).unwrap();
        let c = p.center();
        let rotation = UnitQuaternion::from_scaled_axis(axis * 1f64.to_radians()) * p.rotation;
        *p = Pose::new(rotation, -(rotation * c));
        let align = align_cameras(&est, &gt).unwrap();
        let e = pose_errors(&est, &gt, &align).unwrap();
        assert!((e.rot_rmse_deg - 1.0 / 3.0).abs() < 1e-9);
        assert!(e.trans_rmse < 1e-12);
    }

    #[test]
    fn id_mismatch() {
        let gt = rig(4);
        let mut est = gt.clone();
        est.remove(&CameraId(2));
        assert_eq!(pose_errors(&est, &gt, &Sim3Transform::identity()), Err(EvalError::IdMismatch(CameraId(2))));
    }

    #[test]
    fn success_examples() {
        let mut nine = [Some(0.3); 9].to_vec();
        nine[8] = None;
        assert_eq!(success_rate(&nine, &SUCCESS_THRESHOLDS_PX), [89, 89, 89]);
        assert_eq!(success_rate(&[Some(0.2); 5], &SUCCESS_THRESHOLDS_PX), [100, 100, 100]);
        assert_eq!(success_rate(&[Some(0.4), Some(1.0), Some(3.0)], &SUCCESS_THRESHOLDS_PX), [33, 67, 100]);
    }

    proptest! {
        #[test]
        fn success_is_monotone(errors in prop::collection::vec(prop::option::of(0.0f64..10.0), 0..30)) {
            let s = success_rate(&errors, &SUCCESS_THRESHOLDS_PX);
            prop_assert!(s[0] <= s[1] && s[1] <= s[2]);
        }

        #[test]
        fn invariant_to_similarity_of_the_estimate(
            scale in 0.1f64..10.0,
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in 0.0f64..3.0,
            shift in prop::array::uniform3(-10.0f64..10.0),
        ) {
            let gt = rig(7);
            let t = Sim3Transform {
                scale,
                rotation: UnitQuaternion::from_scaled_axis(Vector3::from(axis).normalize() * angle),
                translation: Vector3::from(shift),
            };
            prop_assume!(Vector3::from(axis).norm() > 1e-3);
            let est: BTreeMap<_, _> = gt.iter().map(|(id, p)| (*id, t.apply_pose(p))).collect();
            let align = align_cameras(&est, &gt).unwrap();
            let e = pose_errors(&est, &gt, &align).unwrap();
            prop_assert!(e.rot_rmse_deg < 1e-9 * 57.3 && e.trans_rmse < 1e-9);
        }
    }
}
