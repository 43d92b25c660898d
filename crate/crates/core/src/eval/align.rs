use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::EvalError;
use crate::geometry::{Pose, ScenePoint};
use crate::msm::CameraId;

/// `y = s R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sim3Transform {
    pub scale: f64,
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Sim3Transform {
    pub fn identity() -> Self {
        Self { scale: 1.0, rotation: UnitQuaternion::identity(), translation: Vector3::zeros() }
    }

    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x * self.scale + self.translation
    }

    pub fn apply_point(&self, x: &ScenePoint) -> ScenePoint {
        ScenePoint::from(self.apply(&x.coords))
    }

    /// The same camera expressed in the target frame.
    pub fn apply_pose(&self, pose: &Pose) -> Pose {
        let rotation = pose.rotation * self.rotation.inverse();
        let center = self.apply(&pose.center());
        Pose::new(rotation, -(rotation * center))
    }

    /// Sum of squared residuals `|s R x + t - y|^2`.
    pub fn objective(&self, source: &[Vector3<f64>], target: &[Vector3<f64>]) -> f64 {
        source.iter().zip(target).map(|(x, y)| (self.apply(x) - y).norm_squared()).sum()
    }
}

/// Closed-form least-squares similarity from `source` onto `target`.
pub fn umeyama_align(source: &[Vector3<f64>], target: &[Vector3<f64>]) -> Result<Sim3Transform, EvalError> {
    if source.len() != target.len() {
        return Err(EvalError::LengthMismatch { source_len: source.len(), target_len: target.len() });
    }
    if source.len() < 3 {
        return Err(EvalError::DegenerateConfiguration("fewer than three point pairs"));
    }
    let n = source.len() as f64;
    let mx = source.iter().fold(Vector3::zeros(), |a, x| a + x) / n;
    let my = target.iter().fold(Vector3::zeros(), |a, y| a + y) / n;
    let mut cov = Matrix3::zeros();
    let mut sxx = Matrix3::zeros();
    for (x, y) in source.iter().zip(target) {
        let dx = x - mx;
        cov += (y - my) * dx.transpose();
        sxx += dx * dx.transpose();
    }
    cov /= n;
    sxx /= n;
    let var_x = sxx.trace();
    let mut spread: Vec<f64> = sxx.symmetric_eigenvalues().iter().copied().collect();
    spread.sort_by(|a, b| b.total_cmp(a));
    if !(var_x > 1e-300) || spread[1] <= 1e-12 * spread[0] {
        return Err(EvalError::DegenerateConfiguration("source points are coincident or collinear"));
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let mut s = Matrix3::identity();
    if u.determinant() * v_t.determinant() < 0.0 {
        s[(2, 2)] = -1.0;
    }
    let r = u * s * v_t;
    let d = Matrix3::from_diagonal(&svd.singular_values);
    let scale = (d * s).trace() / var_x;
    let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
    let translation = my - rotation * mx * scale;
    Ok(Sim3Transform { scale, rotation, translation })
}

/// Similarity taking the estimated camera centers onto the ground-truth
/// ones, over the cameras present in both maps.
pub fn align_cameras(
    estimated: &BTreeMap<CameraId, Pose>,
    ground_truth: &BTreeMap<CameraId, Pose>,
) -> Result<Sim3Transform, EvalError> {
    let (src, dst): (Vec<_>, Vec<_>) = estimated
        .iter()
        .filter_map(|(id, p)| Some((p.center(), ground_truth.get(id)?.center())))
        .unzip();
    umeyama_align(&src, &dst)
}
