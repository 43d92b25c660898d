use nalgebra::{Matrix3x4, Matrix4, RowVector4};

use super::{CameraIntrinsics, GeometryError, NormalizedPoint, PixelPoint, Pose, ScenePoint};

/// Linear (DLT) triangulation of one point seen by two calibrated views.
///
/// The result is not checked for cheirality; callers filter points that end
/// up behind a camera.
pub fn triangulate_two_view(
    cam_a: (&CameraIntrinsics, &Pose),
    cam_b: (&CameraIntrinsics, &Pose),
    x_a: PixelPoint,
    x_b: PixelPoint,
) -> Result<ScenePoint, GeometryError> {
    triangulate_normalized(cam_a.1, cam_b.1, cam_a.0.normalize(x_a), cam_b.0.normalize(x_b))
}

/// [`triangulate_two_view`] on intrinsics-normalized measurements.
pub fn triangulate_normalized(
    pose_a: &Pose,
    pose_b: &Pose,
    x_a: NormalizedPoint,
    x_b: NormalizedPoint,
) -> Result<ScenePoint, GeometryError> {
    if (pose_a.center() - pose_b.center()).norm() <= 1e-9 {
        return Err(GeometryError::DegenerateGeometry("zero baseline"));
    }
    let pa = projection_matrix(pose_a);
    let pb = projection_matrix(pose_b);
    let rows = [
        row(&pa, 2) * x_a.x - row(&pa, 0),
        row(&pa, 2) * x_a.y - row(&pa, 1),
        row(&pb, 2) * x_b.x - row(&pb, 0),
        row(&pb, 2) * x_b.y - row(&pb, 1),
    ];
    let mut a = Matrix4::from_rows(&rows);
    for mut r in a.row_iter_mut() {
        let n = r.norm();
        if n > 0.0 {
            r /= n;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let (mut i_min, mut i_next) = (0, 1);
    if s[i_next] < s[i_min] {
        core::mem::swap(&mut i_min, &mut i_next);
    }
    for i in 2..4 {
        if s[i] < s[i_min] {
            i_next = i_min;
            i_min = i;
        } else if s[i] < s[i_next] {
            i_next = i;
        }
    }
    if !(s[i_next] > 0.0) || s[i_min] / s[i_next] > 0.99 {
        return Err(GeometryError::DegenerateGeometry("rays are nearly parallel"));
    }
    let h = v_t.row(i_min);
    if h[3].abs() <= 1e-12 * h.fixed_columns::<3>(0).norm() {
        return Err(GeometryError::DegenerateGeometry("point at infinity"));
    }
    Ok(ScenePoint::new(h[0] / h[3], h[1] / h[3], h[2] / h[3]))
}

fn projection_matrix(pose: &Pose) -> Matrix3x4<f64> {
    let mut p = Matrix3x4::zeros();
    p.fixed_view_mut::<3, 3>(0, 0).copy_from(&pose.rotation_matrix());
    p.set_column(3, &pose.translation);
    p
}

fn row(p: &Matrix3x4<f64>, i: usize) -> RowVector4<f64> {
    p.row(i).into_owned()
}
