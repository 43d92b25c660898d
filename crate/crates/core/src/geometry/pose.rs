use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::ScenePoint;

/// Rigid world-to-camera transform `x_cam = R X + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::zeros())
    }

    /// Pose from a rotation matrix and the camera center in world coordinates.
    pub fn from_rotation_center(rotation: &Rotation3<f64>, center: &Vector3<f64>) -> Self {
        let q = UnitQuaternion::from_rotation_matrix(rotation);
        Self::new(q, -(q * center))
    }

    /// Camera at `eye` looking at `target`, with its x axis horizontal
    /// (perpendicular to `up`) so the image has no roll.
    pub fn look_at(eye: &Vector3<f64>, target: &Vector3<f64>, up: &Vector3<f64>) -> Self {
        let forward = (target - eye).normalize();
        let mut right = forward.cross(up);
        if right.norm() < 1e-12 {
            // Looking straight along `up`; any horizontal axis is roll-free.
            right = forward.cross(&Vector3::x());
            if right.norm() < 1e-12 {
                right = forward.cross(&Vector3::y());
            }
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let r = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        Self::from_rotation_center(&Rotation3::from_matrix_unchecked(r), eye)
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// Camera center in world coordinates, `-R^T t`.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.inverse() * self.translation)
    }

    /// Viewing direction (camera +z) in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation.inverse() * Vector3::z()
    }

    pub fn transform_point(&self, p: &ScenePoint) -> Vector3<f64> {
        self.rotation * p.coords + self.translation
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        Self::new(inv, -(inv * self.translation))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Pose) -> Self {
        Self::new(self.rotation * other.rotation, self.rotation * other.translation + self.translation)
    }

    /// Relative motion taking camera `self`'s frame into camera `other`'s frame.
    pub fn relative_to(&self, other: &Pose) -> Self {
        other.compose(&self.inverse())
    }

    /// Geodesic rotation distance in radians.
    pub fn rotation_angle_to(&self, other: &Pose) -> f64 {
        self.rotation.angle_to(&other.rotation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project, CameraIntrinsics};
    use proptest::prelude::*;

    fn pose_strategy() -> impl Strategy<Value = Pose> {
        (prop::array::uniform3(-3.0f64..3.0), prop::array::uniform3(-2.0f64..2.0))
            .prop_map(|(r, t)| Pose::new(UnitQuaternion::from_scaled_axis(Vector3::from(r)), Vector3::from(t)))
    }

    #[test]
    fn look_at_points_forward_axis_at_target() {
        let eye = Vector3::new(2.0, -1.0, 2.8);
        let pose = Pose::look_at(&eye, &Vector3::zeros(), &Vector3::z());
        let dir = (-eye).normalize();
        assert!(pose.forward().angle(&dir) < 1e-12);
        assert!((pose.center() - eye).norm() < 1e-12);
        // No roll: camera x axis is horizontal.
        let x_axis = pose.rotation.inverse() * Vector3::x();
        assert!(x_axis.z.abs() < 1e-12);
        // Image "down" points down in the world.
        assert!((pose.rotation.inverse() * Vector3::y()).z < 0.0);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let pose = Pose::new(UnitQuaternion::from_euler_angles(0.3, -1.0, 2.0), Vector3::new(1.0, 2.0, 3.0));
        let r = pose.rotation_matrix();
        assert!((r * r.transpose() - Matrix3::identity()).norm() < 1e-12);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
        assert!((pose.rotation.norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rigid_world_change_leaves_pixels_unchanged(pose in pose_strategy(), change in pose_strategy(), xyz in prop::array::uniform3(-1.0f64..1.0)) {
            let k = CameraIntrinsics::centered(915.0, 1920, 1080).unwrap();
            // Place the point in front of the camera.
            let cam = Vector3::new(xyz[0], xyz[1], 3.0 + xyz[2]);
            let world = ScenePoint::from(pose.inverse().transform_point(&ScenePoint::from(cam)));
            let before = project(&k, &pose, &world).unwrap();
            let moved = ScenePoint::from(change.transform_point(&world));
            let moved_pose = pose.compose(&change.inverse());
            let after = project(&k, &moved_pose, &moved).unwrap();
            prop_assert!(before.distance(after) < 1e-9);
        }

        #[test]
        fn inverse_composes_to_identity(pose in pose_strategy()) {
            let id = pose.compose(&pose.inverse());
            prop_assert!(id.rotation.angle() < 1e-12);
            prop_assert!(id.translation.norm() < 1e-12);
        }
    }
}
