use nalgebra::{Matrix2x3, Point3, Vector2, Vector3};

use super::{GeometryError, Pose};

/// A 3D point in scene units.
pub type ScenePoint = Point3<f64>;

/// An undistorted image measurement in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.u, self.v)
    }

    pub fn from_vector(v: Vector2<f64>) -> Self {
        Self::new(v.x, v.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

/// Image coordinates with the intrinsics removed, i.e. `K^-1 [u v 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormalizedPoint {
    pub x: f64,
    pub y: f64,
}

impl NormalizedPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn homogeneous(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, 1.0)
    }
}

/// Known pinhole intrinsics of one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    /// Square pixels with the principal point at the image center.
    pub fn centered(focal: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        Self::new(focal, focal, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics("focal lengths must be positive"));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64 && self.cy > 0.0 && self.cy < self.height as f64) {
            return Err(GeometryError::InvalidIntrinsics("principal point outside the image"));
        }
        Ok(())
    }

    pub fn mean_focal(&self) -> f64 {
        0.5 * (self.fx + self.fy)
    }

    pub fn normalize(&self, p: PixelPoint) -> NormalizedPoint {
        NormalizedPoint::new((p.u - self.cx) / self.fx, (p.v - self.cy) / self.fy)
    }

    pub fn denormalize(&self, p: NormalizedPoint) -> PixelPoint {
        PixelPoint::new(self.fx * p.x + self.cx, self.fy * p.y + self.cy)
    }

    /// Whether the pixel lies inside `[0, width) x [0, height)`.
    pub fn contains(&self, p: PixelPoint) -> bool {
        p.u >= 0.0 && p.v >= 0.0 && p.u < self.width as f64 && p.v < self.height as f64
    }

    /// Pixel of a point given in camera coordinates.
    pub fn project_camera_point(&self, x_cam: &Vector3<f64>) -> Result<PixelPoint, GeometryError> {
        if x_cam.z <= 1e-12 {
            return Err(GeometryError::NonPositiveDepth { depth: x_cam.z });
        }
        Ok(self.denormalize(NormalizedPoint::new(x_cam.x / x_cam.z, x_cam.y / x_cam.z)))
    }
}

/// Pixel of a camera-frame point and the 2x3 Jacobian of the pixel with
/// respect to that point.
pub(crate) fn project_with_jacobian(
    k: &CameraIntrinsics,
    x_cam: &Vector3<f64>,
) -> Result<(PixelPoint, Matrix2x3<f64>), GeometryError> {
    let px = k.project_camera_point(x_cam)?;
    let iz = 1.0 / x_cam.z;
    let jac = Matrix2x3::new(
        k.fx * iz,
        0.0,
        -k.fx * x_cam.x * iz * iz,
        0.0,
        k.fy * iz,
        -k.fy * x_cam.y * iz * iz,
    );
    Ok((px, jac))
}

/// Perspective projection `π(K, P, X)`.
pub fn project(intrinsics: &CameraIntrinsics, pose: &Pose, point: &ScenePoint) -> Result<PixelPoint, GeometryError> {
    intrinsics.project_camera_point(&pose.transform_point(point))
}
