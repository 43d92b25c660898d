use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};

use super::CorrespondenceGraph;
use crate::geometry::{project, CameraIntrinsics, Pose, ScenePoint};
use crate::msm::{CameraId, PointId};

/// Which cameras carry the gauge: `fixed` at the identity pose and
/// `baseline` at unit distance from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gauge {
    pub fixed: CameraId,
    pub baseline: CameraId,
}

/// Plane with an orthonormal in-plane frame; points are
/// `origin + u e1 + v e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFrame {
    pub origin: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
}

impl PlaneFrame {
    /// Least-squares plane through the points: origin at the centroid, `e1`
    /// along the dominant direction. The normal is oriented towards
    /// `viewpoint`.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a ScenePoint>, viewpoint: &Vector3<f64>) -> Option<Self> {
        let pts: Vec<Vector3<f64>> = points.into_iter().map(|p| p.coords).collect();
        if pts.len() < 3 {
            return None;
        }
        let centroid = pts.iter().fold(Vector3::zeros(), |a, p| a + p) / pts.len() as f64;
        let cov = pts.iter().fold(Matrix3::zeros(), |a, p| {
            let d = p - centroid;
            a + d * d.transpose()
        });
        let eig = SymmetricEigen::new(cov);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        if !(eig.eigenvalues[order[1]] > 1e-12 * eig.eigenvalues[order[0]].max(1e-300)) {
            return None;
        }
        let e1: Vector3<f64> = eig.eigenvectors.column(order[0]).normalize();
        let mut n: Vector3<f64> = eig.eigenvectors.column(order[2]).normalize();
        if n.dot(&(viewpoint - centroid)) < 0.0 {
            n = -n;
        }
        let e2 = n.cross(&e1).normalize();
        Some(Self { origin: centroid, e1, e2 })
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.e1.cross(&self.e2)
    }

    /// Signed distance along the normal.
    pub fn distance(&self, x: &ScenePoint) -> f64 {
        self.normal().dot(&(x.coords - self.origin))
    }

    pub fn coordinates(&self, x: &ScenePoint) -> Vector2<f64> {
        let d = x.coords - self.origin;
        Vector2::new(self.e1.dot(&d), self.e2.dot(&d))
    }

    pub fn point(&self, uv: &Vector2<f64>) -> ScenePoint {
        ScenePoint::from(self.origin + self.e1 * uv.x + self.e2 * uv.y)
    }

    /// Orthogonal projection onto the plane.
    pub fn snap(&self, x: &ScenePoint) -> ScenePoint {
        self.point(&self.coordinates(x))
    }
}

/// Reprojection error summary for a set of residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReprojectionStats {
    pub count: usize,
    /// Mean Euclidean residual norm.
    pub mean_px: f64,
    /// Per-axis root mean square, `sqrt(sum |r|^2 / 2N)`.
    pub rms_px: f64,
    pub max_px: f64,
}

impl ReprojectionStats {
    pub fn from_norms(norms: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut count, mut sum, mut sum_sq, mut max) = (0usize, 0.0, 0.0, 0.0f64);
        for e in norms {
            count += 1;
            sum += e;
            sum_sq += e * e;
            max = max.max(e);
        }
        if count == 0 {
            return None;
        }
        let n = count as f64;
        Some(Self { count, mean_px: sum / n, rms_px: libm::sqrt(sum_sq / (2.0 * n)), max_px: max })
    }
}

/// Estimated poses and points in the solver gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub gauge: Gauge,
    pub poses: BTreeMap<CameraId, Pose>,
    pub points: BTreeMap<PointId, ScenePoint>,
    /// Present when the coplanarity constraint is active.
    pub plane: Option<PlaneFrame>,
    /// Input cameras that could not be registered.
    pub unregistered: BTreeSet<CameraId>,
    pub registration_order: Vec<CameraId>,
    /// Mean squared reprojection cost after the last bundle adjustment.
    pub final_cost: f64,
}

impl Reconstruction {
    pub fn new(gauge: Gauge, poses: BTreeMap<CameraId, Pose>) -> Self {
        Self {
            gauge,
            registration_order: poses.keys().copied().collect(),
            poses,
            points: BTreeMap::new(),
            plane: None,
            unregistered: BTreeSet::new(),
            final_cost: f64::NAN,
        }
    }

    pub fn is_registered(&self, camera: CameraId) -> bool {
        self.poses.contains_key(&camera)
    }

    /// Reprojection residual (predicted minus measured) of every observation
    /// of a triangulated point by a registered camera. Observations behind
    /// the camera are skipped.
    pub fn residuals(
        &self,
        graph: &CorrespondenceGraph,
        intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    ) -> Vec<(CameraId, PointId, Vector2<f64>)> {
        let mut out = Vec::new();
        for (&camera, pose) in &self.poses {
            let (Some(obs), Some(k)) = (graph.observations(camera), intrinsics.get(&camera)) else { continue };
            for (&point, &pixel) in obs {
                let Some(x) = self.points.get(&point) else { continue };
                if let Ok(p) = project(k, pose, x) {
                    out.push((camera, point, p.to_vector() - pixel.to_vector()));
                }
            }
        }
        out
    }

    pub fn camera_stats(
        &self,
        graph: &CorrespondenceGraph,
        intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    ) -> BTreeMap<CameraId, ReprojectionStats> {
        let mut norms: BTreeMap<CameraId, Vec<f64>> = BTreeMap::new();
        for (c, _, r) in self.residuals(graph, intrinsics) {
            norms.entry(c).or_default().push(r.norm());
        }
        norms.into_iter().filter_map(|(c, v)| ReprojectionStats::from_norms(v).map(|s| (c, s))).collect()
    }

    pub fn overall_stats(
        &self,
        graph: &CorrespondenceGraph,
        intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    ) -> Option<ReprojectionStats> {
        ReprojectionStats::from_norms(self.residuals(graph, intrinsics).into_iter().map(|r| r.2.norm()))
    }
}
