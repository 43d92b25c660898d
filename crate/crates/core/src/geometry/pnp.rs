use alloc::vec::Vec;
use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, Matrix6, SymmetricEigen, UnitQuaternion, Vector2, Vector3, Vector6};

use super::camera::project_with_jacobian;
use super::ransac::{ransac, RansacConfig};
use super::{homography_dlt, CameraIntrinsics, GeometryError, PixelPoint, Pose, ScenePoint};
use crate::math::{closest_rotation, normalizing_transform, null_vector, skew};

const SAMPLE_SIZE: usize = 6;
/// Samples whose smallest-to-largest spread ratio falls below this are
/// treated as planar.
const PLANAR_SPREAD_RATIO: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct PnpSolution {
    pub pose: Pose,
    pub inliers: Vec<bool>,
    pub inlier_count: usize,
}

/// Robust camera pose from 2D-3D correspondences.
///
/// Each RANSAC hypothesis comes from a six-point linear solve: the DLT of the
/// full projection matrix when the sample spans 3D, or a plane-to-image
/// homography when the sample is (nearly) coplanar, where the 3D DLT has no
/// unique solution. The best hypothesis is refined by Levenberg-Marquardt on
/// its inliers and the mask is recomputed with the refined pose.
pub fn solve_pnp_ransac(
    points3d: &[ScenePoint],
    points2d: &[PixelPoint],
    intrinsics: &CameraIntrinsics,
    threshold_px: f64,
    seed: u64,
) -> Result<PnpSolution, GeometryError> {
    let n = points3d.len().min(points2d.len());
    if n < SAMPLE_SIZE || points3d.len() != points2d.len() {
        return Err(GeometryError::InsufficientMatches { needed: SAMPLE_SIZE, got: n });
    }
    let reproj = |pose: &Pose, i: usize| -> f64 {
        match super::project(intrinsics, pose, &points3d[i]) {
            Ok(px) => px.distance(points2d[i]),
            Err(_) => f64::INFINITY,
        }
    };
    let config = RansacConfig::new(threshold_px, seed);
    let consensus = ransac(
        n,
        SAMPLE_SIZE,
        &config,
        |s| {
            let xs: Vec<ScenePoint> = s.iter().map(|&i| points3d[i]).collect();
            let us: Vec<Vector2<f64>> = s.iter().map(|&i| intrinsics.normalize(points2d[i]).to_vector()).collect();
            linear_pose(&xs, &us)
        },
        |pose, i| reproj(pose, i),
    );
    let no_consensus = |inliers| GeometryError::NoConsensus { inliers, required: SAMPLE_SIZE };
    let Some(consensus) = consensus else {
        return Err(no_consensus(0));
    };
    if consensus.count < SAMPLE_SIZE {
        return Err(no_consensus(consensus.count));
    }
    let mut pose = consensus.model;
    let mut mask = consensus.inliers;
    for _ in 0..3 {
        let (xs, us): (Vec<ScenePoint>, Vec<PixelPoint>) =
            (0..n).filter(|&i| mask[i]).map(|i| (points3d[i], points2d[i])).unzip();
        pose = refine_pose(&pose, &xs, &us, intrinsics, 50);
        let new_mask: Vec<bool> = (0..n).map(|i| reproj(&pose, i) < threshold_px).collect();
        let unchanged = new_mask == mask;
        mask = new_mask;
        if unchanged {
            break;
        }
    }
    let inlier_count = mask.iter().filter(|&&m| m).count();
    if inlier_count < SAMPLE_SIZE {
        return Err(no_consensus(inlier_count));
    }
    Ok(PnpSolution { pose, inliers: mask, inlier_count })
}

/// Linear pose from at least six points; `image` holds normalized coordinates.
pub(crate) fn linear_pose(points: &[ScenePoint], image: &[Vector2<f64>]) -> Option<Pose> {
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
    let cov = points.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p.coords - centroid;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]];
    if !(largest > 0.0) {
        return None;
    }
    let ratio = libm::sqrt(eig.eigenvalues[order[2]].max(0.0) / largest);
    if ratio < PLANAR_SPREAD_RATIO {
        let e1 = eig.eigenvectors.column(order[0]).into_owned();
        let e2 = eig.eigenvectors.column(order[1]).into_owned();
        planar_pose(points, image, &centroid, &e1, &e2)
    } else {
        dlt_pose(points, image, &centroid)
    }
}

fn dlt_pose(points: &[ScenePoint], image: &[Vector2<f64>], centroid: &Vector3<f64>) -> Option<Pose> {
    let n = points.len();
    let mean_dist = points.iter().map(|p| (p.coords - centroid).norm()).sum::<f64>() / n as f64;
    if !(mean_dist > 0.0) {
        return None;
    }
    let s3 = libm::sqrt(3.0) / mean_dist;
    let mut t3 = Matrix4::identity() * s3;
    t3[(3, 3)] = 1.0;
    t3.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-centroid * s3));
    let t2 = normalizing_transform(image);
    let mut a = DMatrix::zeros(2 * n, 12);
    for i in 0..n {
        let xs = (points[i].coords - centroid) * s3;
        let x = [xs.x, xs.y, xs.z, 1.0];
        let u = t2 * Vector3::new(image[i].x, image[i].y, 1.0);
        let (u, v) = (u.x / u.z, u.y / u.z);
        for j in 0..4 {
            a[(2 * i, j)] = x[j];
            a[(2 * i, 8 + j)] = -u * x[j];
            a[(2 * i + 1, 4 + j)] = x[j];
            a[(2 * i + 1, 8 + j)] = -v * x[j];
        }
    }
    let (p, _) = null_vector(&a);
    let p_hat = Matrix3x4::from_row_slice(p.as_slice());
    let mut pm = t2.try_inverse()? * p_hat * t3;
    let mut m = pm.fixed_view::<3, 3>(0, 0).into_owned();
    let det = m.determinant();
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    if det < 0.0 {
        pm = -pm;
        m = -m;
    }
    let scale = libm::cbrt(det.abs());
    let r = closest_rotation(&(m / scale));
    let t = pm.column(3) / scale;
    Some(Pose::new(UnitQuaternion::from_rotation_matrix(&r), t))
}

fn planar_pose(
    points: &[ScenePoint],
    image: &[Vector2<f64>],
    origin: &Vector3<f64>,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
) -> Option<Pose> {
    let normal = e1.cross(e2).normalize();
    let e2 = normal.cross(e1);
    let plane: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| {
            let d = p.coords - origin;
            Vector2::new(e1.dot(&d), e2.dot(&d))
        })
        .collect();
    let g = homography_dlt(&plane, image)?;
    let g = g.matrix();
    let (g1, g2, g3) = (g.column(0).into_owned(), g.column(1).into_owned(), g.column(2).into_owned());
    let mut s = 2.0 / (g1.norm() + g2.norm());
    if g3.z * s < 0.0 {
        s = -s;
    }
    let r1 = g1 * s;
    let r2 = g2 * s;
    let t_plane = g3 * s;
    let r_plane = closest_rotation(&Matrix3::from_columns(&[r1, r2, r1.cross(&r2)]));
    let frame = Matrix3::from_columns(&[*e1, e2, normal]);
    let r = r_plane.matrix() * frame.transpose();
    let t = t_plane - r * origin;
    let r = closest_rotation(&r);
    Some(Pose::new(UnitQuaternion::from_rotation_matrix(&r), t))
}

/// Levenberg-Marquardt refinement of a single pose against pixel
/// measurements of known 3D points.
pub fn refine_pose(
    initial: &Pose,
    points: &[ScenePoint],
    pixels: &[PixelPoint],
    intrinsics: &CameraIntrinsics,
    max_iterations: usize,
) -> Pose {
    let cost = |pose: &Pose| -> f64 {
        points
            .iter()
            .zip(pixels)
            .map(|(x, u)| match super::project(intrinsics, pose, x) {
                Ok(px) => crate::math::sq(px.u - u.u) + crate::math::sq(px.v - u.v),
                Err(_) => 1e12,
            })
            .sum()
    };
    let mut pose = *initial;
    let mut current = cost(&pose);
    let mut lambda = 1e-3;
    for _ in 0..max_iterations {
        let mut jtj = Matrix6::zeros();
        let mut jtr = Vector6::zeros();
        for (x, u) in points.iter().zip(pixels) {
            let rx = pose.rotation * x.coords;
            let xc = rx + pose.translation;
            let Ok((px, dpx)) = project_with_jacobian(intrinsics, &xc) else { continue };
            let mut j = nalgebra::Matrix2x6::zeros();
            j.fixed_view_mut::<2, 3>(0, 0).copy_from(&(dpx * -skew(&rx)));
            j.fixed_view_mut::<2, 3>(0, 3).copy_from(&dpx);
            let r = Vector2::new(px.u - u.u, px.v - u.v);
            jtj += j.transpose() * j;
            jtr += j.transpose() * r;
        }
        let mut improved = false;
        while lambda < 1e10 {
            let mut a = jtj;
            for i in 0..6 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-jtr))) else {
                lambda *= 10.0;
                continue;
            };
            let candidate = Pose::new(
                UnitQuaternion::from_scaled_axis(step.fixed_rows::<3>(0).into_owned()) * pose.rotation,
                pose.translation + step.fixed_rows::<3>(3),
            );
            let c = cost(&candidate);
            if c < current {
                let decrease = (current - c) / current.max(1e-300);
                pose = candidate;
                current = c;
                lambda = (lambda * 0.1).max(1e-12);
                improved = decrease > 1e-12;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    pose
}
