use alloc::vec::Vec;
use nalgebra::{DMatrix, Matrix2, Matrix3, Rotation3, UnitQuaternion, Vector2, Vector3};

use super::ransac::{ransac, RansacConfig};
use super::{triangulate_normalized, GeometryError, NormalizedPoint, Pose};
use crate::math::{closest_rotation, collinearity, normalizing_transform, null_vector, sq};

/// Fewest RANSAC inliers accepted for an inter-image homography.
pub const MIN_HOMOGRAPHY_CONSENSUS: usize = 12;

/// Planar projective map, stored with unit Frobenius norm and a positive
/// largest-magnitude entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    matrix: Matrix3<f64>,
}

impl Homography {
    pub fn new(matrix: Matrix3<f64>) -> Result<Self, GeometryError> {
        let norm = matrix.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GeometryError::SingularHomography);
        }
        let mut m = matrix / norm;
        if m.determinant().abs() < 1e-14 {
            return Err(GeometryError::SingularHomography);
        }
        let largest = m.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if largest < 0.0 {
            m = -m;
        }
        Ok(Self { matrix: m })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        let inv = self.matrix.try_inverse().expect("canonical homographies are invertible");
        Self::new(inv).expect("inverse of a regular matrix is regular")
    }

    /// Maps a point, or `None` when it lands on the line at infinity.
    pub fn transfer(&self, p: &Vector2<f64>) -> Option<Vector2<f64>> {
        let q = self.matrix * Vector3::new(p.x, p.y, 1.0);
        if q.z.abs() < 1e-300 {
            return None;
        }
        Some(Vector2::new(q.x / q.z, q.y / q.z))
    }
}

/// Normalized DLT fit `dst ~ H src` over at least four correspondences.
/// Returns `None` for rank-deficient configurations.
pub fn homography_dlt(src: &[Vector2<f64>], dst: &[Vector2<f64>]) -> Option<Homography> {
    let n = src.len();
    if n < 4 || dst.len() != n {
        return None;
    }
    if spread_is_degenerate(src) || spread_is_degenerate(dst) {
        return None;
    }
    let ts = normalizing_transform(src);
    let td = normalizing_transform(dst);
    let mut a = DMatrix::zeros(2 * n, 9);
    for i in 0..n {
        let s = ts * Vector3::new(src[i].x, src[i].y, 1.0);
        let d = td * Vector3::new(dst[i].x, dst[i].y, 1.0);
        let (x, y) = (s.x / s.z, s.y / s.z);
        let (u, v) = (d.x / d.z, d.y / d.z);
        let r = 2 * i;
        a[(r, 3)] = -x;
        a[(r, 4)] = -y;
        a[(r, 5)] = -1.0;
        a[(r, 6)] = v * x;
        a[(r, 7)] = v * y;
        a[(r, 8)] = v;
        a[(r + 1, 0)] = x;
        a[(r + 1, 1)] = y;
        a[(r + 1, 2)] = 1.0;
        a[(r + 1, 6)] = -u * x;
        a[(r + 1, 7)] = -u * y;
        a[(r + 1, 8)] = -u;
    }
    let (h, sv) = null_vector(&a);
    // A second (near) null direction means the fit is not unique.
    if sv[1] <= 1e-12 * sv[sv.len() - 1] {
        return None;
    }
    let hn = Matrix3::from_row_slice(h.as_slice());
    let m = td.try_inverse()? * hn * ts;
    Homography::new(m).ok()
}

fn spread_is_degenerate(points: &[Vector2<f64>]) -> bool {
    let n = points.len() as f64;
    let c = points.iter().fold(Vector2::zeros(), |acc, p| acc + p) / n;
    let cov = points.iter().fold(Matrix2::zeros(), |acc, p| {
        let d = p - c;
        acc + d * d.transpose()
    });
    let eig = cov.symmetric_eigenvalues();
    let (lo, hi) = if eig[0] < eig[1] { (eig[0], eig[1]) } else { (eig[1], eig[0]) };
    !(hi > 0.0) || lo <= 1e-10 * hi
}

fn sample_is_degenerate(points: &[Vector2<f64>; 4]) -> bool {
    const MIN_SINE: f64 = 1e-3;
    let idx = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
    idx.iter().any(|&(i, j, k)| collinearity(&points[i], &points[j], &points[k]) < MIN_SINE)
}

/// Symmetric transfer error in pixels: the normalized residual on each side
/// is scaled by that camera's mean focal length, and the two sides are
/// combined as a root mean square.
fn symmetric_transfer_px(
    h: &Homography,
    h_inv: &Homography,
    a: &Vector2<f64>,
    b: &Vector2<f64>,
    focal_a: f64,
    focal_b: f64,
) -> f64 {
    let (Some(fwd), Some(bwd)) = (h.transfer(a), h_inv.transfer(b)) else {
        return f64::INFINITY;
    };
    let eb = focal_b * (fwd - b).norm();
    let ea = focal_a * (bwd - a).norm();
    libm::sqrt(0.5 * (ea * ea + eb * eb))
}

/// RANSAC homography between the normalized measurements of two cameras.
///
/// The threshold is in pixels; `focal_a` and `focal_b` (mean focal lengths)
/// convert normalized residuals back to pixels. The final model is refit on
/// all inliers.
pub fn estimate_homography_ransac(
    matches: &[(NormalizedPoint, NormalizedPoint)],
    focal_a: f64,
    focal_b: f64,
    threshold_px: f64,
    seed: u64,
) -> Result<(Homography, Vec<bool>), GeometryError> {
    if matches.len() < 4 {
        return Err(GeometryError::InsufficientMatches { needed: 4, got: matches.len() });
    }
    let src: Vec<Vector2<f64>> = matches.iter().map(|m| m.0.to_vector()).collect();
    let dst: Vec<Vector2<f64>> = matches.iter().map(|m| m.1.to_vector()).collect();
    let config = RansacConfig::new(threshold_px, seed);
    let consensus = ransac(
        matches.len(),
        4,
        &config,
        |s| {
            let a = [src[s[0]], src[s[1]], src[s[2]], src[s[3]]];
            let b = [dst[s[0]], dst[s[1]], dst[s[2]], dst[s[3]]];
            if sample_is_degenerate(&a) || sample_is_degenerate(&b) {
                return None;
            }
            let h = homography_dlt(&a, &b)?;
            Some((h, h.inverse()))
        },
        |(h, hi), i| symmetric_transfer_px(h, hi, &src[i], &dst[i], focal_a, focal_b),
    );
    let no_consensus = |inliers| GeometryError::NoConsensus { inliers, required: MIN_HOMOGRAPHY_CONSENSUS };
    let Some(consensus) = consensus else {
        return Err(no_consensus(0));
    };
    if consensus.count < MIN_HOMOGRAPHY_CONSENSUS {
        return Err(no_consensus(consensus.count));
    }
    let mut h = consensus.model.0;
    let mut mask = consensus.inliers;
    for _ in 0..3 {
        let (s, d): (Vec<_>, Vec<_>) = mask
            .iter()
            .zip(src.iter().zip(dst.iter()))
            .filter(|(&m, _)| m)
            .map(|(_, (a, b))| (*a, *b))
            .unzip();
        let Some(refit) = homography_dlt(&s, &d) else {
            return Err(no_consensus(0));
        };
        let refit_inv = refit.inverse();
        let new_mask: Vec<bool> = (0..src.len())
            .map(|i| symmetric_transfer_px(&refit, &refit_inv, &src[i], &dst[i], focal_a, focal_b) < threshold_px)
            .collect();
        h = refit;
        let unchanged = new_mask == mask;
        mask = new_mask;
        if unchanged {
            break;
        }
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count < MIN_HOMOGRAPHY_CONSENSUS {
        return Err(no_consensus(count));
    }
    Ok((h, mask))
}

/// One physically distinct factorization `H ∝ R + t nᵀ / d` of a calibrated
/// homography.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomographyMotion {
    /// Motion from the first camera frame into the second, `|t| = 1`.
    pub pose: Pose,
    /// Plane normal in the first camera frame; the plane is `n·X = distance`.
    pub normal: Vector3<f64>,
    /// Plane distance from the first camera, in units of the baseline.
    pub distance: f64,
    /// Correspondences triangulated in front of both cameras.
    pub in_front: usize,
    /// Mean relative deviation of the triangulated points from the plane.
    pub plane_residual: f64,
}

/// All candidate decompositions, best first (most points in front of both
/// cameras, then most consistent with their plane).
///
/// The sign of `H` is fixed from the correspondences before factoring, so
/// the four returned candidates are the two `(R, t, n)` solutions and their
/// `(R, -t, -n)` mirrors.
pub fn homography_motion_candidates(
    h: &Homography,
    inliers: &[(NormalizedPoint, NormalizedPoint)],
) -> Result<Vec<HomographyMotion>, GeometryError> {
    if inliers.len() < 4 {
        return Err(GeometryError::InsufficientMatches { needed: 4, got: inliers.len() });
    }
    let svd = h.matrix().svd(false, true);
    let mut sv: Vec<(f64, Vector3<f64>)> = (0..3)
        .map(|i| (svd.singular_values[i], svd.v_t.expect("requested V^T").row(i).transpose()))
        .collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut hn = h.matrix() / sv[1].0;
    let positive = inliers
        .iter()
        .filter(|(a, b)| b.homogeneous().dot(&(hn * a.homogeneous())) > 0.0)
        .count();
    if 2 * positive < inliers.len() {
        hn = -hn;
    }
    let s1 = sq(sv[0].0 / sv[1].0);
    let s3 = sq(sv[2].0 / sv[1].0);
    if s1 - s3 < 1e-12 {
        // Pure rotation: the translation direction is unobservable.
        return Err(GeometryError::AmbiguousDecomposition { best: inliers.len(), second: inliers.len() });
    }
    let mut v = nalgebra::Matrix3::from_columns(&[sv[0].1, sv[1].1, sv[2].1]);
    if v.determinant() < 0.0 {
        v = -v;
    }
    let (v1, v2, v3) = (v.column(0).into_owned(), v.column(1).into_owned(), v.column(2).into_owned());
    let a = libm::sqrt((1.0 - s3).max(0.0));
    let b = libm::sqrt((s1 - 1.0).max(0.0));
    let c = libm::sqrt(s1 - s3);
    let mut candidates = Vec::with_capacity(4);
    for u in [(v1 * a + v3 * b) / c, (v1 * a - v3 * b) / c] {
        let basis = Matrix3::from_columns(&[v2, u, v2.cross(&u)]);
        let hv2 = hn * v2;
        let hu = hn * u;
        let image = Matrix3::from_columns(&[hv2, hu, hv2.cross(&hu)]);
        let r = closest_rotation(&(image * basis.transpose()));
        let n = v2.cross(&u).normalize();
        let t = (hn - r.matrix()) * n;
        for sign in [1.0, -1.0] {
            candidates.push(score_candidate(&r, &(t * sign), &(n * sign), inliers));
        }
    }
    candidates.sort_by(|x, y| y.in_front.cmp(&x.in_front).then(x.plane_residual.total_cmp(&y.plane_residual)));
    Ok(candidates)
}

fn score_candidate(
    r: &Rotation3<f64>,
    t: &Vector3<f64>,
    n: &Vector3<f64>,
    inliers: &[(NormalizedPoint, NormalizedPoint)],
) -> HomographyMotion {
    // With |t| rescaled to one, the plane distance becomes 1/|t|.
    let t_norm = t.norm();
    let pose = Pose::new(UnitQuaternion::from_rotation_matrix(r), t / t_norm);
    let distance = 1.0 / t_norm;
    let identity = Pose::identity();
    let mut in_front = 0;
    let mut residual = 0.0;
    for (a, b) in inliers {
        let Ok(x) = triangulate_normalized(&identity, &pose, *a, *b) else { continue };
        if x.z > 0.0 && pose.transform_point(&x).z > 0.0 {
            in_front += 1;
            residual += (n.dot(&x.coords) - distance).abs() / distance;
        }
    }
    let plane_residual = if in_front > 0 { residual / in_front as f64 } else { f64::INFINITY };
    HomographyMotion { pose, normal: *n, distance, in_front, plane_residual }
}

/// Relative motion and plane normal of a calibrated inter-image homography,
/// disambiguated by cheirality of the inliers.
///
/// Fails with [`GeometryError::AmbiguousDecomposition`] when the two best
/// candidates keep nearly the same number of points in front of both
/// cameras (within 5% of the inliers); for a single plane seen by two views
/// this is the generic two-fold ambiguity and more views are needed.
pub fn decompose_homography(
    h: &Homography,
    inliers: &[(NormalizedPoint, NormalizedPoint)],
) -> Result<HomographyMotion, GeometryError> {
    let candidates = homography_motion_candidates(h, inliers)?;
    let best = candidates[0];
    if let Some(second) = candidates.get(1) {
        if ((best.in_front - second.in_front) as f64) < 0.05 * inliers.len() as f64 {
            return Err(GeometryError::AmbiguousDecomposition { best: best.in_front, second: second.in_front });
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct PlaneScene {
        motion: Pose,
        normal: Vector3<f64>,
        distance: f64,
        matches: Vec<(NormalizedPoint, NormalizedPoint)>,
    }

    /// Plane `n·X = d` in the first camera frame; points are sampled on it
    /// and kept only when they are in front of both cameras and inside a
    /// 90° field of view.
    fn plane_scene(rng: &mut ChaCha8Rng, count: usize) -> PlaneScene {
        loop {
            let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let rot = UnitQuaternion::from_scaled_axis(axis.normalize() * rng.random_range(0.05..0.8));
            let t = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.3..0.3));
            let n = Vector3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), -1.0).normalize();
            let n = -n;
            let d = rng.random_range(2.0..5.0);
            let motion = Pose::new(rot, t);
            let mut matches = Vec::new();
            for _ in 0..20 * count {
                if matches.len() == count {
                    break;
                }
                let ray = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0);
                let depth = d / n.dot(&ray);
                if depth <= 0.0 {
                    continue;
                }
                let x1 = ray * depth;
                let x2 = motion.transform_point(&x1.into());
                if x2.z <= 0.0 || (x2.x / x2.z).abs() > 1.0 || (x2.y / x2.z).abs() > 1.0 {
                    continue;
                }
                matches.push((NormalizedPoint::new(ray.x, ray.y), NormalizedPoint::new(x2.x / x2.z, x2.y / x2.z)));
            }
            if matches.len() == count {
                return PlaneScene { motion, normal: n, distance: d, matches };
            }
        }
    }

    fn compose(scene: &PlaneScene) -> Homography {
        let r = scene.motion.rotation_matrix();
        Homography::new(r + scene.motion.translation * scene.normal.transpose() / scene.distance).unwrap()
    }

    #[test]
    fn canonical_form() {
        let h = Homography::new(Matrix3::new(-2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0)).unwrap();
        assert!((h.matrix().norm() - 1.0).abs() < 1e-15);
        assert!(h.matrix()[(0, 0)] > 0.0);
        assert!(Homography::new(Matrix3::zeros()).is_err());
        let singular = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0);
        assert_eq!(Homography::new(singular), Err(GeometryError::SingularHomography));
    }

    #[test]
    fn ransac_exact_planar_scene() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scene = plane_scene(&mut rng, 100);
        let (h, mask) = estimate_homography_ransac(&scene.matches, 915.0, 915.0, 3.0, 42).unwrap();
        assert!(mask.iter().all(|&m| m));
        let hi = h.inverse();
        for (a, b) in &scene.matches {
            let e = symmetric_transfer_px(&h, &hi, &a.to_vector(), &b.to_vector(), 915.0, 915.0);
            assert!(e < 1e-9, "{e}");
        }
    }

    #[test]
    fn ransac_rejects_planted_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut scene = plane_scene(&mut rng, 100);
        let mut planted = [false; 100];
        for i in 0..30 {
            let j = i * 3 + 1;
            planted[j] = true;
            scene.matches[j].1 = NormalizedPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let (_, mask) = estimate_homography_ransac(&scene.matches, 915.0, 915.0, 3.0, 9).unwrap();
        for i in 0..100 {
            assert_eq!(mask[i], !planted[i], "match {i}");
        }
    }

    #[test]
    fn ransac_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut scene = plane_scene(&mut rng, 60);
        for i in 0..60 {
            let (a, b) = &mut scene.matches[i];
            a.x += rng.random_range(-1e-3..1e-3);
            b.y += rng.random_range(-1e-3..1e-3);
        }
        let r1 = estimate_homography_ransac(&scene.matches, 915.0, 915.0, 3.0, 77).unwrap();
        let r2 = estimate_homography_ransac(&scene.matches, 915.0, 915.0, 3.0, 77).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn ransac_input_errors() {
        let m = [(NormalizedPoint::default(), NormalizedPoint::default()); 3];
        assert_eq!(
            estimate_homography_ransac(&m, 1.0, 1.0, 3.0, 0),
            Err(GeometryError::InsufficientMatches { needed: 4, got: 3 })
        );
        // Collinear correspondences cannot determine a homography.
        let line: Vec<_> = (0..40)
            .map(|i| {
                let x = i as f64 * 0.01;
                (NormalizedPoint::new(x, 2.0 * x), NormalizedPoint::new(x + 0.1, 2.0 * x))
            })
            .collect();
        assert!(matches!(estimate_homography_ransac(&line, 900.0, 900.0, 3.0, 0), Err(GeometryError::NoConsensus { .. })));
    }

    #[test]
    fn decomposition_contains_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let scene = plane_scene(&mut rng, 40);
            let h = compose(&scene);
            let cands = homography_motion_candidates(&h, &scene.matches).unwrap();
            let t_dir = scene.motion.translation.normalize();
            let found = cands.iter().take(2).any(|c| {
                c.in_front == scene.matches.len()
                    && c.pose.rotation.angle_to(&scene.motion.rotation) < 1e-6
                    && c.pose.translation.angle(&t_dir) < 1e-6
                    && c.normal.angle(&scene.normal) < 1e-6
            });
            assert!(found);
        }
    }

    #[test]
    fn mirrored_factorization_is_rejected() {
        // Flipping (t, n) leaves H unchanged; the mirror must always lose.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scene = plane_scene(&mut rng, 50);
        let mirrored = PlaneScene {
            motion: Pose::new(scene.motion.rotation, -scene.motion.translation),
            normal: -scene.normal,
            distance: scene.distance,
            matches: scene.matches.clone(),
        };
        assert_eq!(compose(&scene), compose(&mirrored));
        let cands = homography_motion_candidates(&compose(&scene), &scene.matches).unwrap();
        assert_eq!(cands[0].in_front, scene.matches.len());
        for c in cands.iter().filter(|c| c.in_front == scene.matches.len()) {
            let mirror = cands
                .iter()
                .find(|m| m.pose.rotation.angle_to(&c.pose.rotation) < 1e-12 && (m.pose.translation + c.pose.translation).norm() < 1e-12)
                .unwrap();
            assert_eq!(mirror.in_front, 0);
            assert!(c.distance > 0.0);
        }
    }

    #[test]
    fn identity_homography_is_pure_rotation() {
        let m: Vec<_> = (0..20)
            .map(|i| {
                let p = NormalizedPoint::new((i % 5) as f64 * 0.1, (i / 5) as f64 * 0.1);
                (p, p)
            })
            .collect();
        let h = Homography::new(Matrix3::identity()).unwrap();
        match decompose_homography(&h, &m) {
            Ok(motion) => assert!(motion.pose.rotation.angle() < 1e-9),
            Err(e) => assert!(matches!(e, GeometryError::AmbiguousDecomposition { .. })),
        }
    }
}
