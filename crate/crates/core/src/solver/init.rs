use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::register::{camera_seed, triangulate_track};
use super::{
    bundle_adjust, compute_view_score, BundleMode, CorrespondenceGraph, Gauge, PairScore, PlaneFrame, Reconstruction,
    SolverError, SolverOptions,
};
use crate::geometry::{
    estimate_homography_ransac, homography_motion_candidates, project, solve_pnp_ransac, CameraIntrinsics, GeometryError,
    HomographyMotion, NormalizedPoint, PixelPoint, Pose, ScenePoint,
};
use crate::msm::{CameraId, PointId};

/// Pairs whose median triangulation angle is below this are rejected as
/// (nearly) pure rotations.
pub const MIN_PAIR_PARALLAX_DEG: f64 = 2.0;

/// Most third-view cameras consulted to break a decomposition tie.
const DISAMBIGUATION_VIEWS: usize = 3;

/// The pair whose shared correspondences are best spread in both images.
///
/// Among pairs sharing at least `min_pair_matches` tracks, maximizes the
/// minimum (or, optionally, the sum) of the two view scores computed on the
/// shared correspondences. Ties go to the pair with more shared tracks, then
/// to the smaller ids.
pub fn select_initial_pair(
    graph: &CorrespondenceGraph,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Result<(CameraId, CameraId), SolverError> {
    rank_initial_pairs(graph, intrinsics, options).first().copied().ok_or(SolverError::NoValidPair)
}

/// Every eligible pair, best first, in the order of [`select_initial_pair`].
pub fn rank_initial_pairs(
    graph: &CorrespondenceGraph,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Vec<(CameraId, CameraId)> {
    let mut ranked: Vec<((u64, usize), (CameraId, CameraId))> = Vec::new();
    for ((a, b), count) in graph.pairs() {
        if count < options.min_pair_matches {
            continue;
        }
        let (Some(ka), Some(kb)) = (intrinsics.get(&a), intrinsics.get(&b)) else { continue };
        let shared = graph.shared(a, b);
        let sa = compute_view_score(shared.iter().map(|s| s.1), ka.width, ka.height);
        let sb = compute_view_score(shared.iter().map(|s| s.2), kb.width, kb.height);
        let combined = match options.pair_score {
            PairScore::Min => sa.min(sb),
            PairScore::Sum => sa + sb,
        };
        ranked.push(((combined, count), (a, b)));
    }
    // Pairs arrive in increasing id order and the sort is stable, so
    // remaining ties go to smaller ids.
    ranked.sort_by(|x, y| y.0.cmp(&x.0));
    ranked.into_iter().map(|r| r.1).collect()
}

/// Median angle, in degrees, between the rays from the two pair cameras to
/// the reconstructed points.
fn median_parallax_deg(recon: &Reconstruction, pair: (CameraId, CameraId)) -> f64 {
    let (ca, cb) = (recon.poses[&pair.0].center(), recon.poses[&pair.1].center());
    let mut angles: Vec<f64> = recon.points.values().map(|x| (x.coords - ca).angle(&(x.coords - cb))).collect();
    if angles.is_empty() {
        return 0.0;
    }
    let mid = angles.len() / 2;
    angles.select_nth_unstable_by(mid, f64::total_cmp);
    angles[mid].to_degrees()
}

fn triangulate_with(
    graph_tracks: &[(PointId, PixelPoint, PixelPoint)],
    pair: (CameraId, CameraId),
    motion: &Pose,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Reconstruction {
    let mut poses = BTreeMap::new();
    poses.insert(pair.0, Pose::identity());
    poses.insert(pair.1, *motion);
    let mut recon = Reconstruction::new(Gauge { fixed: pair.0, baseline: pair.1 }, poses);
    for &(p, xa, xb) in graph_tracks {
        if let Some(x) = triangulate_track(&recon, &[(pair.0, xa), (pair.1, xb)], intrinsics, options) {
            recon.points.insert(p, x);
        }
    }
    recon
}

/// The candidate whose triangulated points best explain up to three other
/// cameras, scored by truncated squared PnP reprojection error.
fn disambiguate(
    graph: &CorrespondenceGraph,
    pair: (CameraId, CameraId),
    tracks: &[(PointId, PixelPoint, PixelPoint)],
    candidates: &[HomographyMotion],
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> HomographyMotion {
    let mut views: Vec<(usize, CameraId)> = graph
        .cameras()
        .filter(|&c| c != pair.0 && c != pair.1 && intrinsics.contains_key(&c))
        .map(|c| {
            let obs = graph.observations(c).expect("camera from graph");
            (tracks.iter().filter(|t| obs.contains_key(&t.0)).count(), c)
        })
        .filter(|(n, _)| *n >= options.pnp_min_inliers)
        .collect();
    views.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    views.truncate(DISAMBIGUATION_VIEWS);
    let cap = options.ransac_threshold_px * options.ransac_threshold_px;
    let mut best = (f64::INFINITY, candidates[0]);
    for cand in candidates {
        let recon = triangulate_with(tracks, pair, &cand.pose, intrinsics, options);
        let mut cost = 0.0;
        for &(_, cam) in &views {
            let obs = graph.observations(cam).expect("camera from graph");
            let k = &intrinsics[&cam];
            let (xs, us): (Vec<ScenePoint>, Vec<PixelPoint>) =
                recon.points.iter().filter_map(|(p, x)| Some((*x, *obs.get(p)?))).unzip();
            let pose = solve_pnp_ransac(&xs, &us, k, options.ransac_threshold_px, camera_seed(options.seed, cam)).ok().map(|s| s.pose);
            for t in tracks.iter().filter(|t| obs.contains_key(&t.0)) {
                let e2 = match (&pose, recon.points.get(&t.0)) {
                    (Some(pose), Some(x)) => project(k, pose, x).map_or(cap, |u| {
                        let d = u.distance(obs[&t.0]);
                        d * d
                    }),
                    _ => cap,
                };
                cost += e2.min(cap);
            }
        }
        if cost < best.0 {
            best = (cost, *cand);
        }
    }
    best.1
}

/// Two-camera reconstruction from the floor homography between the views.
///
/// The first camera is placed at the identity and the second at unit
/// distance. The two-fold ambiguity of a planar homography (both solutions
/// keep all points in front) is resolved with other cameras seeing the same
/// tracks; with no such camera the cheirality ranking decides. The inlier
/// tracks are triangulated (at least `min_pair_matches` must succeed) and
/// refined by a two-view bundle adjustment; in coplanar mode a plane is then fitted and the points are snapped onto it.
pub fn initialize_pair(
    graph: &CorrespondenceGraph,
    pair: (CameraId, CameraId),
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Result<Reconstruction, SolverError> {
    let (a, b) = pair;
    let ka = intrinsics.get(&a).ok_or(SolverError::MissingIntrinsics(a))?;
    let kb = intrinsics.get(&b).ok_or(SolverError::MissingIntrinsics(b))?;
    let shared = graph.shared(a, b);
    let matches: Vec<(NormalizedPoint, NormalizedPoint)> =
        shared.iter().map(|&(_, xa, xb)| (ka.normalize(xa), kb.normalize(xb))).collect();
    let (h, mask) =
        estimate_homography_ransac(&matches, ka.mean_focal(), kb.mean_focal(), options.ransac_threshold_px, options.seed)
            .map_err(SolverError::InitializationFailed)?;
    let inlier_tracks: Vec<_> = shared.iter().zip(&mask).filter(|(_, &m)| m).map(|(s, _)| *s).collect();
    let inlier_matches: Vec<_> = matches.iter().zip(&mask).filter(|(_, &m)| m).map(|(m, _)| *m).collect();
    let candidates = homography_motion_candidates(&h, &inlier_matches).map_err(SolverError::InitializationFailed)?;
    let top = candidates[0].in_front;
    let slack = 0.05 * inlier_matches.len() as f64;
    let plausible: Vec<HomographyMotion> =
        candidates.iter().copied().filter(|c| c.in_front > 0 && ((top - c.in_front) as f64) < slack).collect();
    if plausible.is_empty() {
        return Err(SolverError::InitializationFailed(GeometryError::DegenerateGeometry("no candidate motion has points in front")));
    }
    let motion = if plausible.len() == 1 {
        plausible[0]
    } else {
        disambiguate(graph, pair, &inlier_tracks, &plausible, intrinsics, options)
    };
    let mut recon = triangulate_with(&inlier_tracks, pair, &motion.pose, intrinsics, options);
    let needed = options.min_pair_matches.max(options.pnp_min_inliers);
    if recon.points.len() < needed {
        return Err(SolverError::InitializationFailed(GeometryError::InsufficientMatches {
            needed,
            got: recon.points.len(),
        }));
    }
    bundle_adjust(&mut recon, graph, intrinsics, options, BundleMode::Pair)?;
    if median_parallax_deg(&recon, pair) < MIN_PAIR_PARALLAX_DEG {
        return Err(SolverError::InitializationFailed(GeometryError::DegenerateGeometry("insufficient parallax")));
    }
    if options.coplanar {
        let viewpoint = recon.poses[&a].center();
        let plane = PlaneFrame::fit(recon.points.values(), &viewpoint)
            .ok_or(SolverError::InitializationFailed(GeometryError::DegenerateGeometry("points do not span a plane")))?;
        for x in recon.points.values_mut() {
            *x = plane.snap(x);
        }
        recon.plane = Some(plane);
    }
    Ok(recon)
}
