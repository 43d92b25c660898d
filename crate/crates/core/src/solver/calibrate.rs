use alloc::collections::BTreeMap;

use super::{
    bundle_adjust, initialize_pair, rank_initial_pairs, register_next_camera, triangulate_tracks, BundleMode,
    CorrespondenceGraph, Reconstruction, SolverError, SolverOptions,
};
use crate::geometry::CameraIntrinsics;
use crate::msm::{CameraId, ObservationSet};

/// Initializes from the best-ranked pair that yields a valid two-view
/// reconstruction; the first failure is reported when none does.
fn initialize_best_pair(
    graph: &CorrespondenceGraph,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Result<Reconstruction, SolverError> {
    let mut first_error = None;
    for pair in rank_initial_pairs(graph, intrinsics, options) {
        match initialize_pair(graph, pair, intrinsics, options) {
            Ok(recon) => return Ok(recon),
            Err(e @ SolverError::InitializationFailed(_)) => {
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(first_error.unwrap_or(SolverError::NoValidPair))
}

/// Full incremental calibration.
///
/// Select pair (falling back to the next-ranked pair when initialization
/// fails), initialize, then repeat {register the next camera,
/// triangulate, intermediate bundle adjustment, re-triangulate} until no
/// camera can be registered, and finish with a global bundle adjustment.
/// Cameras that never get registered are listed in
/// [`Reconstruction::unregistered`].
pub fn calibrate(
    observations: &ObservationSet,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
) -> Result<Reconstruction, SolverError> {
    options.validate()?;
    if let Some(c) = observations.cameras().into_iter().find(|c| !intrinsics.contains_key(c)) {
        return Err(SolverError::MissingIntrinsics(c));
    }
    let graph = CorrespondenceGraph::new(observations);
    let mut recon = initialize_best_pair(&graph, intrinsics, options)?;
    loop {
        match register_next_camera(&mut recon, &graph, intrinsics, options) {
            Ok(_) => {}
            Err(SolverError::NoRegistrableCamera) => break,
            Err(e) => return Err(e),
        }
        triangulate_tracks(&mut recon, &graph, intrinsics, options);
        bundle_adjust(&mut recon, &graph, intrinsics, options, BundleMode::Intermediate)?;
        triangulate_tracks(&mut recon, &graph, intrinsics, options);
    }
    bundle_adjust(&mut recon, &graph, intrinsics, options, BundleMode::Global)?;
    recon.unregistered = intrinsics.keys().copied().filter(|c| !recon.is_registered(*c)).collect();
    Ok(recon)
}
