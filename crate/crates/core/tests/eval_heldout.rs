mod common;

use common::{grid_scene, perturb};
use nalgebra::Vector3;
use projcalib_core::eval::{evaluate, heldout_reprojection, EvalError, EvaluationInput};
use projcalib_core::simulator::simulate_heldout;
use projcalib_core::solver::{calibrate, Gauge, Reconstruction, SolverOptions};
use projcalib_core::{CameraId, ObservationSet};

fn ground_truth_recon(scene: &projcalib_core::simulator::SyntheticScene) -> Reconstruction {
    Reconstruction::new(Gauge { fixed: CameraId(0), baseline: CameraId(1) }, scene.rig.poses())
}

#[test]
fn perfect_poses_leave_the_refinement_residual() {
    let scene = grid_scene(6, 4, 0.2, 31);
    let (_, heldout) = simulate_heldout(&scene.config, &scene.sampled_rig(), 31).unwrap();
    let recon = ground_truth_recon(&scene);
    let report = heldout_reprojection(&recon, &heldout, &scene.rig.intrinsics()).unwrap();
    let lengths: Vec<usize> =
        heldout.tracks().values().map(|t| t.len()).filter(|&l| l >= 2).collect();
    let mean_len = lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
    // Each refined point absorbs three of the 2L measured coordinates.
    let expected = 0.2 * (1.0 - 3.0 / (2.0 * mean_len)).sqrt();
    let got = report.overall.rms_px;
    assert!((got - expected).abs() < 0.15 * expected, "{got} vs {expected}");
    assert_eq!(report.points.len(), lengths.len());
}

#[test]
fn grossly_wrong_poses_are_flagged() {
    let scene = grid_scene(6, 4, 0.2, 32);
    let (_, heldout) = simulate_heldout(&scene.config, &scene.sampled_rig(), 32).unwrap();
    let mut recon = ground_truth_recon(&scene);
    for (i, pose) in recon.poses.values_mut().enumerate() {
        let axis = Vector3::new(1.0, (i as f64).sin(), (i as f64).cos());
        *pose = perturb(pose, axis, 5.0, Vector3::zeros());
    }
    let report = heldout_reprojection(&recon, &heldout, &scene.rig.intrinsics()).unwrap();
    assert!(report.overall.mean_px > 5.0, "{:?}", report.overall);
}

#[test]
fn empty_heldout_set() {
    let scene = grid_scene(3, 0, 0.0, 1);
    let recon = ground_truth_recon(&scene);
    let err = heldout_reprojection(&recon, &ObservationSet::new(), &scene.rig.intrinsics());
    assert_eq!(err.unwrap_err(), EvalError::NoEvaluableTracks);
}

#[test]
fn full_evaluation_of_a_calibration() {
    let scene = grid_scene(6, 4, 0.3, 33);
    let (_, heldout) = simulate_heldout(&scene.config, &scene.sampled_rig(), 33).unwrap();
    let k = scene.rig.intrinsics();
    let recon = calibrate(&scene.observations, &k, &SolverOptions::default()).unwrap();
    let truth = scene.rig.poses();
    let report = evaluate(EvaluationInput {
        reconstruction: &recon,
        calibration: &scene.observations,
        intrinsics: &k,
        ground_truth_poses: Some(&truth),
        ground_truth_points: Some(&scene.points.points),
        heldout: Some(&heldout),
    })
    .unwrap();
    assert!(report.all_registered);
    assert_eq!(report.success, vec![100, 100, 100]);
    let points = report.points.unwrap();
    assert_eq!(points.count, recon.points.len());
    assert!(points.mean < 2e-3, "{points:?}");
    assert!(report.heldout.unwrap().mean_px < 0.5);
    assert!(report.cameras.values().all(|c| c.registered && c.rotation_error_deg.unwrap() < 0.05));
}
