use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{simulate_heldout, simulate_scene, Scenario, ScenarioConfig};
use crate::eval::{evaluate, EvaluationInput};
use crate::solver::{calibrate, SolverOptions};

/// Outcome of one simulate-calibrate-evaluate run. Metrics of failed runs
/// are NaN and `error` carries the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: Scenario,
    pub sigma: f64,
    pub trial: u32,
    pub seed: u64,
    pub cameras: usize,
    pub registered: usize,
    pub rot_rmse_deg: f64,
    pub trans_rmse: f64,
    /// Translation RMSE over the mean inter-camera distance.
    pub trans_rmse_rel: f64,
    /// Mean calibration reprojection error.
    pub mean_reproj_px: f64,
    /// Per-axis RMS calibration residual.
    pub rms_reproj_px: f64,
    pub heldout_mean_px: f64,
    pub heldout_rms_px: f64,
    /// All cameras registered.
    pub success: bool,
    pub error: Option<String>,
}

impl TrialRecord {
    fn failed(config: &ScenarioConfig, sigma: f64, trial: u32, seed: u64, error: String) -> Self {
        Self {
            scenario: config.scenario,
            sigma,
            trial,
            seed,
            cameras: config.camera_count(),
            registered: 0,
            rot_rmse_deg: f64::NAN,
            trans_rmse: f64::NAN,
            trans_rmse_rel: f64::NAN,
            mean_reproj_px: f64::NAN,
            rms_reproj_px: f64::NAN,
            heldout_mean_px: f64::NAN,
            heldout_rms_px: f64::NAN,
            success: false,
            error: Some(error),
        }
    }
}

/// Aggregate over the trials of one (scenario, sigma) cell. Means are over
/// the trials that produced a reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub scenario: Scenario,
    pub sigma: f64,
    pub trials: usize,
    pub failures: usize,
    pub rot_rmse_deg: f64,
    pub trans_rmse: f64,
    pub trans_rmse_rel: f64,
    pub mean_reproj_px: f64,
    pub rms_reproj_px: f64,
}

/// Runs one trial with seed `base_seed + trial`; the scene noise is `sigma`.
pub fn run_trial(config: &ScenarioConfig, sigma: f64, trial: u32, base_seed: u64, options: &SolverOptions) -> TrialRecord {
    let seed = base_seed.wrapping_add(u64::from(trial));
    let config = config.clone().with_sigma(sigma);
    let scene = match simulate_scene(&config, seed) {
        Ok(s) => s,
        Err(e) => return TrialRecord::failed(&config, sigma, trial, seed, format!("{e}")),
    };
    let heldout = match simulate_heldout(&config, &scene.sampled_rig(), seed) {
        Ok((_, obs)) => obs,
        Err(e) => return TrialRecord::failed(&config, sigma, trial, seed, format!("{e}")),
    };
    let intrinsics = scene.rig.intrinsics();
    let truth = scene.rig.poses();
    let options = SolverOptions { seed, ..options.clone() };
    let recon = match calibrate(&scene.observations, &intrinsics, &options) {
        Ok(r) => r,
        Err(e) => return TrialRecord::failed(&config, sigma, trial, seed, format!("{e}")),
    };
    let report = evaluate(EvaluationInput {
        reconstruction: &recon,
        calibration: &scene.observations,
        intrinsics: &intrinsics,
        ground_truth_poses: Some(&truth),
        ground_truth_points: Some(&scene.points.points),
        heldout: Some(&heldout),
    });
    let report = match report {
        Ok(r) => r,
        Err(e) => return TrialRecord::failed(&config, sigma, trial, seed, format!("{e}")),
    };
    let nan = f64::NAN;
    let (rot, trans) = report.pose.as_ref().map_or((nan, nan), |p| (p.rot_rmse_deg, p.trans_rmse));
    let (mean, rms) = report.calibration.map_or((nan, nan), |s| (s.mean_px, s.rms_px));
    let (h_mean, h_rms) = report.heldout.map_or((nan, nan), |s| (s.mean_px, s.rms_px));
    TrialRecord {
        scenario: config.scenario,
        sigma,
        trial,
        seed,
        cameras: scene.rig.len(),
        registered: recon.poses.len(),
        rot_rmse_deg: rot,
        trans_rmse: trans,
        trans_rmse_rel: trans / scene.rig.mean_inter_camera_distance(),
        mean_reproj_px: mean,
        rms_reproj_px: rms,
        heldout_mean_px: h_mean,
        heldout_rms_px: h_rms,
        success: report.all_registered,
        error: None,
    }
}

/// Serial sweep over `sigmas x 0..trials`, ordered by sigma then trial.
pub fn run_monte_carlo(
    config: &ScenarioConfig,
    sigmas: &[f64],
    trials: u32,
    base_seed: u64,
    options: &SolverOptions,
) -> Vec<TrialRecord> {
    sigmas
        .iter()
        .flat_map(|&s| (0..trials).map(move |t| (s, t)))
        .map(|(s, t)| run_trial(config, s, t, base_seed, options))
        .collect()
}

/// One curve point per (scenario, sigma), sorted by scenario then sigma.
pub fn summarize(records: &[TrialRecord]) -> Vec<CurvePoint> {
    let mut keys: Vec<(Scenario, f64)> = records.iter().map(|r| (r.scenario, r.sigma)).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    keys.into_iter()
        .map(|(scenario, sigma)| {
            let cell: Vec<&TrialRecord> =
                records.iter().filter(|r| r.scenario == scenario && r.sigma.total_cmp(&sigma).is_eq()).collect();
            let ok: Vec<&&TrialRecord> = cell.iter().filter(|r| r.error.is_none()).collect();
            let mean = |f: fn(&TrialRecord) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            CurvePoint {
                scenario,
                sigma,
                trials: cell.len(),
                failures: cell.len() - ok.len(),
                rot_rmse_deg: mean(|r| r.rot_rmse_deg),
                trans_rmse: mean(|r| r.trans_rmse),
                trans_rmse_rel: mean(|r| r.trans_rmse_rel),
                mean_reproj_px: mean(|r| r.mean_reproj_px),
                rms_reproj_px: mean(|r| r.rms_reproj_px),
            }
        })
        .collect()
}
