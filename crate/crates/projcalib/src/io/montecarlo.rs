use std::path::Path;

use projcalib_core::simulator::{Scenario, ScenarioConfig, TrialRecord};
use projcalib_core::solver::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::Generator;

/// Sweep parameters, stored as JSON on the first line of the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub generator: Generator,
    pub seed: u64,
    pub trials: u32,
    pub sigmas: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub config: ScenarioConfig,
    pub solver: SolverOptions,
}

/// One CSV row. The leading seven columns are the stable sweep schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub scenario: Scenario,
    pub sigma: f64,
    pub trial: u32,
    pub rot_rmse_deg: f64,
    pub trans_rmse: f64,
    pub mean_reproj_px: f64,
    pub success: bool,
    pub seed: u64,
    pub cameras: usize,
    pub registered: usize,
    pub trans_rmse_rel: f64,
    pub rms_reproj_px: f64,
    pub heldout_mean_px: f64,
    pub heldout_rms_px: f64,
    pub error: String,
}

impl From<&TrialRecord> for TrialRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            scenario: r.scenario,
            sigma: r.sigma,
            trial: r.trial,
            rot_rmse_deg: r.rot_rmse_deg,
            trans_rmse: r.trans_rmse,
            mean_reproj_px: r.mean_reproj_px,
            success: r.success,
            seed: r.seed,
            cameras: r.cameras,
            registered: r.registered,
            trans_rmse_rel: r.trans_rmse_rel,
            rms_reproj_px: r.rms_reproj_px,
            heldout_mean_px: r.heldout_mean_px,
            heldout_rms_px: r.heldout_rms_px,
            error: r.error.clone().unwrap_or_default(),
        }
    }
}

pub fn write_trials_csv(meta: &SweepMetadata, records: &[TrialRecord]) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# {}\n", serde_json::to_string(meta).expect("metadata serializes")).into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(TrialRow::from(r)).map_err(|e| CliError::Format(e.to_string()))?;
    }
    out.extend(w.into_inner().expect("in-memory writer"));
    Ok(out)
}

pub fn read_trials_csv(path: &Path) -> Result<(SweepMetadata, Vec<TrialRow>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |m: String| CliError::Format(format!("{}: {m}", path.display()));
    let (first, rest) = text.split_once('\n').ok_or_else(|| bad("empty file".into()))?;
    let json = first.strip_prefix("# ").ok_or_else(|| bad("missing metadata line".into()))?;
    let meta: SweepMetadata = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
    let mut rows = Vec::new();
    for row in csv::Reader::from_reader(rest.as_bytes()).deserialize() {
        rows.push(row.map_err(|e| bad(e.to_string()))?);
    }
    Ok((meta, rows))
}
