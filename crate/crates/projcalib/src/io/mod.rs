//! Artifact formats.
//!
//! | artifact | format |
//! |---|---|
//! | scene, held-out set | JSON, [`SceneFile`] |
//! | projection schedule | JSON, [`ScheduleFile`] |
//! | raw marker detections | JSON lines, one `RawDetection` per line |
//! | reconstruction | JSON, [`ReconstructionFile`] |
//! | evaluation report | JSON, [`ReportFile`]; per-camera CSV |
//! | Monte-Carlo sweep | CSV with a `# {json}` metadata first line |

mod detections;
mod montecarlo;
mod reconstruction;
mod report;
mod scene;

pub use detections::{read_detections, write_detections};
pub use montecarlo::{read_trials_csv, write_trials_csv, SweepMetadata, TrialRow};
pub use reconstruction::{CameraEntry, PlaneEntry, ReconstructionFile};
pub use report::{camera_csv, ReportFile};
pub use scene::{CameraRecord, ObservationRecord, PointRecord, SceneFile};

use std::io::Write;
use std::path::Path;

use projcalib_core::msm::ProjectionSchedule;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::Generator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub generator: Generator,
    pub total_duration_s: f64,
    pub schedule: ProjectionSchedule,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, contents: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents).and_then(|_| out.flush()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
