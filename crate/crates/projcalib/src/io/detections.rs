use std::io::{BufRead, BufReader};
use std::path::Path;

use projcalib_core::msm::RawDetection;

use crate::error::CliError;

/// One JSON object per line.
pub fn write_detections(detections: &[RawDetection]) -> String {
    let mut out = String::new();
    for d in detections {
        out.push_str(&serde_json::to_string(d).expect("detections serialize"));
        out.push('\n');
    }
    out
}

/// Reads a JSON-lines detection file; blank lines are ignored.
pub fn read_detections(path: &Path) -> Result<Vec<RawDetection>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Format(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use projcalib_core::msm::DetectionGeometry;
    use projcalib_core::{CameraId, PixelPoint, PointId};

    #[test]
    fn json_lines_round_trip() {
        let dets = vec![
            RawDetection {
                camera: CameraId(1),
                step_id: 3,
                marker: PointId(7),
                scale_index: 2,
                geometry: DetectionGeometry::Corners([PixelPoint::new(0.5, 1.0); 4]),
            },
            RawDetection {
                camera: CameraId(0),
                step_id: 0,
                marker: PointId(0),
                scale_index: 0,
                geometry: DetectionGeometry::Center(PixelPoint::new(10.0, 20.0)),
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        std::fs::write(&path, write_detections(&dets) + "\n").unwrap();
        assert_eq!(read_detections(&path).unwrap(), dets);
    }
}
