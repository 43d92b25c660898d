use std::collections::BTreeMap;

use projcalib_core::eval::{EvaluationReport, SUCCESS_THRESHOLDS_PX};
use projcalib_core::simulator::CameraClass;
use projcalib_core::solver::ReprojectionStats;
use projcalib_core::CameraId;
use serde::{Deserialize, Serialize};

use crate::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraReportEntry {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<CameraClass>,
    pub registered: bool,
    pub calibration: Option<ReprojectionStats>,
    pub heldout: Option<ReprojectionStats>,
    pub rotation_error_deg: Option<f64>,
    pub translation_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentEntry {
    pub scale: f64,
    /// `[w, x, y, z]`.
    pub rotation: [f64; 4],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEntry {
    pub rot_rmse_deg: f64,
    pub trans_rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

/// Success percentages for one group of cameras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessEntry {
    pub group: String,
    pub cameras: usize,
    pub percent: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub generator: Generator,
    pub thresholds_px: Vec<f64>,
    pub all_registered: bool,
    pub pose: Option<PoseEntry>,
    pub alignment: Option<AlignmentEntry>,
    pub points: Option<PointEntry>,
    pub calibration: Option<ReprojectionStats>,
    pub heldout: Option<ReprojectionStats>,
    pub success: Vec<SuccessEntry>,
    pub cameras: Vec<CameraReportEntry>,
}

impl ReportFile {
    pub fn new(report: &EvaluationReport, classes: &BTreeMap<CameraId, CameraClass>) -> Self {
        let cameras: Vec<CameraReportEntry> = report
            .cameras
            .iter()
            .map(|(id, c)| CameraReportEntry {
                id: id.0,
                class: classes.get(id).copied(),
                registered: c.registered,
                calibration: c.calibration,
                heldout: c.heldout,
                rotation_error_deg: c.rotation_error_deg,
                translation_error: c.translation_error,
            })
            .collect();
        let mut success = Vec::new();
        for class in [CameraClass::Far, CameraClass::Near, CameraClass::CloseUp] {
            let group: Vec<&CameraReportEntry> = cameras.iter().filter(|c| c.class == Some(class)).collect();
            if !group.is_empty() {
                success.push(group_success(class.name(), &group));
            }
        }
        success.push(SuccessEntry { group: "all".into(), cameras: cameras.len(), percent: report.success.clone() });
        Self {
            generator: Generator::default(),
            thresholds_px: SUCCESS_THRESHOLDS_PX.to_vec(),
            all_registered: report.all_registered,
            pose: report.pose.as_ref().map(|p| PoseEntry { rot_rmse_deg: p.rot_rmse_deg, trans_rmse: p.trans_rmse }),
            alignment: report.alignment.map(|a| {
                let q = a.rotation.quaternion();
                AlignmentEntry {
                    scale: a.scale,
                    rotation: [q.w, q.i, q.j, q.k],
                    translation: [a.translation.x, a.translation.y, a.translation.z],
                }
            }),
            points: report.points.map(|p| PointEntry { count: p.count, mean: p.mean, std: p.std }),
            calibration: report.calibration,
            heldout: report.heldout,
            success,
            cameras,
        }
    }

    /// Table of success percentages, one row per camera group.
    pub fn success_grid(&self) -> String {
        let mut out = format!("{:<10}{:>8}", "cameras", "count");
        for t in &self.thresholds_px {
            out.push_str(&format!("{:>9}", format!("<{t}px")));
        }
        out.push('\n');
        for s in &self.success {
            out.push_str(&format!("{:<10}{:>8}", s.group, s.cameras));
            for p in &s.percent {
                out.push_str(&format!("{:>8}%", p));
            }
            out.push('\n');
        }
        out
    }
}

fn group_success(name: &str, group: &[&CameraReportEntry]) -> SuccessEntry {
    let errors: Vec<Option<f64>> =
        group.iter().map(|c| c.heldout.or(c.calibration).filter(|_| c.registered).map(|s| s.mean_px)).collect();
    SuccessEntry {
        group: name.into(),
        cameras: group.len(),
        percent: projcalib_core::eval::success_rate(&errors, &SUCCESS_THRESHOLDS_PX),
    }
}

/// Per-camera rows: id, class, registration, pose errors and mean errors.
pub fn camera_csv(report: &ReportFile) -> Result<Vec<u8>, csv::Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        camera_id: u32,
        class: &'a str,
        registered: bool,
        rotation_error_deg: Option<f64>,
        translation_error: Option<f64>,
        mean_reproj_px: Option<f64>,
        heldout_mean_px: Option<f64>,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &report.cameras {
        w.serialize(Row {
            camera_id: c.id,
            class: c.class.map_or("", |c| c.name()),
            registered: c.registered,
            rotation_error_deg: c.rotation_error_deg,
            translation_error: c.translation_error,
            mean_reproj_px: c.calibration.map(|s| s.mean_px),
            heldout_mean_px: c.heldout.map(|s| s.mean_px),
        })?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}
