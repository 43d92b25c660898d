use alloc::vec::Vec;
use nalgebra::Vector2;

use super::{build_msm_definition, MsmDefinition, MsmError, PatternSpec, PointId, ProjectorImage, ScaleSet};

/// Regular lattice of marker centers over a projector-space rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub min: Vector2<f64>,
    pub max: Vector2<f64>,
}

impl GridSpec {
    /// Center of node `(row, col)`; marker ids are `row * cols + col`.
    pub fn node(&self, row: usize, col: usize) -> Vector2<f64> {
        let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        Vector2::new(lerp(self.min.x, self.max.x, col, self.cols), lerp(self.min.y, self.max.y, row, self.rows))
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ScheduleSpec {
    pub grid: GridSpec,
    pub arrays: usize,
    pub msms_per_array: usize,
    pub scales: ScaleSet,
    pub pattern: PatternSpec,
    pub projector: ProjectorImage,
    pub step_duration_s: f64,
}

impl Default for ScheduleSpec {
    /// 100 arrays of 32 markers on a 50x64 lattice, seven scales, 24 px base
    /// squares on a 1080p projector, 0.1 s per step (70 s in total).
    fn default() -> Self {
        let margin = 100.0;
        let projector = ProjectorImage::default();
        Self {
            grid: GridSpec {
                rows: 50,
                cols: 64,
                min: Vector2::new(margin, margin),
                max: Vector2::new(projector.width as f64 - margin, projector.height as f64 - margin),
            },
            arrays: 100,
            msms_per_array: 32,
            scales: ScaleSet::standard(),
            pattern: PatternSpec::square(24.0, 0),
            projector,
            step_duration_s: 0.1,
        }
    }
}

/// One projector frame: every marker of one array at one scale.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleStep {
    pub step_id: u32,
    pub array_id: u32,
    pub scale_index: usize,
    pub markers: Vec<PointId>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProjectionSchedule {
    pub projector: ProjectorImage,
    pub scales: ScaleSet,
    pub step_duration_s: f64,
    /// Marker definitions indexed by marker id.
    pub markers: Vec<MsmDefinition>,
    pub steps: Vec<ScheduleStep>,
}

impl ProjectionSchedule {
    pub fn step(&self, step_id: u32) -> Option<&ScheduleStep> {
        self.steps.get(step_id as usize)
    }

    pub fn marker(&self, id: PointId) -> Option<&MsmDefinition> {
        self.markers.get(id.0 as usize)
    }

    pub fn total_duration_s(&self) -> f64 {
        self.steps.len() as f64 * self.step_duration_s
    }
}

/// Splits the lattice into `arrays` interleaved subsets and emits one step
/// per (array, scale), array-major.
///
/// Array `a` holds the nodes whose id is congruent to `a` modulo `arrays`,
/// so each array is the previous one shifted by one grid stride (wrapping
/// into the next row). Every node is the center of exactly one marker.
pub fn generate_schedule(spec: &ScheduleSpec) -> Result<ProjectionSchedule, MsmError> {
    let GridSpec { rows, cols, .. } = spec.grid;
    if spec.arrays == 0 || spec.msms_per_array == 0 || spec.arrays * spec.msms_per_array != rows * cols {
        return Err(MsmError::ShapeMismatch { arrays: spec.arrays, per_array: spec.msms_per_array, rows, cols });
    }
    let mut markers = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let id = (row * cols + col) as u32;
            let pattern = PatternSpec { payload_id: id, ..spec.pattern };
            markers.push(build_msm_definition(spec.grid.node(row, col), &pattern, &spec.scales, spec.projector)?);
        }
    }
    let mut steps = Vec::with_capacity(spec.arrays * spec.scales.len());
    for array in 0..spec.arrays {
        let ids: Vec<PointId> = (array..rows * cols).step_by(spec.arrays).map(|k| PointId(k as u32)).collect();
        for scale_index in 0..spec.scales.len() {
            steps.push(ScheduleStep {
                step_id: steps.len() as u32,
                array_id: array as u32,
                scale_index,
                markers: ids.clone(),
            });
        }
    }
    Ok(ProjectionSchedule {
        projector: spec.projector,
        scales: spec.scales.clone(),
        step_duration_s: spec.step_duration_s,
        markers,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn default_schedule_dimensions() {
        let s = generate_schedule(&ScheduleSpec::default()).unwrap();
        assert_eq!(s.steps.len(), 700);
        assert_eq!(s.markers.len(), 3200);
        assert!((s.total_duration_s() - 70.0).abs() < 1e-9);
        let mut seen = BTreeSet::new();
        for step in &s.steps {
            assert_eq!(step.markers.len(), 32);
            for &m in &step.markers {
                seen.insert((step.array_id, step.scale_index, m));
            }
        }
        assert_eq!(seen.len(), 700 * 32);
        // Each marker belongs to exactly one array.
        let per_marker: BTreeSet<(u32, PointId)> = s.steps.iter().flat_map(|st| st.markers.iter().map(move |&m| (st.array_id, m))).collect();
        assert_eq!(per_marker.len(), 3200);
    }

    #[test]
    fn centers_form_the_lattice() {
        let spec = ScheduleSpec::default();
        let s = generate_schedule(&spec).unwrap();
        let mut got: Vec<(u64, u64)> = s
            .steps
            .iter()
            .filter(|st| st.scale_index == 0)
            .flat_map(|st| st.markers.iter())
            .map(|&m| {
                let c = s.marker(m).unwrap().center;
                (c.x.to_bits(), c.y.to_bits())
            })
            .collect();
        got.sort();
        let mut expected = Vec::new();
        for r in 0..spec.grid.rows {
            for c in 0..spec.grid.cols {
                let x = 100.0 + 1720.0 * c as f64 / 63.0;
                let y = 100.0 + 880.0 * r as f64 / 49.0;
                expected.push((x.to_bits(), y.to_bits()));
            }
        }
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn successive_arrays_shift_by_one_node() {
        let s = generate_schedule(&ScheduleSpec::default()).unwrap();
        let a0 = &s.steps[0].markers;
        let a1 = &s.steps[7].markers;
        assert_eq!(s.steps[7].array_id, 1);
        assert!(a0.iter().zip(a1).all(|(x, y)| y.0 == x.0 + 1));
    }

    #[test]
    fn minimal_schedule() {
        let spec = ScheduleSpec {
            grid: GridSpec { rows: 1, cols: 1, min: Vector2::new(500.0, 400.0), max: Vector2::new(700.0, 600.0) },
            arrays: 1,
            msms_per_array: 1,
            scales: ScaleSet::single(),
            ..ScheduleSpec::default()
        };
        let s = generate_schedule(&spec).unwrap();
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.markers[0].center, Vector2::new(600.0, 500.0));
    }

    #[test]
    fn shape_mismatch() {
        let spec = ScheduleSpec { arrays: 99, ..ScheduleSpec::default() };
        assert!(matches!(generate_schedule(&spec), Err(MsmError::ShapeMismatch { .. })));
    }
}
