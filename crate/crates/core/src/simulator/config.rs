use core::fmt;

use super::SimulationError;
use crate::msm::ScaleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scenario {
    BoardVolume,
    BoardFloor,
    GridFloor,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::BoardVolume, Scenario::BoardFloor, Scenario::GridFloor];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BoardVolume => "board_volume",
            Scenario::BoardFloor => "board_floor",
            Scenario::GridFloor => "grid_floor",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CameraClass {
    Far,
    Near,
    CloseUp,
}

impl CameraClass {
    pub fn name(self) -> &'static str {
        match self {
            CameraClass::Far => "far",
            CameraClass::Near => "near",
            CameraClass::CloseUp => "close_up",
        }
    }
}

/// Cameras placed at random azimuths on a horizontal circle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RingSpec {
    pub count: usize,
    pub radius: f64,
    pub height: f64,
    pub focal_px: f64,
}

/// A single long-focal camera looking down at the scene center.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CloseUpSpec {
    pub radius: f64,
    pub height: f64,
    pub focal_px: f64,
}

/// Planar calibration board with a rectangular lattice of points.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoardSpec {
    pub width: f64,
    pub height: f64,
    pub cols: usize,
    pub rows: usize,
}

/// Regular lattice of marker centers on `z = 0`, centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridFloorSpec {
    pub cols: usize,
    pub rows: usize,
    pub width: f64,
    pub depth: f64,
}

/// Imaged-size window within which a marker scale is detected.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VisibilityModel {
    pub min_diameter_px: f64,
    pub max_diameter_px: f64,
    pub require_full_quad: bool,
}

impl Default for VisibilityModel {
    fn default() -> Self {
        Self { min_diameter_px: 20.0, max_diameter_px: 400.0, require_full_quad: true }
    }
}

/// Detection of the grid points as projected multi-scale markers: the
/// square floor footprint of scale `λ` has side `marker_size_m · λ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MsmVisibility {
    pub model: VisibilityModel,
    pub scales: ScaleSet,
    pub marker_size_m: f64,
}

impl Default for MsmVisibility {
    /// Seven scales from 5 cm to 40 cm.
    fn default() -> Self {
        Self { model: VisibilityModel::default(), scales: ScaleSet::standard(), marker_size_m: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub far: RingSpec,
    pub near: RingSpec,
    pub close_up: Option<CloseUpSpec>,
    pub image_width: u32,
    pub image_height: u32,
    pub board: BoardSpec,
    pub volume_radius: f64,
    pub volume_height: f64,
    pub floor_radius: f64,
    pub grid: GridFloorSpec,
    /// Per-axis pixel noise standard deviation.
    pub sigma: f64,
    pub quota_near: usize,
    pub quota_far: usize,
    /// Multi-scale gating of grid points; plain point visibility when absent.
    pub msm: Option<MsmVisibility>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::new(Scenario::GridFloor)
    }
}

impl ScenarioConfig {
    /// Six far and four near cameras at 915 px focal length.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            far: RingSpec { count: 6, radius: 2.8, height: 2.8, focal_px: 915.0 },
            near: RingSpec { count: 4, radius: 1.2, height: 1.4, focal_px: 915.0 },
            close_up: None,
            image_width: 1920,
            image_height: 1080,
            board: BoardSpec { width: 1.20, height: 0.85, cols: 12, rows: 8 },
            volume_radius: 3.0,
            volume_height: 1.5,
            floor_radius: 3.0,
            grid: GridFloorSpec { cols: 64, rows: 50, width: 4.0, depth: 3.0 },
            sigma: 0.0,
            quota_near: 2000,
            quota_far: 3000,
            msm: None,
        }
    }

    /// Floor-grid acquisition resembling a full operating-room setup: six
    /// far cameras, two near ones and a zoomed ceiling camera, with
    /// multi-scale marker gating.
    pub fn full_like() -> Self {
        let mut c = Self::new(Scenario::GridFloor);
        c.near.count = 2;
        c.close_up = Some(CloseUpSpec { radius: 1.0, height: 2.8, focal_px: 11_100.0 });
        c.msm = Some(MsmVisibility::default());
        c
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn camera_count(&self) -> usize {
        self.far.count + self.near.count + usize::from(self.close_up.is_some())
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let ring_ok = |r: &RingSpec| positive(r.radius) && positive(r.height) && positive(r.focal_px);
        if !ring_ok(&self.far) || !ring_ok(&self.near) {
            return Err(SimulationError::InvalidConfig("camera rings need positive radius, height and focal length"));
        }
        if self.far.count + self.near.count == 0 {
            return Err(SimulationError::InvalidConfig("no cameras"));
        }
        if let Some(c) = &self.close_up {
            if !(c.radius >= 0.0) || !positive(c.height) || !positive(c.focal_px) {
                return Err(SimulationError::InvalidConfig("close-up camera needs a height and focal length"));
            }
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(SimulationError::InvalidConfig("image size must be positive"));
        }
        let b = &self.board;
        if !positive(b.width) || !positive(b.height) || b.cols < 2 || b.rows < 2 {
            return Err(SimulationError::InvalidConfig("boards need a positive size and at least 2x2 points"));
        }
        if !positive(self.volume_radius) || !positive(self.volume_height) || !positive(self.floor_radius) {
            return Err(SimulationError::InvalidConfig("working volume must be positive"));
        }
        let g = &self.grid;
        if g.cols == 0 || g.rows == 0 || !positive(g.width) || !positive(g.depth) {
            return Err(SimulationError::InvalidConfig("grid needs points and a positive extent"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(SimulationError::InvalidConfig("noise sigma must be non-negative"));
        }
        if self.quota_near == 0 || self.quota_far == 0 {
            return Err(SimulationError::InvalidConfig("observation quotas must be positive"));
        }
        if let Some(m) = &self.msm {
            let v = &m.model;
            if !positive(v.min_diameter_px) || !(v.max_diameter_px > v.min_diameter_px) || !positive(m.marker_size_m) {
                return Err(SimulationError::InvalidConfig("visibility window must satisfy 0 < min < max"));
            }
        }
        Ok(())
    }
}
