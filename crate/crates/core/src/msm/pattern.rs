use alloc::vec::Vec;
use nalgebra::Vector2;

use super::MsmError;

/// Pattern families with a projectively invariant center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PatternKind {
    /// Square fiducial; the center is the intersection of the diagonals.
    Square,
    /// Concentric circles. Not implemented.
    ConcentricCircles,
}

/// The Euclidean pattern before any scaling, in pattern coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternSpec {
    pub kind: PatternKind,
    /// Side length in projector pixels at scale 1.
    pub side: f64,
    pub center: Vector2<f64>,
    pub payload_id: u32,
}

impl PatternSpec {
    pub fn square(side: f64, payload_id: u32) -> Self {
        Self { kind: PatternKind::Square, side, center: Vector2::zeros(), payload_id }
    }

    /// Corner quad in marker order (counter-clockwise in a y-down image,
    /// starting top-left).
    pub fn corners(&self) -> Result<[Vector2<f64>; 4], MsmError> {
        if self.kind != PatternKind::Square {
            return Err(MsmError::UnsupportedPattern(self.kind));
        }
        if !(self.side > 0.0) {
            return Err(MsmError::InvalidPattern("side length must be positive"));
        }
        let h = self.side / 2.0;
        let c = self.center;
        Ok([c + Vector2::new(-h, -h), c + Vector2::new(h, -h), c + Vector2::new(h, h), c + Vector2::new(-h, h)])
    }
}

/// Ordered, strictly increasing set of positive scale factors Λ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct ScaleSet(Vec<f64>);

impl TryFrom<Vec<f64>> for ScaleSet {
    type Error = MsmError;

    fn try_from(scales: Vec<f64>) -> Result<Self, MsmError> {
        Self::new(scales)
    }
}

impl From<ScaleSet> for Vec<f64> {
    fn from(s: ScaleSet) -> Self {
        s.0
    }
}

impl ScaleSet {
    pub fn new(scales: Vec<f64>) -> Result<Self, MsmError> {
        if scales.is_empty() || scales.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(MsmError::InvalidScales);
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MsmError::InvalidScales);
        }
        Ok(Self(scales))
    }

    /// The seven factors used for the projected-floor acquisition.
    pub fn standard() -> Self {
        Self(alloc::vec![1.0, 1.4, 2.0, 3.0, 4.0, 6.0, 8.0])
    }

    pub fn single() -> Self {
        Self(alloc::vec![1.0])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> f64 {
        *self.0.last().expect("scale sets are non-empty")
    }
}

impl Default for ScaleSet {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProjectorImage {
    pub width: u32,
    pub height: u32,
}

impl Default for ProjectorImage {
    fn default() -> Self {
        Self { width: 1920, height: 1080 }
    }
}

/// One scaled copy of the pattern in projector pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Placement {
    pub scale_index: usize,
    pub scale: f64,
    pub corners: [Vector2<f64>; 4],
}

/// A marker: the pattern scaled by every factor in Λ about the projector
/// point `center`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MsmDefinition {
    pub center: Vector2<f64>,
    pub pattern: PatternSpec,
    pub scales: ScaleSet,
    pub placements: Vec<Placement>,
}

/// Places the pattern so its center lands on `p` and scales it about `p`,
/// `s(x) = λ (x - p) + p`, once per factor.
pub fn build_msm_definition(
    p: Vector2<f64>,
    pattern: &PatternSpec,
    scales: &ScaleSet,
    projector: ProjectorImage,
) -> Result<MsmDefinition, MsmError> {
    let corners = pattern.corners()?;
    let (w, h) = (projector.width as f64, projector.height as f64);
    let mut placements = Vec::with_capacity(scales.len());
    for (scale_index, &scale) in scales.as_slice().iter().enumerate() {
        let mut quad = [Vector2::zeros(); 4];
        for (q, c) in quad.iter_mut().zip(corners.iter()) {
            *q = (c - pattern.center) * scale + p;
            if q.x < 0.0 || q.y < 0.0 || q.x > w || q.y > h {
                return Err(MsmError::OutOfBounds { x: p.x, y: p.y, scale });
            }
        }
        placements.push(Placement { scale_index, scale, corners: quad });
    }
    Ok(MsmDefinition { center: p, pattern: *pattern, scales: scales.clone(), placements })
}
