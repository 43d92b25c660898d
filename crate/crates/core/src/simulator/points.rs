use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::observe::is_visible;
use super::{rng, stream, CameraClass, GridFloorSpec, SampledRig, Scenario, ScenarioConfig, SimulationError};
use crate::geometry::ScenePoint;
use crate::msm::{CameraId, PointId};

/// Board proposals tried before giving up on the quotas.
const MAX_BOARD_ATTEMPTS: usize = 10_000;
/// Stop adding boards once both class means are this close to target.
const QUOTA_STOP: f64 = 0.05;
/// Class means must end up at least this close to target.
const QUOTA_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoardPlacement {
    pub center: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl BoardPlacement {
    /// Front-face normal.
    pub fn normal(&self) -> Vector3<f64> {
        self.rotation * Vector3::z()
    }
}

/// Ground-truth points, grouped by board for the board scenarios.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenePoints {
    pub points: BTreeMap<PointId, ScenePoint>,
    pub board_of: BTreeMap<PointId, usize>,
    pub boards: Vec<BoardPlacement>,
}

impl ScenePoints {
    /// Normal of the surface carrying the point; the floor faces up.
    pub fn normal(&self, id: PointId) -> Vector3<f64> {
        match self.board_of.get(&id) {
            Some(&b) => self.boards[b].normal(),
            None => Vector3::z(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `rows x cols` lattice on `z = 0` with ids `row * cols + col`; row 0 is
/// the `+y` edge. With `cell_centers`, the `(rows-1) x (cols-1)` midpoints
/// of the lattice cells are returned instead.
pub fn grid_floor_points(grid: &GridFloorSpec, cell_centers: bool) -> ScenePoints {
    let step = |extent: f64, n: usize| if n > 1 { extent / (n - 1) as f64 } else { 0.0 };
    let (dx, dy) = (step(grid.width, grid.cols), step(grid.depth, grid.rows));
    let (cols, rows, shift) = if cell_centers {
        (grid.cols.saturating_sub(1), grid.rows.saturating_sub(1), 0.5)
    } else {
        (grid.cols, grid.rows, 0.0)
    };
    let mut points = BTreeMap::new();
    for r in 0..rows {
        for c in 0..cols {
            let x = if grid.cols > 1 { -grid.width / 2.0 + dx * (c as f64 + shift) } else { 0.0 };
            let y = if grid.rows > 1 { grid.depth / 2.0 - dy * (r as f64 + shift) } else { 0.0 };
            points.insert(PointId((r * cols + c) as u32), ScenePoint::new(x, y, 0.0));
        }
    }
    ScenePoints { points, ..ScenePoints::default() }
}

fn board_lattice(config: &ScenarioConfig) -> Vec<Vector3<f64>> {
    let b = &config.board;
    let mut pts = Vec::with_capacity(b.rows * b.cols);
    for j in 0..b.rows {
        for i in 0..b.cols {
            pts.push(Vector3::new(
                -b.width / 2.0 + b.width * i as f64 / (b.cols - 1) as f64,
                -b.height / 2.0 + b.height * j as f64 / (b.rows - 1) as f64,
                0.0,
            ));
        }
    }
    pts
}

fn propose_board(config: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BoardPlacement {
    let (radius, floor) = match config.scenario {
        Scenario::BoardFloor => (config.floor_radius, true),
        _ => (config.volume_radius, false),
    };
    let r = radius * libm::sqrt(rng.random_range(0.0..1.0));
    let theta = rng.random_range(0.0..TAU);
    if floor {
        let spin = rng.random_range(0.0..TAU);
        BoardPlacement {
            center: Vector3::new(r * libm::cos(theta), r * libm::sin(theta), 0.0),
            rotation: UnitQuaternion::from_axis_angle(&Vector3::z_axis(), spin),
        }
    } else {
        let q: [f64; 4] = core::array::from_fn(|_| StandardNormal.sample(rng));
        BoardPlacement {
            center: Vector3::new(r * libm::cos(theta), r * libm::sin(theta), rng.random_range(0.0..config.volume_height)),
            rotation: UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3])),
        }
    }
}

fn inside_working_area(config: &ScenarioConfig, x: &Vector3<f64>) -> bool {
    let r = libm::hypot(x.x, x.y);
    match config.scenario {
        Scenario::BoardFloor => r <= config.floor_radius,
        _ => r <= config.volume_radius && x.z >= 0.0 && x.z <= config.volume_height,
    }
}

struct Quota {
    classes: Vec<(CameraClass, usize, f64)>,
}

impl Quota {
    fn new(config: &ScenarioConfig, rig: &SampledRig) -> Self {
        let classes = [(CameraClass::Near, config.quota_near), (CameraClass::Far, config.quota_far)]
            .into_iter()
            .filter_map(|(class, target)| {
                let n = rig.classes.values().filter(|&&c| c == class).count();
                (n > 0).then_some((class, n, target as f64))
            })
            .collect();
        Self { classes }
    }

    fn mean(&self, rig: &SampledRig, counts: &BTreeMap<CameraId, usize>, class: CameraClass, n: usize) -> f64 {
        rig.classes.iter().filter(|(_, &c)| c == class).map(|(id, _)| counts.get(id).copied().unwrap_or(0)).sum::<usize>()
            as f64
            / n as f64
    }

    /// Mean count of each class relative to its target.
    fn progress(&self, rig: &SampledRig, counts: &BTreeMap<CameraId, usize>) -> Vec<f64> {
        self.classes.iter().map(|&(class, n, target)| self.mean(rig, counts, class, n) / target).collect()
    }

    /// A board is kept if it advances the most lagging class at least as
    /// much as any other and pushes no class past the stopping band.
    fn accepts(&self, before: &[f64], after: &[f64]) -> bool {
        let Some(lagging) = (0..before.len()).min_by(|&a, &b| before[a].total_cmp(&before[b])) else { return false };
        let gain = |c: usize| after[c] - before[c];
        gain(lagging) > 0.0
            && (0..before.len()).all(|c| gain(c) <= gain(lagging))
            && after.iter().all(|&p| p <= 1.0 + QUOTA_STOP)
    }

    fn within(&self, rig: &SampledRig, counts: &BTreeMap<CameraId, usize>, tolerance: f64) -> bool {
        self.classes
            .iter()
            .all(|&(class, n, target)| (self.mean(rig, counts, class, n) - target).abs() <= tolerance * target)
    }
}

fn sample_boards(config: &ScenarioConfig, rig: &SampledRig, rng: &mut ChaCha8Rng) -> Result<ScenePoints, SimulationError> {
    let lattice = board_lattice(config);
    let quota = Quota::new(config, rig);
    let mut out = ScenePoints::default();
    let mut counts = BTreeMap::new();
    let mut attempts = 0;
    while attempts < MAX_BOARD_ATTEMPTS && !quota.within(rig, &counts, QUOTA_STOP) {
        attempts += 1;
        let board = propose_board(config, rng);
        let world: Vec<Vector3<f64>> = lattice.iter().map(|p| board.center + board.rotation * p).collect();
        if !world.iter().all(|x| inside_working_area(config, x)) {
            continue;
        }
        let normal = board.normal();
        let mut trial = counts.clone();
        let mut seen = 0;
        for (id, cam) in rig.rig.iter() {
            let n = world.iter().filter(|x| is_visible(cam, &ScenePoint::from(**x), &normal, None)).count();
            *trial.entry(id).or_insert(0) += n;
            seen += n;
        }
        if seen == 0 {
            continue;
        }
        if quota.accepts(&quota.progress(rig, &counts), &quota.progress(rig, &trial)) {
            counts = trial;
            let b = out.boards.len();
            for x in world {
                let id = PointId(out.points.len() as u32);
                out.points.insert(id, ScenePoint::from(x));
                out.board_of.insert(id, b);
            }
            out.boards.push(board);
        }
    }
    if !quota.within(rig, &counts, QUOTA_TOLERANCE) {
        return Err(SimulationError::QuotaUnreachable { attempts });
    }
    Ok(out)
}

pub(crate) fn sample_points_from(
    config: &ScenarioConfig,
    rig: &SampledRig,
    seed: u64,
    points_stream: u64,
    cell_centers: bool,
) -> Result<ScenePoints, SimulationError> {
    config.validate()?;
    match config.scenario {
        Scenario::GridFloor => Ok(grid_floor_points(&config.grid, cell_centers)),
        Scenario::BoardFloor | Scenario::BoardVolume => sample_boards(config, rig, &mut rng(seed, points_stream)),
    }
}

/// Points of the configured scenario. Boards are added one at a time, each
/// kept only if it keeps the mean per-camera observation counts of the near
/// and far classes progressing evenly towards their quotas.
pub fn sample_points(config: &ScenarioConfig, rig: &SampledRig, seed: u64) -> Result<ScenePoints, SimulationError> {
    sample_points_from(config, rig, seed, stream::POINTS, false)
}
