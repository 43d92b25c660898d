use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix2x3, Matrix2x6, Matrix3, Matrix3x2, Matrix6x3, UnitQuaternion, Vector2, Vector3};

use super::{CorrespondenceGraph, Loss, PlaneFrame, Reconstruction, SolverError, SolverOptions};
use crate::geometry::camera::project_with_jacobian;
use crate::geometry::{CameraIntrinsics, Pose};
use crate::math::skew;
use crate::msm::{CameraId, PointId};
use alloc::collections::BTreeMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Which cameras take part and how long the optimizer may run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleMode {
    /// Only the two gauge cameras.
    Pair,
    /// All registered cameras, capped at the intermediate iteration count.
    Intermediate,
    /// All registered cameras.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleSummary {
    /// Mean cost per observation before and after.
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub observations: usize,
}

/// Parameters per global block. Cameras use `[rotation; center]`, the plane
/// uses its first three slots.
const BLOCK: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CameraKind {
    Fixed,
    /// Center constrained to a sphere around the fixed camera.
    Baseline,
    Free,
}

#[derive(Debug, Clone)]
struct State {
    rotations: Vec<UnitQuaternion<f64>>,
    centers: Vec<Vector3<f64>>,
    /// World coordinates, or `(u, v, 0)` plane coordinates when a plane is set.
    points: Vec<Vector3<f64>>,
    plane: Option<PlaneFrame>,
}

struct Problem {
    kinds: Vec<CameraKind>,
    block_of_camera: Vec<Option<usize>>,
    plane_block: Option<usize>,
    blocks: usize,
    intrinsics: Vec<CameraIntrinsics>,
    /// Observations grouped by point: `obs[obs_start[p]..obs_start[p + 1]]`.
    obs_start: Vec<usize>,
    obs: Vec<(usize, Vector2<f64>)>,
    anchor: Vector3<f64>,
    radius: f64,
    loss: Loss,
}

struct ObsLinearization {
    residual: Vector2<f64>,
    camera: Matrix2x6<f64>,
    plane: Matrix2x6<f64>,
    point: Matrix2x3<f64>,
}

fn tangent_basis(d: &Vector3<f64>) -> Matrix3x2<f64> {
    let a = if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let b1 = d.cross(&a).normalize();
    let b2 = d.cross(&b1);
    Matrix3x2::from_columns(&[b1, b2])
}

impl Problem {
    fn world(&self, state: &State, p: usize) -> Vector3<f64> {
        match &state.plane {
            Some(pl) => pl.origin + pl.e1 * state.points[p].x + pl.e2 * state.points[p].y,
            None => state.points[p],
        }
    }

    fn rho(&self, e2: f64) -> f64 {
        match self.loss {
            Loss::Squared => e2,
            Loss::Huber { scale } => {
                let e = libm::sqrt(e2);
                if e <= scale {
                    e2
                } else {
                    2.0 * scale * e - scale * scale
                }
            }
        }
    }

    /// Total robustified cost; `None` if a point falls behind a camera.
    fn cost(&self, state: &State) -> Option<f64> {
        let mut total = 0.0;
        for p in 0..self.obs_start.len() - 1 {
            let x = self.world(state, p);
            for &(c, meas) in &self.obs[self.obs_start[p]..self.obs_start[p + 1]] {
                let xc = state.rotations[c] * (x - state.centers[c]);
                let px = self.intrinsics[c].project_camera_point(&xc).ok()?;
                total += self.rho(crate::math::sq(px.u - meas.x) + crate::math::sq(px.v - meas.y));
            }
        }
        total.is_finite().then_some(total)
    }

    fn linearize_observation(&self, state: &State, p: usize, c: usize, meas: &Vector2<f64>) -> Option<ObsLinearization> {
        let r = state.rotations[c].to_rotation_matrix().into_inner();
        let x = self.world(state, p);
        let xc = r * (x - state.centers[c]);
        let (px, a) = project_with_jacobian(&self.intrinsics[c], &xc).ok()?;
        let ar = a * r;
        let mut camera = Matrix2x6::zeros();
        match self.kinds[c] {
            CameraKind::Fixed => {}
            CameraKind::Baseline => {
                camera.fixed_view_mut::<2, 3>(0, 0).copy_from(&(a * -skew(&xc)));
                let d = (state.centers[c] - self.anchor).normalize();
                camera.fixed_view_mut::<2, 2>(0, 3).copy_from(&(-ar * tangent_basis(&d)));
            }
            CameraKind::Free => {
                camera.fixed_view_mut::<2, 3>(0, 0).copy_from(&(a * -skew(&xc)));
                camera.fixed_view_mut::<2, 3>(0, 3).copy_from(&-ar);
            }
        }
        let mut plane = Matrix2x6::zeros();
        let point = match &state.plane {
            Some(pl) => {
                let n = pl.normal();
                let (u, v) = (state.points[p].x, state.points[p].y);
                plane.fixed_view_mut::<2, 3>(0, 0).copy_from(&(ar * Matrix3::from_columns(&[n * v, n * -u, n])));
                Matrix2x3::from_columns(&[ar * pl.e1, ar * pl.e2, Vector2::zeros()])
            }
            None => ar,
        };
        Some(ObsLinearization { residual: Vector2::new(px.u - meas.x, px.v - meas.y), camera, plane, point })
    }

    fn dead_slots(&self) -> Vec<bool> {
        let mut dead = vec![false; self.blocks * BLOCK];
        for (c, b) in self.block_of_camera.iter().enumerate() {
            if let (Some(b), CameraKind::Baseline) = (b, self.kinds[c]) {
                dead[b * BLOCK + 5] = true;
            }
        }
        if let Some(b) = self.plane_block {
            for s in 3..BLOCK {
                dead[b * BLOCK + s] = true;
            }
        }
        dead
    }

    fn apply(&self, state: &State, dg: &DVector<f64>, dp: &[Vector3<f64>]) -> State {
        let mut next = state.clone();
        for (c, block) in self.block_of_camera.iter().enumerate() {
            let Some(b) = *block else { continue };
            let o = b * BLOCK;
            let dtheta = Vector3::new(dg[o], dg[o + 1], dg[o + 2]);
            next.rotations[c] = UnitQuaternion::from_scaled_axis(dtheta) * state.rotations[c];
            match self.kinds[c] {
                CameraKind::Free => next.centers[c] = state.centers[c] + Vector3::new(dg[o + 3], dg[o + 4], dg[o + 5]),
                CameraKind::Baseline => {
                    let d = state.centers[c] - self.anchor;
                    let moved = d + tangent_basis(&d.normalize()) * Vector2::new(dg[o + 3], dg[o + 4]);
                    next.centers[c] = self.anchor + moved.normalize() * self.radius;
                }
                CameraKind::Fixed => {}
            }
        }
        if let (Some(b), Some(pl)) = (self.plane_block, &state.plane) {
            let o = b * BLOCK;
            let n = pl.normal();
            let w = UnitQuaternion::from_scaled_axis(pl.e1 * dg[o] + pl.e2 * dg[o + 1]);
            let e1 = (w * pl.e1).normalize();
            let e2 = w * pl.e2;
            let e2 = (e2 - e1 * e1.dot(&e2)).normalize();
            next.plane = Some(PlaneFrame { origin: pl.origin + n * dg[o + 2], e1, e2 });
        }
        for (x, d) in next.points.iter_mut().zip(dp) {
            *x += d;
            if state.plane.is_some() {
                x.z = 0.0;
            }
        }
        next
    }
}

/// Normal equations split into the global (camera and plane) part and the
/// per-point blocks, ready for Schur elimination of the points.
struct Normal {
    u: DMatrix<f64>,
    g: DVector<f64>,
    v: Vec<Matrix3<f64>>,
    gp: Vec<Vector3<f64>>,
    /// Per point: (global block, W block) with `W = J_globalᵀ J_point`.
    w: Vec<Vec<(usize, Matrix6x3<f64>)>>,
}

impl Problem {
    fn normal_equations(&self, state: &State) -> Normal {
        let dim = self.blocks * BLOCK;
        let points = self.obs_start.len() - 1;
        let mut n = Normal {
            u: DMatrix::zeros(dim, dim),
            g: DVector::zeros(dim),
            v: vec![Matrix3::zeros(); points],
            gp: vec![Vector3::zeros(); points],
            w: Vec::with_capacity(points),
        };
        for p in 0..points {
            let mut wp: Vec<(usize, Matrix6x3<f64>)> = Vec::new();
            let mut plane_w = Matrix6x3::zeros();
            for &(c, meas) in &self.obs[self.obs_start[p]..self.obs_start[p + 1]] {
                let Some(lin) = self.linearize_observation(state, p, c, &meas) else { continue };
                let weight = match self.loss {
                    Loss::Squared => 1.0,
                    Loss::Huber { scale } => {
                        let e = lin.residual.norm();
                        if e <= scale {
                            1.0
                        } else {
                            scale / e
                        }
                    }
                };
                let r = lin.residual * weight;
                n.v[p] += lin.point.transpose() * lin.point * weight;
                n.gp[p] += lin.point.transpose() * r;
                let segments = [(self.block_of_camera[c], &lin.camera), (self.plane_block, &lin.plane)];
                for (i, (bi, ji)) in segments.iter().enumerate() {
                    let Some(bi) = *bi else { continue };
                    let oi = bi * BLOCK;
                    let mut gi = n.g.fixed_rows_mut::<BLOCK>(oi);
                    gi += ji.transpose() * r;
                    for (bj, jj) in segments.iter().skip(i) {
                        let Some(bj) = *bj else { continue };
                        let block = ji.transpose() * *jj * weight;
                        let oj = bj * BLOCK;
                        let mut uij = n.u.fixed_view_mut::<BLOCK, BLOCK>(oi, oj);
                        uij += block;
                        if bi != bj {
                            let mut uji = n.u.fixed_view_mut::<BLOCK, BLOCK>(oj, oi);
                            uji += block.transpose();
                        }
                    }
                    let wij = ji.transpose() * lin.point * weight;
                    if Some(bi) == self.plane_block {
                        plane_w += wij;
                    } else {
                        wp.push((bi, wij));
                    }
                }
            }
            if let Some(b) = self.plane_block {
                wp.push((b, plane_w));
            }
            n.w.push(wp);
        }
        n
    }

    /// Damped Schur-complement step; `None` if the reduced system is not
    /// positive definite.
    fn solve(&self, n: &Normal, lambda: f64, dead: &[bool]) -> Option<(DVector<f64>, Vec<Vector3<f64>>)> {
        let dim = n.g.len();
        let mut s = n.u.clone();
        for i in 0..dim {
            s[(i, i)] = if dead[i] { 1.0 } else { s[(i, i)] + lambda * s[(i, i)].max(1e-9) };
        }
        let mut rhs = -&n.g;
        let coplanar = self.plane_block.is_some();
        let mut v_inv = Vec::with_capacity(n.v.len());
        for p in 0..n.v.len() {
            let mut v = n.v[p];
            for i in 0..3 {
                v[(i, i)] = if coplanar && i == 2 { 1.0 } else { v[(i, i)] + lambda * v[(i, i)].max(1e-9) };
            }
            let vi = v.try_inverse()?;
            let wp = &n.w[p];
            let ys: Vec<Matrix6x3<f64>> = wp.iter().map(|(_, w)| w * vi).collect();
            for (a, (ba, _)) in wp.iter().enumerate() {
                let mut ra = rhs.fixed_rows_mut::<BLOCK>(ba * BLOCK);
                ra += ys[a] * n.gp[p];
                for (bb, wb) in wp.iter() {
                    let mut sab = s.fixed_view_mut::<BLOCK, BLOCK>(ba * BLOCK, bb * BLOCK);
                    sab -= ys[a] * wb.transpose();
                }
            }
            v_inv.push(vi);
        }
        let dg = if dim == 0 { DVector::zeros(0) } else { s.cholesky()?.solve(&rhs) };
        let dp = (0..n.v.len())
            .map(|p| {
                let mut b = -n.gp[p];
                for (bb, wb) in &n.w[p] {
                    b -= wb.transpose() * dg.fixed_rows::<BLOCK>(bb * BLOCK);
                }
                let mut d = v_inv[p] * b;
                if coplanar {
                    d.z = 0.0;
                }
                d
            })
            .collect();
        Some((dg, dp))
    }
}

/// Levenberg-Marquardt minimization of the reprojection error over the
/// registered poses (minus the gauge) and all triangulated points.
///
/// With a plane in the reconstruction, points move only within it and the
/// plane itself is optimized (tilt and offset). Accepted steps strictly
/// decrease the cost. Observations whose point lies behind the camera at
/// the start are left out.
pub fn bundle_adjust(
    recon: &mut Reconstruction,
    graph: &CorrespondenceGraph,
    intrinsics: &BTreeMap<CameraId, CameraIntrinsics>,
    options: &SolverOptions,
    mode: BundleMode,
) -> Result<BundleSummary, SolverError> {
    let gauge = recon.gauge;
    let cams: Vec<CameraId> = recon
        .poses
        .keys()
        .copied()
        .filter(|&c| mode != BundleMode::Pair || c == gauge.fixed || c == gauge.baseline)
        .collect();
    let mut kinds = Vec::with_capacity(cams.len());
    let mut block_of_camera = Vec::with_capacity(cams.len());
    let mut blocks = 0;
    let mut ks = Vec::with_capacity(cams.len());
    for &c in &cams {
        ks.push(*intrinsics.get(&c).ok_or(SolverError::MissingIntrinsics(c))?);
        let kind = if c == gauge.fixed {
            CameraKind::Fixed
        } else if c == gauge.baseline {
            CameraKind::Baseline
        } else {
            CameraKind::Free
        };
        kinds.push(kind);
        if kind == CameraKind::Fixed {
            block_of_camera.push(None);
        } else {
            block_of_camera.push(Some(blocks));
            blocks += 1;
        }
    }
    let plane = recon.plane;
    let plane_block = plane.map(|_| {
        blocks += 1;
        blocks - 1
    });
    let anchor = recon.poses.get(&gauge.fixed).map(|p| p.center()).unwrap_or_else(Vector3::zeros);
    let radius = recon.poses.get(&gauge.baseline).map(|p| (p.center() - anchor).norm()).unwrap_or(1.0);

    let mut state = State {
        rotations: cams.iter().map(|c| recon.poses[c].rotation).collect(),
        centers: cams.iter().map(|c| recon.poses[c].center()).collect(),
        points: Vec::new(),
        plane,
    };
    let mut point_ids: Vec<PointId> = Vec::new();
    let mut obs_start = vec![0];
    let mut obs = Vec::new();
    for (&pid, x) in &recon.points {
        let Some(track) = graph.track(pid) else { continue };
        let before = obs.len();
        for &(cam, pixel) in track {
            let Ok(ci) = cams.binary_search(&cam) else { continue };
            let xc = state.rotations[ci] * (x.coords - state.centers[ci]);
            if xc.z > 1e-12 {
                obs.push((ci, pixel.to_vector()));
            }
        }
        if obs.len() - before < 2 {
            obs.truncate(before);
            continue;
        }
        point_ids.push(pid);
        obs_start.push(obs.len());
        state.points.push(match &plane {
            Some(pl) => {
                let uv = pl.coordinates(x);
                Vector3::new(uv.x, uv.y, 0.0)
            }
            None => x.coords,
        });
    }
    let problem = Problem {
        kinds,
        block_of_camera,
        plane_block,
        blocks,
        intrinsics: ks,
        obs_start,
        obs,
        anchor,
        radius,
        loss: options.loss,
    };
    let count = problem.obs.len();
    let max_iterations = match mode {
        BundleMode::Intermediate => options.intermediate_ba_iterations,
        BundleMode::Pair | BundleMode::Global => options.ba_max_iterations,
    };
    let mut cost = problem.cost(&state).ok_or(SolverError::NonConvergence)?;
    let initial = cost;
    let dead = problem.dead_slots();
    let mut lambda = 1e-4;
    let mut iterations = 0;
    let mut accepted = 0;
    // Below this the observations are reproduced to rounding precision.
    let floor = 1e-24 * count as f64;
    while iterations < max_iterations && cost > floor {
        iterations += 1;
        let normal = problem.normal_equations(&state);
        let mut decrease = None;
        while lambda < 1e12 {
            if let Some((dg, dp)) = problem.solve(&normal, lambda, &dead) {
                let candidate = problem.apply(&state, &dg, &dp);
                if let Some(c) = problem.cost(&candidate) {
                    if c < cost {
                        decrease = Some((cost - c) / cost);
                        state = candidate;
                        cost = c;
                        accepted += 1;
                        lambda = (lambda * 0.1).max(1e-12);
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        match decrease {
            Some(d) if d >= options.ba_tolerance => {}
            _ => break,
        }
    }
    if !cost.is_finite() {
        return Err(SolverError::NonConvergence);
    }

    for (i, &c) in cams.iter().enumerate() {
        let q = state.rotations[i];
        recon.poses.insert(c, Pose::new(q, -(q * state.centers[i])));
    }
    recon.plane = state.plane;
    for (p, &pid) in point_ids.iter().enumerate() {
        recon.points.insert(pid, problem.world(&state, p).into());
    }
    if let Some(pl) = &recon.plane {
        for x in recon.points.values_mut() {
            *x = pl.snap(x);
        }
    }
    let per_obs = |c: f64| if count == 0 { 0.0 } else { c / count as f64 };
    recon.final_cost = per_obs(cost);
    Ok(BundleSummary {
        initial_cost: per_obs(initial),
        final_cost: per_obs(cost),
        iterations,
        accepted_steps: accepted,
        observations: count,
    })
}

/// Largest relative deviation between the analytic observation Jacobians
/// and central finite differences (step `1e-6`) over `configurations`
/// random four-camera problems, alternating free and coplanar points.
pub fn max_jacobian_deviation(seed: u64, configurations: usize) -> f64 {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    (0..configurations).map(|i| check_jacobians(&mut rng, i % 2 == 1)).fold(0.0, f64::max)
}

fn random_state(rng: &mut ChaCha8Rng, coplanar: bool) -> (Problem, State) {
    let cams = 4;
    let mut rotations = Vec::new();
    let mut centers = Vec::new();
    for i in 0..cams {
        let angle = i as f64 * 1.3 + rng.random_range(0.0..0.5);
        let eye = Vector3::new(3.0 * libm::cos(angle), 3.0 * libm::sin(angle), rng.random_range(1.5..3.0));
        let pose = Pose::look_at(&eye, &Vector3::new(rng.random_range(-0.3..0.3), 0.0, 0.0), &Vector3::z());
        rotations.push(pose.rotation);
        centers.push(eye);
    }
    let plane = coplanar.then(|| {
        let n = Vector3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), 1.0).normalize();
        let e1 = n.cross(&Vector3::y()).normalize();
        PlaneFrame { origin: Vector3::new(0.1, -0.2, 0.05), e1, e2: n.cross(&e1) }
    });
    let mut points = Vec::new();
    let mut obs_start = vec![0];
    let mut obs = Vec::new();
    for _ in 0..15 {
        let p = if coplanar {
            Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0)
        } else {
            Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5))
        };
        points.push(p);
        for c in 0..cams {
            obs.push((c, Vector2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0))));
        }
        obs_start.push(obs.len());
    }
    let kinds = vec![CameraKind::Fixed, CameraKind::Baseline, CameraKind::Free, CameraKind::Free];
    let problem = Problem {
        kinds,
        block_of_camera: vec![None, Some(0), Some(1), Some(2)],
        plane_block: coplanar.then_some(3),
        blocks: if coplanar { 4 } else { 3 },
        intrinsics: vec![CameraIntrinsics::centered(600.0, 640, 480).unwrap(); cams],
        obs_start,
        obs,
        anchor: centers[0],
        radius: (centers[1] - centers[0]).norm(),
        loss: Loss::Squared,
    };
    (problem, State { rotations, centers, points, plane })
}

fn residual(problem: &Problem, state: &State, p: usize, k: usize) -> Vector2<f64> {
    let (c, meas) = problem.obs[k];
    problem.linearize_observation(state, p, c, &meas).unwrap().residual
}

fn check_jacobians(rng: &mut ChaCha8Rng, coplanar: bool) -> f64 {
    let (problem, state) = random_state(rng, coplanar);
    let h = 1e-6;
    let dim = problem.blocks * BLOCK;
    let npts = state.points.len();
    let mut worst: f64 = 0.0;
    for p in 0..npts {
        for k in problem.obs_start[p]..problem.obs_start[p + 1] {
            let (c, meas) = problem.obs[k];
            let lin = problem.linearize_observation(&state, p, c, &meas).unwrap();
            let scale = lin.camera.abs().max().max(lin.point.abs().max()).max(lin.plane.abs().max());
            let mut check = |analytic: Vector2<f64>, dg: DVector<f64>, dp: Vec<Vector3<f64>>| {
                let neg_g = -&dg;
                let neg_p: Vec<Vector3<f64>> = dp.iter().map(|d| -d).collect();
                let plus = residual(&problem, &problem.apply(&state, &dg, &dp), p, k);
                let minus = residual(&problem, &problem.apply(&state, &neg_g, &neg_p), p, k);
                let fd = (plus - minus) / (2.0 * h);
                worst = worst.max((fd - analytic).abs().max() / scale);
            };
            for j in 0..dim {
                let mut dg = DVector::zeros(dim);
                dg[j] = h;
                let analytic = if Some(j / BLOCK) == problem.block_of_camera[c] {
                    lin.camera.column(j % BLOCK).into_owned()
                } else if Some(j / BLOCK) == problem.plane_block {
                    lin.plane.column(j % BLOCK).into_owned()
                } else {
                    Vector2::zeros()
                };
                check(analytic, dg, vec![Vector3::zeros(); npts]);
            }
            for j in 0..3 {
                let mut dp = vec![Vector3::zeros(); npts];
                dp[p][j] = h;
                if coplanar && j == 2 {
                    continue;
                }
                check(lin.point.column(j).into_owned(), DVector::zeros(dim), dp);
            }
        }
    }
    worst
}
