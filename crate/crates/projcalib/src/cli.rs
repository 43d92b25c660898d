//! `projcalib` command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use projcalib_core::eval::{evaluate, EvaluationInput};
use projcalib_core::msm::{fuse_detections, generate_schedule, ProjectionSchedule};
use projcalib_core::simulator::{
    grid_floor_points, simulate_detections, simulate_heldout, simulate_scene, summarize, MsmVisibility, Scenario, ScenarioConfig,
};
use projcalib_core::solver::{calibrate, Loss, SolverOptions};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{self, ReconstructionFile, ReportFile, SceneFile, ScheduleFile, SweepMetadata};
use crate::runner::Sweep;
use crate::Generator;

#[derive(Debug, Parser)]
#[command(name = "projcalib", version, about = "Multi-camera external calibration from projected multi-scale markers")]
pub struct Cli {
    /// Seed for all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration (scenario, solver and schedule sections).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact destination; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo sweeps; all cores when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the projection schedule as JSON.
    Schedule,
    /// Simulate a scene and write it as JSON.
    Simulate(SimulateArgs),
    /// Calibrate a scene or fused marker detections.
    Calibrate(CalibrateArgs),
    /// Evaluate a reconstruction against ground truth and held-out data.
    Evaluate(EvaluateArgs),
    /// Sweep scenarios and noise levels; writes CSV.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// board_volume, board_floor or grid_floor.
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,
    /// Start from the full operating-room rig with a close-up camera.
    #[arg(long)]
    pub full_like: bool,
    /// Gate visibility on the imaged marker size with the default marker set.
    #[arg(long)]
    pub msm: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Observation noise in pixels.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Also write an independent held-out scene.
    #[arg(long)]
    pub heldout: Option<PathBuf>,
    /// Also write per-scale marker detections as JSON lines.
    #[arg(long)]
    pub detections: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Scene JSON providing intrinsics and, without --detections, observations.
    #[arg(long)]
    pub scene: PathBuf,
    /// Raw marker detections to fuse instead of the scene observations.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Schedule JSON for --detections; regenerated from the config otherwise.
    #[arg(long, requires = "detections")]
    pub schedule: Option<PathBuf>,
    /// Constrain all points to a common plane.
    #[arg(long)]
    pub coplanar: bool,
    /// Huber loss with this scale in pixels.
    #[arg(long)]
    pub huber: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub reconstruction: PathBuf,
    /// Scene the reconstruction was computed from; its poses and points are
    /// used as ground truth when present.
    #[arg(long)]
    pub scene: PathBuf,
    /// Held-out scene for independent reprojection errors.
    #[arg(long)]
    pub heldout: Option<PathBuf>,
    /// Also write per-camera results as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: u32,
    /// Comma-separated scenario names, or `all`.
    #[arg(long, default_value = "all")]
    pub scenarios: String,
    /// Comma-separated noise levels in pixels.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3,0.5,1.0")]
    pub sigmas: Vec<f64>,
    #[arg(long)]
    pub full_like: bool,
    #[arg(long)]
    pub coplanar: bool,
    /// Also write per-(scenario, sigma) means as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::from_name(s).ok_or_else(|| format!("unknown scenario `{s}`"))
}

/// Parses arguments, runs the command and returns the exit status. Errors
/// are reported on stderr as one line of JSON.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim_end().to_owned());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Context { cli, config };
    match &cli.command {
        Command::Schedule => ctx.schedule(),
        Command::Simulate(a) => ctx.simulate(a),
        Command::Calibrate(a) => ctx.calibrate(a),
        Command::Evaluate(a) => ctx.evaluate(a),
        Command::Montecarlo(a) => ctx.montecarlo(a),
    }
}

struct Context<'a> {
    cli: &'a Cli,
    config: RunConfig,
}

impl Context<'_> {
    fn seed(&self) -> u64 {
        self.cli.seed.unwrap_or(self.config.solver.seed)
    }

    /// Writes the artifact; the summary goes to stdout only when the
    /// artifact itself does not.
    fn emit(&self, artifact: &[u8], summary: &str) -> Result<(), CliError> {
        io::write_output(self.cli.out.as_deref(), artifact)?;
        let mut sink: Box<dyn Write> =
            if self.cli.out.is_some() { Box::new(std::io::stdout()) } else { Box::new(std::io::stderr()) };
        let _ = sink.write_all(summary.as_bytes());
        Ok(())
    }

    fn scenario(&self, args: &ScenarioArgs) -> ScenarioConfig {
        let mut c = if args.full_like { ScenarioConfig::full_like() } else { self.config.scenario.clone() };
        if let Some(s) = args.scenario {
            c.scenario = s;
        }
        if args.msm && c.msm.is_none() {
            c.msm = Some(MsmVisibility::default());
        }
        c
    }

    fn generate_schedule(&self) -> Result<ProjectionSchedule, CliError> {
        Ok(generate_schedule(&self.config.schedule)?)
    }

    fn schedule(&self) -> Result<(), CliError> {
        let schedule = self.generate_schedule()?;
        let file = ScheduleFile { generator: Generator::default(), total_duration_s: schedule.total_duration_s(), schedule };
        let summary = format!(
            "schedule: {} markers, {} steps, {} scales, {:.1} s\n",
            file.schedule.markers.len(),
            file.schedule.steps.len(),
            file.schedule.scales.len(),
            file.total_duration_s
        );
        self.emit(io::to_json(&file).as_bytes(), &summary)
    }

    fn simulate(&self, args: &SimulateArgs) -> Result<(), CliError> {
        let mut config = self.scenario(&args.scenario);
        if let Some(s) = args.sigma {
            config.sigma = s;
        }
        let seed = self.seed();
        let scene = simulate_scene(&config, seed)?;
        if let Some(path) = &args.heldout {
            let (points, obs) = simulate_heldout(&config, &scene.sampled_rig(), seed)?;
            write_file(path, io::to_json(&SceneFile::from_heldout(&scene, &points, &obs)).as_bytes())?;
        }
        if let Some(path) = &args.detections {
            let msm = match (config.scenario, &config.msm) {
                (Scenario::GridFloor, Some(m)) => m,
                _ => return Err(CliError::Usage("--detections needs the grid_floor scenario with --msm".into())),
            };
            let schedule = self.generate_schedule()?;
            let points = grid_floor_points(&config.grid, false);
            let raw = simulate_detections(&schedule, &scene.rig, &points, msm, config.sigma, seed);
            write_file(path, io::write_detections(&raw).as_bytes())?;
        }
        let summary = format!(
            "simulated {}: {} cameras, {} points, {} observations (seed {seed}, sigma {} px)\n",
            config.scenario,
            scene.rig.len(),
            scene.points.len(),
            scene.observations.len(),
            config.sigma
        );
        self.emit(io::to_json(&SceneFile::from_scene(&scene)).as_bytes(), &summary)
    }

    fn calibrate(&self, args: &CalibrateArgs) -> Result<(), CliError> {
        let scene: SceneFile = io::read_json(&args.scene)?;
        let intrinsics = scene.intrinsics()?;
        let observations = match &args.detections {
            None => scene.observation_set()?,
            Some(path) => {
                let raw = io::read_detections(path)?;
                let schedule = match &args.schedule {
                    Some(p) => io::read_json::<ScheduleFile>(p)?.schedule,
                    None => self.generate_schedule()?,
                };
                fuse_detections(&raw, &schedule)?
            }
        };
        let mut options = SolverOptions { seed: self.seed(), ..self.config.solver };
        options.coplanar |= args.coplanar;
        if let Some(scale) = args.huber {
            options.loss = Loss::Huber { scale };
        }
        let recon = calibrate(&observations, &intrinsics, &options)?;
        let file = ReconstructionFile::new(&recon, &observations, &intrinsics, &options);
        let mut summary = format!("registered {} of {} cameras", recon.poses.len(), intrinsics.len());
        if let Some(s) = &file.overall {
            summary.push_str(&format!("; reprojection mean {:.3} px, rms {:.3} px, max {:.3} px", s.mean_px, s.rms_px, s.max_px));
        }
        if !recon.unregistered.is_empty() {
            let ids: Vec<String> = recon.unregistered.iter().map(|c| c.to_string()).collect();
            summary.push_str(&format!("; unregistered: {}", ids.join(", ")));
        }
        summary.push('\n');
        self.emit(io::to_json(&file).as_bytes(), &summary)
    }

    fn evaluate(&self, args: &EvaluateArgs) -> Result<(), CliError> {
        let recon = io::read_json::<ReconstructionFile>(&args.reconstruction)?.to_reconstruction()?;
        let scene: SceneFile = io::read_json(&args.scene)?;
        let intrinsics = scene.intrinsics()?;
        let calibration = scene.observation_set()?;
        let truth = scene.poses()?;
        let truth_points = scene.points();
        let heldout = args.heldout.as_deref().map(read_scene_observations).transpose()?;
        let report = evaluate(EvaluationInput {
            reconstruction: &recon,
            calibration: &calibration,
            intrinsics: &intrinsics,
            ground_truth_poses: truth.as_ref(),
            ground_truth_points: (truth.is_some() && !truth_points.is_empty()).then_some(&truth_points),
            heldout: heldout.as_ref(),
        })?;
        let file = ReportFile::new(&report, &scene.classes());
        if let Some(path) = &args.csv {
            write_file(path, &io::camera_csv(&file).map_err(|e| CliError::Format(e.to_string()))?)?;
        }
        let mut summary = file.success_grid();
        if let Some(p) = &file.pose {
            summary.push_str(&format!("rotation RMSE {:.4} deg, translation RMSE {:.6}\n", p.rot_rmse_deg, p.trans_rmse));
        }
        self.emit(io::to_json(&file).as_bytes(), &summary)
    }

    fn montecarlo(&self, args: &MonteCarloArgs) -> Result<(), CliError> {
        if args.trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        let scenarios = if args.scenarios == "all" {
            Scenario::ALL.to_vec()
        } else {
            args.scenarios.split(',').map(|s| parse_scenario(s.trim()).map_err(CliError::Usage)).collect::<Result<_, _>>()?
        };
        if args.sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(CliError::Usage("noise levels must be finite and non-negative".into()));
        }
        let base = if args.full_like { ScenarioConfig::full_like() } else { self.config.scenario.clone() };
        let mut options = self.config.solver;
        options.coplanar |= args.coplanar;
        let sweep = Sweep { base, scenarios, sigmas: args.sigmas.clone(), trials: args.trials, seed: self.seed(), options };
        for &s in &sweep.scenarios {
            sweep.config_for(s).validate()?;
        }
        let records = sweep.run(self.cli.threads).map_err(|e| CliError::Usage(e.to_string()))?;
        let meta = SweepMetadata {
            generator: Generator::default(),
            seed: sweep.seed,
            trials: sweep.trials,
            sigmas: sweep.sigmas.clone(),
            scenarios: sweep.scenarios.clone(),
            config: sweep.base.clone(),
            solver: sweep.options,
        };
        let curves = summarize(&records);
        if let Some(path) = &args.summary {
            let json: Vec<serde_json::Value> = curves
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "scenario": c.scenario, "sigma": c.sigma, "trials": c.trials, "failures": c.failures,
                        "rot_rmse_deg": finite(c.rot_rmse_deg), "trans_rmse": finite(c.trans_rmse),
                        "trans_rmse_rel": finite(c.trans_rmse_rel), "mean_reproj_px": finite(c.mean_reproj_px),
                        "rms_reproj_px": finite(c.rms_reproj_px),
                    })
                })
                .collect();
            write_file(path, io::to_json(&serde_json::json!({ "generator": Generator::default(), "curves": json })).as_bytes())?;
        }
        let mut summary = format!(
            "{:<14}{:>7}{:>8}{:>9}{:>14}{:>14}{:>12}\n",
            "scenario", "sigma", "trials", "failed", "rot_rmse_deg", "trans_rmse", "reproj_px"
        );
        for c in &curves {
            summary.push_str(&format!(
                "{:<14}{:>7}{:>8}{:>9}{:>14.6}{:>14.8}{:>12.4}\n",
                c.scenario.name(),
                c.sigma,
                c.trials,
                c.failures,
                c.rot_rmse_deg,
                c.trans_rmse,
                c.mean_reproj_px
            ));
        }
        self.emit(&io::write_trials_csv(&meta, &records)?, &summary)
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read_scene_observations(path: &Path) -> Result<projcalib_core::ObservationSet, CliError> {
    io::read_json::<SceneFile>(path)?.observation_set()
}
