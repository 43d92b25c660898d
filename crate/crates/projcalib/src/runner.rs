//! Parallel Monte-Carlo sweeps.

use projcalib_core::simulator::{run_trial, Scenario, ScenarioConfig, TrialRecord};
use projcalib_core::solver::SolverOptions;
use rayon::prelude::*;

/// One sweep: every scenario at every noise level, `trials` times.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub base: ScenarioConfig,
    pub scenarios: Vec<Scenario>,
    pub sigmas: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    pub options: SolverOptions,
}

impl Sweep {
    pub fn config_for(&self, scenario: Scenario) -> ScenarioConfig {
        ScenarioConfig { scenario, ..self.base.clone() }
    }

    /// Runs on a pool of `threads` workers (all cores when `None`). Trial
    /// seeds are `seed + trial` regardless of scheduling, and the output is
    /// sorted by (scenario, sigma, trial).
    pub fn run(&self, threads: Option<usize>) -> Result<Vec<TrialRecord>, rayon::ThreadPoolBuildError> {
        let mut jobs = Vec::new();
        for &scenario in &self.scenarios {
            for &sigma in &self.sigmas {
                for trial in 0..self.trials {
                    jobs.push((scenario, sigma, trial));
                }
            }
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
        let mut records: Vec<TrialRecord> = pool.install(|| {
            jobs.par_iter()
                .map(|&(scenario, sigma, trial)| {
                    run_trial(&self.config_for(scenario), sigma, trial, self.seed, &self.options)
                })
                .collect()
        });
        records.sort_by(|a, b| {
            a.scenario.cmp(&b.scenario).then(a.sigma.total_cmp(&b.sigma)).then(a.trial.cmp(&b.trial))
        });
        Ok(records)
    }
}
