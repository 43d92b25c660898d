use std::path::Path;

use projcalib_core::msm::ScheduleSpec;
use projcalib_core::simulator::ScenarioConfig;
use projcalib_core::solver::SolverOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Contents of a `--config` file. Every section and every top-level field
/// of a section may be omitted; nested structures must be complete.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub solver: SolverOptions,
    pub schedule: ScheduleSpec,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use projcalib_core::simulator::Scenario;

    #[test]
    fn partial_config_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"scenario": {"scenario": "board_floor", "sigma": 0.3}}"#).unwrap();
        assert_eq!(c.scenario.scenario, Scenario::BoardFloor);
        assert_eq!(c.scenario.sigma, 0.3);
        assert_eq!(c.scenario.far, ScenarioConfig::default().far);
        assert_eq!(c.solver, SolverOptions::default());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig { scenario: ScenarioConfig::full_like(), ..RunConfig::default() };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn invalid_scales_are_rejected() {
        let r = serde_json::from_str::<RunConfig>(r#"{"schedule": {"scales": [2.0, 1.0]}}"#);
        assert!(r.is_err());
    }
}
