//! JSON experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::estimators::HminConvention;
use crate::montecarlo::{CountModel, DetectorConfig, RunPlan, SourceConfig, SwitchPlan};
use crate::optics::Block;

use super::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Sweep,
    Switch,
    EurVerify,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Sweep => "sweep",
            Scenario::Switch => "switch",
            Scenario::EurVerify => "eur-verify",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Noiseless counts `pulses * p`, no source or detector model.
    Ideal,
    #[default]
    Montecarlo,
}

impl Mode {
    pub fn count_model(self) -> CountModel {
        match self {
            Mode::Ideal => CountModel::Ideal,
            Mode::Montecarlo => CountModel::Binomial,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::Montecarlo => "montecarlo",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ideal" => Ok(Mode::Ideal),
            "montecarlo" => Ok(Mode::Montecarlo),
            _ => Err(format!("unknown mode '{s}' (expected ideal or montecarlo)")),
        }
    }
}

/// Settings of the statistical analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Sigma multiple for route agreement, flatness and violation flags.
    pub sigma_k: f64,
    pub hmin_convention: HminConvention,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            sigma_k: 3.0,
            hmin_convention: HminConvention::AveragedD,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub plan: RunPlan,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub switch: SwitchPlan,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads for the sweep; absent uses all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults for everything except the scenario.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            mode: Mode::default(),
            plan: RunPlan::default(),
            source: SourceConfig::default(),
            detector: DetectorConfig::default(),
            switch: SwitchPlan::default(),
            analysis: AnalysisConfig::default(),
            output_dir: default_output_dir(),
            workers: None,
        }
    }

    /// Checks every nested invariant; errors name the offending field path.
    pub fn validate(&self) -> Result<(), RunError> {
        let at = |section: &str, (field, msg): (&str, String)| {
            RunError::Config(format!("{section}.{field}: {msg}"))
        };
        self.source.validate().map_err(|e| at("source", e))?;
        self.detector.validate().map_err(|e| at("detector", e))?;
        self.plan.validate().map_err(|e| at("plan", e))?;
        self.switch.validate().map_err(|e| at("switch", e))?;
        crate::montecarlo::check_timing(&self.source, &self.detector)
            .map_err(|e| RunError::Config(format!("source.rep_rate: {e}")))?;
        let k = self.analysis.sigma_k;
        if !(k.is_finite() && k > 0.0) {
            return Err(RunError::Config(format!(
                "analysis.sigma_k: must be > 0, got {k}"
            )));
        }
        if self.workers == Some(0) {
            return Err(RunError::Config("workers: must be >= 1".into()));
        }
        if self.scenario == Scenario::EurVerify {
            if let Some(b) = Block::ALL.iter().find(|b| !self.plan.blocks.contains(b)) {
                return Err(RunError::Config(format!(
                    "plan.blocks: eur-verify needs all of none, path0, path1 (missing {b})"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, RunError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        RunError::Config(format!(
            "line {} column {}, at '{path}': {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn config_error(text: &str) -> String {
        match parse_config(text) {
            Err(RunError::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"scenario": "sweep"}"#).unwrap();
        assert_eq!(cfg.source.mu, 0.2);
        assert_eq!(cfg.detector.efficiency, 0.10);
        assert_eq!(cfg.detector.system_loss_db, 12.0);
        assert_eq!(cfg.plan.phi_s_values.len(), 9);
        for (k, &x) in cfg.plan.phi_s_values.iter().enumerate() {
            assert_abs_diff_eq!(x, k as f64 * FRAC_PI_2 / 8.0, epsilon = 1e-15);
        }
        assert_eq!(cfg.plan.pulses_per_point, 120_000);
        assert_eq!(cfg.mode, Mode::Montecarlo);
    }

    #[test]
    fn negative_mu_names_field() {
        let msg = config_error(r#"{"scenario": "sweep", "source": {"mu": -1}}"#);
        assert!(msg.contains("source.mu"), "{msg}");
    }

    #[test]
    fn unknown_scenario_rejected() {
        let msg = config_error(r#"{"scenario": "teleport"}"#);
        assert!(msg.contains("scenario"), "{msg}");
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn unknown_field_reports_path() {
        let msg = config_error("{\n  \"scenario\": \"sweep\",\n  \"detector\": {\"gain\": 2}\n}");
        assert!(msg.contains("detector"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let msg = config_error("{\"scenario\": ");
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn angle_literals_in_plan() {
        let cfg = parse_config(
            r#"{"scenario": "sweep", "plan": {"phi_s_values": [0, "pi/4", "pi/2"],
                "phi_x_grid": {"start": 0, "stop": "2pi", "steps": 17}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.plan.phi_s_values, vec![0.0, FRAC_PI_2 / 2.0, FRAC_PI_2]);
        assert_eq!(cfg.plan.phi_x_grid.stop, std::f64::consts::TAU);
    }

    #[test]
    fn eur_verify_needs_all_blocks() {
        let msg = config_error(r#"{"scenario": "eur-verify", "plan": {"blocks": ["none"]}}"#);
        assert!(msg.contains("plan.blocks"), "{msg}");
        assert!(parse_config(r#"{"scenario": "eur-verify"}"#).is_ok());
    }

    #[test]
    fn zero_pulses_rejected() {
        let msg = config_error(r#"{"scenario": "sweep", "plan": {"pulses_per_point": 0}}"#);
        assert!(msg.contains("plan.pulses_per_point"), "{msg}");
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::new(Scenario::Switch);
        cfg.plan.coherence = Some(0.9);
        cfg.plan.phi_s_values = vec![0.1, 1.0 / 3.0];
        cfg.workers = Some(3);
        assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
    }
}
