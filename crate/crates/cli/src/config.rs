use serde::{Deserialize, Serialize};

use gexp_core::gheat::SolverConfig;
use gexp_core::scenario::{ControlFamily, ScenarioGrid, CONFIDENCE};
use gexp_core::sublinear::{SigmaSpec, Uncertainty};

use crate::experiments::CATALOG;

/// Problem with a config file, located by field path and line when known.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{field}: {message}", line.map(|l| format!("line {l}, ")).unwrap_or_default())]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            line: None,
            message: message.into(),
        }
    }
}

/// Monte Carlo grid and control families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub controls: Vec<ControlFamily>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            n_steps: 100,
            n_paths: 4000,
            seed: 1,
            controls: vec![ControlFamily::Constants, ControlFamily::BangBang, ControlFamily::SignFeedback],
        }
    }
}

impl McConfig {
    pub fn grid(&self) -> ScenarioGrid<f64> {
        ScenarioGrid {
            dt: self.dt,
            n_steps: self.n_steps,
            n_paths: self.n_paths,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute error budget for grid (PDE) values.
    pub grid_tol: f64,
    /// Confidence level of Monte Carlo half-widths.
    pub stat_confidence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grid_tol: 1e-3,
            stat_confidence: CONFIDENCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn default_analytic() -> String {
    "z2".into()
}

/// One experiment run. Missing sections take their defaults; a missing
/// `solver` is derived from the uncertainty set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub sigma_spec: SigmaSpec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig<f64>>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    /// Analytic-function catalog key for the complex experiments.
    #[serde(default = "default_analytic")]
    pub analytic: String,
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates a JSON config.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError {
                field: if field == "." { "<root>".into() } else { field },
                line: Some(inner.line()),
                message: inner.to_string(),
            }
        })?;
        config.validate().map_err(|mut e| {
            let key = e.field.rsplit('.').next().unwrap_or(&e.field).to_string();
            e.line = line_of_key(text, &key);
            e
        })?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn uncertainty(&self) -> Result<Uncertainty<f64>, ConfigError> {
        self.sigma_spec
            .resolve()
            .map_err(|e| ConfigError::new("sigma_spec", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !CATALOG.iter().any(|(id, _)| *id == self.experiment_id) {
            let known: Vec<&str> = CATALOG.iter().map(|(id, _)| *id).collect();
            return Err(ConfigError::new(
                "experiment_id",
                format!("unknown experiment {:?}; known: {}", self.experiment_id, known.join(", ")),
            ));
        }
        let u = self.uncertainty()?;
        if let Some(solver) = &self.solver {
            solver
                .discretize(&u)
                .map_err(|e| ConfigError::new("solver", e.to_string()))?;
        }
        self.mc
            .grid()
            .validate()
            .map_err(|e| ConfigError::new("mc", e.to_string()))?;
        if self.mc.controls.is_empty() {
            return Err(ConfigError::new("mc.controls", "at least one control family is required"));
        }
        let t = &self.tolerances;
        if !(t.grid_tol > 0.0 && t.grid_tol.is_finite()) {
            return Err(ConfigError::new("tolerances.grid_tol", "must be positive"));
        }
        if !(t.stat_confidence > 0.0 && t.stat_confidence < 1.0) {
            return Err(ConfigError::new("tolerances.stat_confidence", "must lie in (0, 1)"));
        }
        gexp_core::complex::AnalyticFunction::<f64>::from_key(&self.analytic)
            .map_err(|e| ConfigError::new("analytic", e.to_string()))?;
        Ok(())
    }

    /// Replaces the Monte Carlo seed with `value` when given.
    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<(), ConfigError> {
        if let Some(v) = value {
            self.mc.seed = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::new("GEXP_SEED", format!("not an unsigned integer: {v:?}")))?;
        }
        Ok(())
    }
}
