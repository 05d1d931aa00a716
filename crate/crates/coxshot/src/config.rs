//! Experiment configuration files and short model strings.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use coxshot_core::random_measure::{JumpDist, MeasureModel, MixingDist};
use coxshot_core::shot_noise::PaymentModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] coxshot_core::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown model `{0}`; expected gamma:a,b | poisson:c | deterministic:c | compound-exp:r,θ | mixed:v1,v2")]
    UnknownModel(String),
    #[error("model `{spec}` takes {expected} parameter(s)")]
    Arity { spec: String, expected: usize },
    #[error("bad number `{0}` in model string")]
    Number(String),
}

/// Evaluation times of `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `step, 2·step, …` up to the horizon.
    Step(f64),
    Times(Vec<f64>),
}

impl GridSpec {
    pub fn resolve(&self, horizon: f64) -> Result<Vec<f64>, ConfigError> {
        match self {
            GridSpec::Step(step) => {
                if !(*step > 0.0 && step.is_finite()) {
                    return Err(ConfigError::Invalid(format!("grid step {step} must be positive")));
                }
                let n = (horizon / step + 1e-9).floor() as usize;
                let mut times: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
                if let Some(last) = times.last_mut() {
                    if (*last - horizon).abs() < 1e-9 * horizon {
                        *last = horizon;
                    }
                }
                Ok(times)
            }
            GridSpec::Times(times) => {
                if times.iter().any(|&u| !(u > 0.0 && u <= horizon)) {
                    return Err(ConfigError::Invalid(format!(
                        "grid times must lie in (0, {horizon}]"
                    )));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::Invalid("grid times must increase".into()));
                }
                Ok(times.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_prefix() -> String {
    "run".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            prefix: default_prefix(),
        }
    }
}

/// A simulation experiment: models, horizon, evaluation grid, seed, outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: MeasureModel,
    #[serde(default = "zero_payment")]
    pub payment: PaymentModel,
    pub horizon: f64,
    pub grid: GridSpec,
    /// Grid cells per unit time for Gamma paths.
    #[serde(default = "default_resolution")]
    pub knots_per_unit: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn zero_payment() -> PaymentModel {
    PaymentModel::Zero
}

fn default_resolution() -> usize {
    coxshot_core::random_measure::PathOptions::default().knots_per_unit
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.measure.validate()?;
        self.payment.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(coxshot_core::Error::NonPositiveHorizon(self.horizon).into());
        }
        if self.knots_per_unit == 0 {
            return Err(ConfigError::Invalid("knots_per_unit must be positive".into()));
        }
        self.grid.resolve(self.horizon)?;
        Ok(())
    }

    pub fn grid_times(&self) -> Vec<f64> {
        self.grid.resolve(self.horizon).expect("validated grid")
    }

    pub fn path_options(&self) -> coxshot_core::random_measure::PathOptions {
        coxshot_core::random_measure::PathOptions {
            knots_per_unit: self.knots_per_unit,
        }
    }
}

/// A measure model written as `name:p1,p2,…`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArg(pub MeasureModel);

impl FromStr for ModelArg {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let values = params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| ConfigError::Number(p.into())))
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |expected: usize| {
            if values.len() == expected {
                Ok(())
            } else {
                Err(ConfigError::Arity {
                    spec: s.into(),
                    expected,
                })
            }
        };
        let model = match name.trim() {
            "gamma" => {
                arity(2)?;
                MeasureModel::Gamma {
                    shape: values[0],
                    rate: values[1],
                }
            }
            "poisson" => {
                arity(1)?;
                MeasureModel::PoissonCounting { rate: values[0] }
            }
            "deterministic" => {
                arity(1)?;
                MeasureModel::Deterministic { slope: values[0] }
            }
            "compound-exp" => {
                arity(2)?;
                MeasureModel::CompoundPoisson {
                    rate: values[0],
                    jumps: JumpDist::Exponential { rate: values[1] },
                }
            }
            "mixed" => {
                arity(2)?;
                MeasureModel::MixedPoisson {
                    intensity: MixingDist::two_point(values[0], values[1]),
                }
            }
            other => return Err(ConfigError::UnknownModel(other.into())),
        };
        model.validate()?;
        Ok(ModelArg(model))
    }
}
