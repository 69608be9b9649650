use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hopfavg::models::{model_info, DEFAULT_SEED};
use hopfavg::predict::DEFAULT_DEGENERACY_THRESHOLD;
use hopfavg::EpsilonChoice;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Read { .. } => "config-unreadable",
            ConfigError::Parse(_) => "config-malformed",
            ConfigError::Invalid(_) => "config-invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSetting {
    Value(f64),
    Keyword(String),
}

impl Default for EpsilonSetting {
    fn default() -> Self {
        EpsilonSetting::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// `|K|` below this is reported as degenerate.
    pub degeneracy_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub model: String,
    #[serde(default)]
    pub model_params: BTreeMap<String, f64>,
    pub param_bracket: Option<[f64; 2]>,
    /// Offsets from the critical parameter value; the model's defaults when absent.
    pub alpha_offsets: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilon: EpsilonSetting,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Surface constants analysed for `predator-prey-3d`; the model's `c` when absent.
    pub slices: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: AnalysisConfig = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if let Err(e) = model_info(&self.model) {
            return invalid(e.to_string());
        }
        self.epsilon()?;
        if let Some([lo, hi]) = self.param_bracket {
            if !(lo < hi) {
                return invalid(format!("param_bracket [{lo}, {hi}] is empty"));
            }
        }
        if let Some(t) = self.tolerances.degeneracy_threshold {
            if !(t > 0.0) {
                return invalid(format!("degeneracy_threshold must be positive, got {t}"));
            }
        }
        if self.alpha_offsets.iter().flatten().any(|o| !o.is_finite()) {
            return invalid("alpha_offsets must be finite".into());
        }
        Ok(())
    }

    pub fn epsilon(&self) -> Result<EpsilonChoice, ConfigError> {
        match &self.epsilon {
            EpsilonSetting::Keyword(k) if k == "auto" => Ok(EpsilonChoice::Auto),
            EpsilonSetting::Value(e) if *e > 0.0 && *e < 1.0 => Ok(EpsilonChoice::Fixed(*e)),
            other => Err(ConfigError::Invalid(format!(
                "epsilon must be \"auto\" or a number in (0, 1), got {other:?}"
            ))),
        }
    }

    pub fn degeneracy_threshold(&self) -> f64 {
        self.tolerances.degeneracy_threshold.unwrap_or(DEFAULT_DEGENERACY_THRESHOLD)
    }
}
