//! Optional TOML configuration for the command-line front end.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::causal::ScmConfig;
use crate::error::{read_file, Error, Result};
use crate::fusion::FusionWeights;
use crate::generator::GeneratorBinding;
use crate::logic::ProverLimits;
use crate::model::Thresholds;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Text,
    Canonical,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "canonical" => Ok(OutputFormat::Canonical),
            _ => Err(Error::InvalidArgument(format!("unknown output format {s:?}"))),
        }
    }
}

/// Every setting of a verification run. Unset paths fall back to built-in
/// data (the bundled lexicon, no rules) or to command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<FusionWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prover: Option<ProverLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scm: Option<ScmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorBinding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl PipelineConfig {
    /// Parses without touching the file system.
    pub fn parse(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if config.weights.is_some() && config.weights_path.is_some() {
            return Err(Error::Config("give either weights or weights_path, not both".into()));
        }
        if let Some(scm) = &config.scm {
            scm.validate()?;
        }
        if let Some(t) = config.thresholds {
            Thresholds::new(t.accept, t.reject).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(w) = config.weights {
            FusionWeights::new(w.alpha, w.beta, w.gamma, w.bias)?;
        }
        Ok(config)
    }

    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory, and every referenced file must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = Self::parse(&read_file(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in config.paths_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.check_paths()?;
        Ok(config)
    }

    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [&mut self.kb_path, &mut self.rules_path, &mut self.lexicon_path, &mut self.weights_path]
            .into_iter()
            .flatten()
    }

    pub fn check_paths(&self) -> Result<()> {
        for p in [&self.kb_path, &self.rules_path, &self.lexicon_path, &self.weights_path].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Canonical TOML text; `parse(to_toml(c)) == c`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
