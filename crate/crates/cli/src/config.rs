use std::path::Path;

use serde::{Deserialize, Serialize};
use viewcurate::clustering::ClusteringConfig;
use viewcurate::rng::PRNG_ALGORITHM;
use viewcurate::sampling::SamplingConfig;
use viewcurate::synth::{default_intrinsics, SynthSpec};
use viewcurate::{Error, Intrinsics, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub splat_radius: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { splat_radius: 1 }
    }
}

/// Every tunable of the pipeline. Loaded from `--config`, then overridden by
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub clustering: ClusteringConfig,
    pub sampling: SamplingConfig,
    pub synth: SynthSpec,
    pub render: RenderConfig,
    /// Camera model for synthetic scans and for augmented poses when no real
    /// scene is given.
    pub intrinsics: Intrinsics,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            clustering: ClusteringConfig::default(),
            sampling: SamplingConfig::default(),
            synth: SynthSpec::default(),
            render: RenderConfig::default(),
            intrinsics: default_intrinsics(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.clustering.seed = seed;
        self.sampling.seed = seed;
        self.synth.seed = seed;
    }
}

#[derive(Serialize)]
struct Echo<'a> {
    command: &'a str,
    tool_version: &'a str,
    prng: &'a str,
    config: &'a PipelineConfig,
}

/// Writes the effective configuration as `config.json` in `dir`.
pub fn echo_config(dir: &Path, command: &str, cfg: &PipelineConfig) -> Result<()> {
    let echo = Echo {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        prng: PRNG_ALGORITHM,
        config: cfg,
    };
    let path = dir.join("config.json");
    let text = serde_json::to_string_pretty(&echo)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}
