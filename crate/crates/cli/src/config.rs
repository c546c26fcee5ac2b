//! JSON run configuration. Every key is optional; unknown keys are errors.

use std::fs;
use std::path::Path;

use genmean::experiments::ScalingConfig;
use genmean::{Error, ExperimentSpec, Result, Setting, SynthSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Training protocol, optimizer and propagation settings.
    pub experiment: ExperimentSpec,
    /// Synthetic generator settings used by `synth` and `bench`.
    pub synth: SynthSpec,
    pub scaling: ScalingSection,
}

/// Instances timed by `scaling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub repeats: usize,
    pub setting: Setting,
    pub std: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        let d = ScalingConfig::default();
        Self {
            repeats: d.repeats,
            setting: d.setting,
            std: d.std,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("{}: {e}", path.display()),
        })
    }

    pub fn scaling(&self, sizes: Vec<usize>, method: genmean::Method, seed: u64) -> ScalingConfig {
        ScalingConfig {
            sizes,
            method,
            seed,
            repeats: self.scaling.repeats,
            setting: self.scaling.setting,
            std: self.scaling.std,
            experiment: self.experiment.clone(),
        }
    }
}

/// One-line `#` comment carrying the command, seed and resolved config.
pub fn provenance_line(command: &str, seed: u64, config: &impl Serialize) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    format!("# genmean {command} seed={seed} config={json}")
}
