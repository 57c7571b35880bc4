//! Run configuration: solver settings plus optional generator parameters.

use serde::{Deserialize, Serialize};
use udgfl_core::pipeline::SolveConfig;

use crate::generate::GeneratorParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub solve: SolveConfig,
    /// Parameters the instance was generated with, when known.
    pub generator: Option<GeneratorParams>,
    /// Merge coincident input sites instead of rejecting them.
    pub merge: bool,
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        self.solve.validate()?;
        if let Some(g) = &self.generator {
            g.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
