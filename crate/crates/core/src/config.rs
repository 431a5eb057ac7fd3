//! Run configuration: environment plus agent settings in one TOML file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::env::{EnvConfig, ENV_SCHEMA_VERSION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub env: EnvConfig,
    pub agent: AgentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: ENV_SCHEMA_VERSION,
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != ENV_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported config schema version {}",
                self.schema_version
            )));
        }
        self.env.validate()?;
        self.agent.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("run config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid_and_unknown() {
        let mut cfg = RunConfig::default();
        cfg.agent.gamma = 1.0;
        assert!(matches!(
            RunConfig::from_toml_str(&cfg.to_toml_string()),
            Err(Error::Config(_))
        ));
        let text = RunConfig::default().to_toml_string() + "\nbogus = 1\n";
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn missing_fields_take_defaults() {
        let cfg = RunConfig::from_toml_str("schema_version = 1\n[env]\nt_max = 7\n[agent]\nepisodes = 3\n").unwrap();
        assert_eq!(cfg.env.t_max, 7);
        assert_eq!(cfg.agent.episodes, 3);
        assert_eq!(cfg.env.delta, EnvConfig::default().delta);
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }
}
