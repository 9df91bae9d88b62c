//! Server settings from a TOML file with environment overrides.
//!
//! ```toml
//! bind = "127.0.0.1:8080"
//! public_url = "http://localhost:8080"
//! log_dir = "sessions"
//! turn_cap = 200
//!
//! [maze]
//! width = 9
//! height = 9
//! rounds = 5
//!
//! [planner]
//! iterations = 100
//! exploration = 1.4142135623730951
//!
//! [llm]
//! endpoint = "https://api.openai.com/v1"
//! model = "gpt-4"
//! api_key_env = "OPENAI_API_KEY"
//! ```

use std::path::{Path, PathBuf};

use gnomes_core::game::{RewardSpec, DEFAULT_ROUNDS};
use gnomes_core::harness::DEFAULT_TURN_CAP;
use gnomes_core::language::LlmClientConfig;
use gnomes_core::PlannerConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for {var}: {value}")]
    Env { var: &'static str, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MazeDefaults {
    pub width: u16,
    pub height: u16,
    pub rounds: u8,
}

impl Default for MazeDefaults {
    fn default() -> Self {
        MazeDefaults {
            width: 9,
            height: 9,
            rounds: DEFAULT_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    /// Base URL used in join links; defaults to `http://<bind>`.
    pub public_url: Option<String>,
    /// Session logs are written here; none are written when unset.
    pub log_dir: Option<PathBuf>,
    pub turn_cap: u32,
    pub maze: MazeDefaults,
    pub planner: PlannerConfig,
    pub reward: RewardSpec,
    pub llm: Option<LlmClientConfig>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            bind: "127.0.0.1:8080".into(),
            public_url: None,
            log_dir: None,
            turn_cap: DEFAULT_TURN_CAP,
            maze: MazeDefaults::default(),
            planner: PlannerConfig::default(),
            reward: RewardSpec::default(),
            llm: None,
        }
    }
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` if given, then applies `GNOMES_*` variables from the
    /// process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text)?
            }
            None => ServerConfig::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    /// Overrides: `GNOMES_BIND`, `GNOMES_PORT`, `GNOMES_PUBLIC_URL`,
    /// `GNOMES_LOG_DIR`, `GNOMES_PLANNER_ITERATIONS`, `GNOMES_LLM_ENDPOINT`,
    /// `GNOMES_LLM_MODEL`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var("GNOMES_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("GNOMES_PORT") {
            let port: u16 = v.parse().map_err(|_| ConfigError::Env {
                var: "GNOMES_PORT",
                value: v.clone(),
            })?;
            let host = self.bind.rsplit_once(':').map_or(self.bind.as_str(), |(h, _)| h);
            self.bind = format!("{host}:{port}");
        }
        if let Some(v) = var("GNOMES_PUBLIC_URL") {
            self.public_url = Some(v);
        }
        if let Some(v) = var("GNOMES_LOG_DIR") {
            self.log_dir = Some(v.into());
        }
        if let Some(v) = var("GNOMES_PLANNER_ITERATIONS") {
            self.planner.iterations = v.parse().map_err(|_| ConfigError::Env {
                var: "GNOMES_PLANNER_ITERATIONS",
                value: v.clone(),
            })?;
        }
        let endpoint = var("GNOMES_LLM_ENDPOINT");
        let model = var("GNOMES_LLM_MODEL");
        match (&mut self.llm, endpoint, model) {
            (Some(llm), e, m) => {
                if let Some(e) = e {
                    llm.endpoint = e;
                }
                if let Some(m) = m {
                    llm.model = m;
                }
            }
            (None, Some(endpoint), Some(model)) => {
                self.llm = Some(toml::from_str(&format!("endpoint = {endpoint:?}\nmodel = {model:?}"))?);
            }
            (None, Some(_), None) | (None, None, Some(_)) => {
                return Err(ConfigError::Invalid(
                    "GNOMES_LLM_ENDPOINT and GNOMES_LLM_MODEL must be set together".into(),
                ))
            }
            (None, None, None) => {}
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.planner.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.reward.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.maze.width < 2 || self.maze.height < 2 || self.maze.rounds == 0 {
            return Err(ConfigError::Invalid("maze must be at least 2x2 with one round".into()));
        }
        if self.turn_cap == 0 {
            return Err(ConfigError::Invalid("turn_cap must be positive".into()));
        }
        Ok(())
    }

    pub fn public_url(&self) -> String {
        self.public_url
            .clone()
            .unwrap_or_else(|| format!("http://{}", self.bind))
            .trim_end_matches('/')
            .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ServerConfig::from_toml("").unwrap(), ServerConfig::default());
    }

    #[test]
    fn file_then_env() {
        let mut c = ServerConfig::from_toml(
            "bind = \"0.0.0.0:9000\"\nlog_dir = \"/tmp/x\"\n[maze]\nwidth = 6\n[llm]\nendpoint = \"http://a\"\nmodel = \"m\"\n",
        )
        .unwrap();
        assert_eq!(c.maze, MazeDefaults { width: 6, ..MazeDefaults::default() });
        let env: HashMap<&str, &str> = [("GNOMES_PORT", "7000"), ("GNOMES_LLM_MODEL", "other")].into();
        c.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(c.bind, "0.0.0.0:7000");
        assert_eq!(c.llm.as_ref().unwrap().model, "other");
        assert_eq!(c.llm.unwrap().timeout_ms, 10_000);
    }

    #[test]
    fn env_alone_configures_llm() {
        let mut c = ServerConfig::default();
        let env: HashMap<&str, &str> = [("GNOMES_LLM_ENDPOINT", "http://x/v1"), ("GNOMES_LLM_MODEL", "m")].into();
        c.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(c.llm.unwrap().endpoint, "http://x/v1");
        let mut c = ServerConfig::default();
        assert!(c.apply_env(|k| (k == "GNOMES_LLM_MODEL").then(|| "m".to_string())).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ServerConfig::from_toml("prot = 1").is_err());
        assert!(ServerConfig::from_toml("[planner]\niterations = 0\nexploration = 1.0").unwrap().validate().is_err());
    }
}
