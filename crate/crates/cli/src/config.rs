//! Effective configuration: TOML file, then command-line flags, then
//! environment, each overriding the previous.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use graphilosophy::chunking::ChunkParams;
use graphilosophy::graph::BuildConfig;
use graphilosophy::pipeline::PipelineConfig;
use graphilosophy_server::{DEFAULT_BIND, ENV_BIND};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// `hash`, `hash:<dim>:<seed>`, `file:<path>` or `http`.
    pub embedder: Option<String>,
    /// Response cache for the http embedder.
    pub http_cache: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub speakers: Option<PathBuf>,
    /// Regexes for running headers and footers dropped during normalization.
    pub strip_patterns: Vec<String>,
    pub bind: String,
    pub cors_origins: Vec<String>,
    pub graph: BuildConfig,
    pub chunking: ChunkParams,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            embedder: None,
            http_cache: None,
            taxonomy: None,
            speakers: None,
            strip_patterns: Vec::new(),
            bind: DEFAULT_BIND.to_string(),
            cors_origins: Vec::new(),
            graph: BuildConfig::default(),
            chunking: ChunkParams::default(),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::bad_input(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::bad_input(format!("config {}: {e}", path.display())))
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig { graph: self.graph.clone(), chunking: self.chunking }
    }

    /// Apply the environment layer.
    pub fn apply_env(&mut self) {
        if let Ok(bind) = std::env::var(ENV_BIND) {
            if !bind.trim().is_empty() {
                self.bind = bind;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_sections() {
        let c: Config = toml::from_str(
            r#"
embedder = "hash:128:7"
bind = "0.0.0.0:9000"

[graph]
top_k = 3
context_scope = "corpus"

[chunking]
theta = 0.4
"#,
        )
        .unwrap();
        assert_eq!(c.embedder.as_deref(), Some("hash:128:7"));
        assert_eq!(c.graph.top_k, 3);
        assert_eq!(c.graph.sim_min, 0.75);
        assert_eq!(c.chunking.theta, 0.4);
        assert_eq!(c.chunking.window, 3);
        assert!(toml::from_str::<Config>("nonsense = 1").is_err());
    }
}
