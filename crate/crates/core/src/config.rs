//! Run configuration: backend selection, pipeline thresholds, seeds, paths.
//!
//! One declarative config drives every subcommand; flags override it and
//! secrets come only from environment variables. The resolved config (never
//! the secrets) is embedded into every output artifact for provenance.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gateway::{Gateway, GatewayConfig, HttpBackend, HttpEndpoint, MockPlaybook};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Cosine threshold for agglomerative clustering.
    pub cluster_threshold: f64,
    /// Candidate segments retrieved per rule before reranking.
    pub retrieve_k: usize,
    /// Evidence spans kept after reranking.
    pub rerank_k: usize,
    /// Debate round bound per issue.
    pub debate_rounds: u32,
    /// Default sampling temperature.
    pub temperature: f64,
    /// Maximum attempts per model call.
    pub retry_cap: u32,
    /// In-flight cap shared per backend.
    pub concurrency_cap: usize,
    /// Word-8-gram length for the leakage filter.
    pub leakage_ngram: usize,
    /// Dossier chunking: window and overlap in words.
    pub chunk_words: usize,
    pub chunk_overlap: usize,
    /// Backoff base in milliseconds for retried calls.
    pub backoff_base_ms: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            cluster_threshold: 0.75,
            retrieve_k: 20,
            rerank_k: 5,
            debate_rounds: 3,
            temperature: 0.1,
            retry_cap: 3,
            concurrency_cap: 8,
            leakage_ngram: 8,
            chunk_words: 400,
            chunk_overlap: 80,
            backoff_base_ms: 200,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.cluster_threshold && self.cluster_threshold < 1.0) {
            return Err(Error::Config(format!(
                "cluster_threshold {} outside (0, 1)",
                self.cluster_threshold
            )));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        for (name, v) in [
            ("retrieve_k", self.retrieve_k),
            ("rerank_k", self.rerank_k),
            ("concurrency_cap", self.concurrency_cap),
            ("leakage_ngram", self.leakage_ngram),
            ("chunk_words", self.chunk_words),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.retry_cap == 0 || self.debate_rounds == 0 {
            return Err(Error::Config("retry_cap and debate_rounds must be positive".into()));
        }
        if self.chunk_overlap >= self.chunk_words {
            return Err(Error::Config("chunk_overlap must be below chunk_words".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Seeds {
    pub committee_seed: u64,
    pub embedding_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BackendConfig {
    Mock { playbook: PathBuf },
    Live {
        chat: EndpointConfig,
        embedding: EndpointConfig,
        rerank: EndpointConfig,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PathsConfig {
    /// Directory of persona template files (defaults baked in when unset).
    pub persona_dir: Option<PathBuf>,
    /// Directory of dimension rubric files (defaults baked in when unset).
    pub rubric_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub backend: Option<BackendConfig>,
    pub thresholds: Thresholds,
    pub seeds: Seeds,
    pub paths: PathsConfig,
    /// Fold `not_applicable` verdicts into `compliant`, making the checker
    /// strictly binary.
    pub binary_strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: None,
            thresholds: Thresholds::default(),
            seeds: Seeds {
                committee_seed: 42,
                embedding_seed: 17,
            },
            paths: PathsConfig::default(),
            binary_strict: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let raw = crate::fsutil::read_to_string(path)?;
        let config: RunConfig =
            toml::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        if let Some(BackendConfig::Mock { playbook }) = &self.backend {
            if !playbook.exists() {
                return Err(Error::Config(format!(
                    "playbook not readable: {}",
                    playbook.display()
                )));
            }
        }
        for dir in [&self.paths.persona_dir, &self.paths.rubric_dir].into_iter().flatten() {
            if !dir.is_dir() {
                return Err(Error::Config(format!("not a directory: {}", dir.display())));
            }
        }
        Ok(())
    }

    /// Parse a `--backend` override: `mock:<playbook.json>` or `live`.
    pub fn apply_backend_flag(&mut self, flag: &str) -> Result<()> {
        if let Some(path) = flag.strip_prefix("mock:") {
            self.backend = Some(BackendConfig::Mock {
                playbook: PathBuf::from(path),
            });
            Ok(())
        } else if flag == "live" {
            match &self.backend {
                Some(BackendConfig::Live { .. }) => Ok(()),
                _ => Err(Error::Config(
                    "--backend live requires [backend] endpoints in the config file".into(),
                )),
            }
        } else {
            Err(Error::Config(format!(
                "unrecognized backend spec `{flag}` (expected `mock:<playbook.json>` or `live`)"
            )))
        }
    }

    /// Canonical JSON of the config. Secrets never enter here: live
    /// endpoints carry only the env-var *names*.
    pub fn canonical_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(&self.canonical_json()).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_digest(hasher)
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            config_hash: self.config_hash(),
            config: self.canonical_json(),
            graph_version: None,
            rule_base_hash: None,
        }
    }

    pub fn gateway_config(&self) -> GatewayConfig {
        GatewayConfig {
            temperature_default: self.thresholds.temperature,
            retry_cap: self.thresholds.retry_cap,
            backoff_base_ms: self.thresholds.backoff_base_ms,
            concurrency_cap: self.thresholds.concurrency_cap,
        }
    }

    /// Construct the gateway described by this config.
    pub fn build_gateway(&self) -> Result<Arc<Gateway>> {
        let backend = self
            .backend
            .as_ref()
            .ok_or_else(|| Error::Config("no backend configured (set [backend] or --backend)".into()))?;
        match backend {
            BackendConfig::Mock { playbook } => {
                let mut pb = MockPlaybook::from_file(playbook)?;
                if pb.embedding_seed.is_none() {
                    pb.embedding_seed = Some(self.seeds.embedding_seed);
                }
                Ok(Arc::new(Gateway::with_mock_config(pb, self.gateway_config())))
            }
            BackendConfig::Live { chat, embedding, rerank } => {
                let backend = HttpBackend::new(
                    endpoint(chat)?,
                    endpoint(embedding)?,
                    endpoint(rerank)?,
                )?;
                Ok(Arc::new(Gateway::new(Arc::new(backend), self.gateway_config())))
            }
        }
    }
}

fn endpoint(cfg: &EndpointConfig) -> Result<HttpEndpoint> {
    let api_key = match &cfg.api_key_env {
        Some(var) => Some(std::env::var(var).map_err(|_| {
            Error::Config(format!("environment variable {var} not set"))
        })?),
        None => None,
    };
    Ok(HttpEndpoint {
        base_url: cfg.base_url.clone(),
        model: cfg.model.clone(),
        api_key,
    })
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Hash of arbitrary bytes, used for rule-base files.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_digest(hasher)
}

/// Reproducibility block embedded in every emitted artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_version: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule_base_hash: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_defaults_are_in_range() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.thresholds.cluster_threshold, 0.75);
        assert_eq!(config.thresholds.retrieve_k, 20);
        assert_eq!(config.thresholds.rerank_k, 5);
        assert_eq!(config.thresholds.debate_rounds, 3);
        assert_eq!(config.thresholds.temperature, 0.1);
    }

    #[test]
    fn test_config_hash_stable_and_sensitive() {
        let a = RunConfig::default();
        let b = RunConfig::default();
        assert_eq!(a.config_hash(), b.config_hash());
        let mut c = RunConfig::default();
        c.thresholds.rerank_k = 7;
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn test_bad_threshold_rejected() {
        let mut config = RunConfig::default();
        config.thresholds.cluster_threshold = 1.5;
        assert!(config.validate().is_err());
    }

    #[test]
    fn test_backend_flag_parse() {
        let mut config = RunConfig::default();
        assert!(config.apply_backend_flag("mock:pb.json").is_ok());
        assert!(config.apply_backend_flag("weird").is_err());
        assert!(config.apply_backend_flag("live").is_err());
    }
}
