//! Provider configuration block shared by run configs:
//! `{backend: "mock"|"replay"|"http", endpoint?, api_key_env?, model_name?,
//! max_concurrency, max_attempts}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provider::client::{DEFAULT_MAX_ATTEMPTS, DEFAULT_MAX_CONCURRENCY};
use crate::provider::{Capabilities, HttpProvider, MockProvider, ProviderClient, ReplayProvider};

pub const API_KEY_ENV: &str = "SMMQG_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Replay,
    Http,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub backend: BackendKind,
    /// Mock script path (mock backend only).
    #[serde(default)]
    pub script: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible API (http backend only).
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub model_name: Option<String>,
    #[serde(default)]
    pub embedding_model: Option<String>,
    #[serde(default)]
    pub embedding_dim: Option<usize>,
    #[serde(default)]
    pub supports_images: Option<bool>,
    #[serde(default)]
    pub max_concurrency: Option<usize>,
    #[serde(default)]
    pub max_attempts: Option<u32>,
    /// Mock reply when no rule matches; defaults to the refusal "None".
    #[serde(default)]
    pub no_match_response: Option<String>,
}

impl ProviderConfig {
    pub fn mock(script: Option<PathBuf>, embedding_dim: usize) -> Self {
        ProviderConfig {
            backend: BackendKind::Mock,
            script,
            endpoint: None,
            api_key_env: None,
            model_name: None,
            embedding_model: None,
            embedding_dim: Some(embedding_dim),
            supports_images: Some(true),
            max_concurrency: None,
            max_attempts: None,
            no_match_response: None,
        }
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_images: self.supports_images.unwrap_or(true),
            embedding_dim: self.embedding_dim,
        }
    }

    /// Build the client. `base_dir` anchors relative paths; `replay_from`
    /// names the transcript a replay backend reads.
    pub fn build(&self, base_dir: &Path, replay_from: Option<&Path>) -> Result<ProviderClient> {
        let resolve = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                base_dir.join(p)
            }
        };
        let backend: Box<dyn crate::provider::ModelProvider> = match self.backend {
            BackendKind::Mock => {
                let no_match = self.no_match_response.clone().unwrap_or_else(|| "None".into());
                match &self.script {
                    Some(script) => Box::new(MockProvider::from_script(
                        &resolve(script),
                        no_match,
                        self.capabilities(),
                    )?),
                    None => Box::new(MockProvider::new(Vec::new(), no_match, self.capabilities())),
                }
            }
            BackendKind::Replay => {
                let path = replay_from
                    .ok_or_else(|| Error::Config("replay backend needs a transcript path".into()))?;
                Box::new(ReplayProvider::from_file(path, self.capabilities())?)
            }
            BackendKind::Http => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| Error::Config("http backend needs an endpoint".into()))?;
                let model_name = self
                    .model_name
                    .clone()
                    .ok_or_else(|| Error::Config("http backend needs a model_name".into()))?;
                let key_env = self.api_key_env.clone().unwrap_or_else(|| API_KEY_ENV.into());
                let api_key = std::env::var(&key_env).ok();
                Box::new(HttpProvider::new(
                    endpoint,
                    api_key,
                    model_name,
                    self.embedding_model.clone(),
                    self.embedding_dim,
                ))
            }
        };
        Ok(ProviderClient::new(backend)
            .with_max_attempts(self.max_attempts.unwrap_or(DEFAULT_MAX_ATTEMPTS))
            .with_max_concurrency(self.max_concurrency.unwrap_or(DEFAULT_MAX_CONCURRENCY)))
    }
}
