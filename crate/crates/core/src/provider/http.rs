//! Thin adapter for OpenAI-compatible chat-completion and embedding
//! endpoints. Image attachments are read from disk and inlined as base64
//! data URLs. This is deliberately minimal: real model access is outside
//! the test surface, and everything downstream treats the backend as
//! opaque.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::index::EmbeddingVector;
use crate::provider::{Capabilities, CompletionRequest, ModelProvider, Role};

pub struct HttpProvider {
    endpoint: String,
    api_key: Option<String>,
    model_name: String,
    embedding_model: Option<String>,
    embedding_dim: Option<usize>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(
        endpoint: impl Into<String>,
        api_key: Option<String>,
        model_name: impl Into<String>,
        embedding_model: Option<String>,
        embedding_dim: Option<usize>,
    ) -> Self {
        HttpProvider {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            api_key,
            model_name: model_name.into(),
            embedding_model,
            embedding_dim,
            client: reqwest::blocking::Client::new(),
        }
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value> {
        let url = format!("{}{}", self.endpoint, path);
        let mut req = self.client.post(&url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| Error::Transport(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(Error::Transport(format!("{url}: HTTP {status}: {text}")));
        }
        resp.json()
            .map_err(|e| Error::Transport(format!("{url}: bad JSON: {e}")))
    }

    fn content_for(turn_text: &str, attachments: &[String]) -> Result<Value> {
        if attachments.is_empty() {
            return Ok(json!(turn_text));
        }
        let mut parts = vec![json!({"type": "text", "text": turn_text})];
        for path in attachments {
            let bytes = std::fs::read(path).map_err(|e| Error::io(std::path::Path::new(path), e))?;
            let url = format!("data:image/png;base64,{}", BASE64.encode(bytes));
            parts.push(json!({"type": "image_url", "image_url": {"url": url}}));
        }
        Ok(json!(parts))
    }
}

impl ModelProvider for HttpProvider {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_images: true,
            embedding_dim: self.embedding_dim,
        }
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String> {
        let mut messages = Vec::new();
        for turn in &req.turns {
            let role = match turn.role {
                Role::System => "system",
                Role::User => "user",
                Role::Assistant => "assistant",
            };
            messages.push(json!({
                "role": role,
                "content": Self::content_for(&turn.text, &turn.attachments)?,
            }));
        }
        let body = json!({
            "model": self.model_name,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let resp = self.post("/chat/completions", &body)?;
        resp["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Transport("response has no message content".into()))
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let model = self
            .embedding_model
            .as_deref()
            .ok_or_else(|| Error::Capability("embedding (no embedding_model configured)".into()))?;
        let body = json!({"model": model, "input": texts});
        let resp = self.post("/embeddings", &body)?;
        let data = resp["data"]
            .as_array()
            .ok_or_else(|| Error::Transport("embedding response has no data array".into()))?;
        data.iter()
            .map(|item| {
                let values: Vec<f64> = item["embedding"]
                    .as_array()
                    .ok_or_else(|| Error::Transport("embedding entry is not an array".into()))?
                    .iter()
                    .map(|v| v.as_f64().unwrap_or(f64::NAN))
                    .collect();
                EmbeddingVector::new(values)
            })
            .collect()
    }
}
