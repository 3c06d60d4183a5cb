//! Deterministic mock backend.
//!
//! Completions are scripted: a JSONL file of match rules, first match wins,
//! and a fixed refusal when nothing matches. Embeddings are pure functions
//! of the input text (hash-seeded unit vectors), so whole pipeline runs are
//! reproducible bit-for-bit without any model access.

use std::io::BufRead;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::index::EmbeddingVector;
use crate::provider::{Capabilities, CompletionRequest, ModelProvider};

/// One scripted rule: matches when the request tag equals `tag` (if set) and
/// every `contains` entry occurs in the rendered request text.
#[derive(Debug, Clone)]
pub struct MockRule {
    pub tag: Option<String>,
    pub contains: Vec<String>,
    pub response: String,
}

#[derive(Deserialize)]
struct RuleRecord {
    #[serde(rename = "match", default)]
    matcher: Matcher,
    response: String,
}

#[derive(Deserialize, Default)]
struct Matcher {
    #[serde(default)]
    tag: Option<String>,
    #[serde(default)]
    contains: Vec<String>,
}

pub struct MockProvider {
    rules: Vec<MockRule>,
    no_match_response: String,
    capabilities: Capabilities,
}

impl MockProvider {
    pub fn new(rules: Vec<MockRule>, no_match_response: impl Into<String>, capabilities: Capabilities) -> Self {
        MockProvider {
            rules,
            no_match_response: no_match_response.into(),
            capabilities,
        }
    }

    /// Load a script file: one JSON rule per line,
    /// `{"match": {"tag": ..., "contains": [...]}, "response": ...}`.
    pub fn from_script(path: &Path, no_match_response: impl Into<String>, capabilities: Capabilities) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rules = Vec::new();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let rec: RuleRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: i + 1,
                msg: e.to_string(),
            })?;
            rules.push(MockRule {
                tag: rec.matcher.tag,
                contains: rec.matcher.contains,
                response: rec.response,
            });
        }
        Ok(MockProvider::new(rules, no_match_response, capabilities))
    }

    fn haystack(req: &CompletionRequest) -> String {
        let mut out = String::new();
        for turn in &req.turns {
            out.push_str(&turn.text);
            out.push('\n');
            for a in &turn.attachments {
                out.push_str(a);
                out.push('\n');
            }
        }
        out
    }
}

impl ModelProvider for MockProvider {
    fn capabilities(&self) -> Capabilities {
        self.capabilities
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String> {
        let haystack = Self::haystack(req);
        for rule in &self.rules {
            if let Some(tag) = &rule.tag {
                if tag != &req.tag {
                    continue;
                }
            }
            if rule.contains.iter().all(|s| haystack.contains(s)) {
                return Ok(rule.response.clone());
            }
        }
        Ok(self.no_match_response.clone())
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let dim = self
            .capabilities
            .embedding_dim
            .ok_or_else(|| Error::Capability("embedding".into()))?;
        texts.iter().map(|t| hash_embedding(t, dim)).collect()
    }
}

/// A unit vector derived purely from the text's hash. Same text, same
/// vector, on every platform.
pub fn hash_embedding(text: &str, dim: usize) -> Result<EmbeddingVector> {
    let digest = Sha256::digest(text.as_bytes());
    let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let between = Uniform::new(-1.0f64, 1.0);
    let mut values: Vec<f64> = (0..dim).map(|_| between.sample(&mut rng)).collect();
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    } else {
        values[0] = 1.0;
    }
    EmbeddingVector::new(values)
}
