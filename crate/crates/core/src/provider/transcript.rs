//! Run transcript: an append-only JSONL log of every provider exchange.
//!
//! The transcript doubles as a replay fixture: feeding it back through the
//! replay backend reproduces a run without any model access.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::provider::CompletionRequest;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TranscriptRecord {
    Complete {
        tag: String,
        request_hash: String,
        response: String,
    },
    Embed {
        request_hash: String,
        vectors: Vec<Vec<f64>>,
    },
}

/// Stable hash identifying a completion request by its full content.
pub fn request_hash(req: &CompletionRequest) -> String {
    #[derive(Serialize)]
    struct Canon<'a> {
        tag: &'a str,
        temperature: f64,
        max_tokens: u32,
        turns: Vec<(String, &'a str, &'a [String])>,
    }
    let canon = Canon {
        tag: &req.tag,
        temperature: req.temperature,
        max_tokens: req.max_tokens,
        turns: req
            .turns
            .iter()
            .map(|t| (t.role.to_string(), t.text.as_str(), t.attachments.as_slice()))
            .collect(),
    };
    let mut h = Sha256::new();
    h.update(serde_json::to_string(&canon).expect("request serializes").as_bytes());
    hex::encode(h.finalize())
}

/// Stable hash identifying an embedding request by its input texts.
pub fn embed_hash(texts: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(b"embed\n");
    h.update(serde_json::to_string(texts).expect("texts serialize").as_bytes());
    hex::encode(h.finalize())
}

pub struct TranscriptWriter {
    file: File,
}

impl TranscriptWriter {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(TranscriptWriter { file })
    }

    pub fn append(&mut self, record: &TranscriptRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.write_all(b"\n"))
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::Transport(format!("transcript write failed: {e}")))
    }
}

/// Parsed transcript, keyed by request hash for replay lookups.
#[derive(Debug, Default)]
pub struct Transcript {
    pub completions: HashMap<String, String>,
    pub embeddings: HashMap<String, Vec<Vec<f64>>>,
}

impl Transcript {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut out = Transcript::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TranscriptRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: i + 1,
                msg: e.to_string(),
            })?;
            match rec {
                TranscriptRecord::Complete { request_hash, response, .. } => {
                    out.completions.insert(request_hash, response);
                }
                TranscriptRecord::Embed { request_hash, vectors } => {
                    out.embeddings.insert(request_hash, vectors);
                }
            }
        }
        Ok(out)
    }
}
