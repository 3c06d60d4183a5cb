//! Model access: one interface for chat completion (optionally with image
//! attachments) and text embedding, plus the prompt catalog, a deterministic
//! mock backend for tests, a transcript-replay backend, and a thin HTTP
//! adapter for OpenAI-compatible endpoints.

mod catalog;
mod client;
pub mod config;
mod http;
mod mock;
mod replay;
mod template;
mod transcript;

pub use catalog::PromptCatalog;
pub use client::{Completion, ProviderClient};
pub use config::{BackendKind, ProviderConfig};
pub use http::HttpProvider;
pub use mock::{hash_embedding, MockProvider, MockRule};
pub use replay::ReplayProvider;
pub use template::PromptTemplate;
pub use transcript::{embed_hash, request_hash, Transcript, TranscriptRecord, TranscriptWriter};

use std::fmt;

use crate::error::{Error, Result};
use crate::index::EmbeddingVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        };
        f.write_str(s)
    }
}

/// One conversation turn. Attachments (opaque image locators) are only
/// allowed on user turns; use the constructors to stay within that.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatTurn {
    pub role: Role,
    pub text: String,
    pub attachments: Vec<String>,
}

impl ChatTurn {
    pub fn system(text: impl Into<String>) -> Self {
        ChatTurn {
            role: Role::System,
            text: text.into(),
            attachments: Vec::new(),
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        ChatTurn {
            role: Role::User,
            text: text.into(),
            attachments: Vec::new(),
        }
    }

    pub fn user_with_attachments(text: impl Into<String>, attachments: Vec<String>) -> Self {
        ChatTurn {
            role: Role::User,
            text: text.into(),
            attachments,
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        ChatTurn {
            role: Role::Assistant,
            text: text.into(),
            attachments: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub turns: Vec<ChatTurn>,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Pipeline-step label, recorded in the transcript.
    pub tag: String,
}

impl CompletionRequest {
    pub fn new(tag: impl Into<String>, turns: Vec<ChatTurn>) -> Result<Self> {
        if turns.is_empty() {
            return Err(Error::Config("completion request has no turns".into()));
        }
        for (i, turn) in turns.iter().enumerate() {
            if turn.role == Role::System && i != 0 {
                return Err(Error::Config("system turn must come first".into()));
            }
            if !turn.attachments.is_empty() && turn.role != Role::User {
                return Err(Error::Config("attachments are only allowed on user turns".into()));
            }
        }
        Ok(CompletionRequest {
            turns,
            temperature: 0.0,
            max_tokens: 1024,
            tag: tag.into(),
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    pub fn has_attachments(&self) -> bool {
        self.turns.iter().any(|t| !t.attachments.is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub supports_images: bool,
    /// Present iff the backend can embed; all vectors have this dimension.
    pub embedding_dim: Option<usize>,
}

/// A model backend. Implementations must be callable from concurrent
/// workers; retries, concurrency capping and transcript logging live in
/// [`ProviderClient`], not here.
pub trait ModelProvider: Send + Sync {
    fn capabilities(&self) -> Capabilities;

    fn complete(&self, req: &CompletionRequest) -> Result<String>;

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>>;
}
