//! The client wrapper every caller goes through: capability checks, bounded
//! retries with exponential backoff, an in-flight request cap, and
//! transcript logging.

use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::index::EmbeddingVector;
use crate::provider::transcript::{embed_hash, request_hash, TranscriptRecord, TranscriptWriter};
use crate::provider::{Capabilities, CompletionRequest, ModelProvider};

pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;
pub const DEFAULT_BACKOFF_BASE: Duration = Duration::from_secs(1);
pub const DEFAULT_MAX_CONCURRENCY: usize = 4;

#[derive(Debug, Clone)]
pub struct Completion {
    pub text: String,
    pub request_hash: String,
}

struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
    }

    fn release(&self) {
        *self.permits.lock().unwrap() += 1;
        self.available.notify_one();
    }
}

pub struct ProviderClient {
    backend: Box<dyn ModelProvider>,
    max_attempts: u32,
    backoff_base: Duration,
    limiter: Semaphore,
    transcript: Option<Mutex<TranscriptWriter>>,
}

impl ProviderClient {
    pub fn new(backend: Box<dyn ModelProvider>) -> Self {
        ProviderClient {
            backend,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            backoff_base: DEFAULT_BACKOFF_BASE,
            limiter: Semaphore::new(DEFAULT_MAX_CONCURRENCY),
            transcript: None,
        }
    }

    pub fn with_max_attempts(mut self, max_attempts: u32) -> Self {
        self.max_attempts = max_attempts.max(1);
        self
    }

    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }

    pub fn with_max_concurrency(mut self, permits: usize) -> Self {
        self.limiter = Semaphore::new(permits);
        self
    }

    pub fn with_transcript(mut self, path: &Path) -> Result<Self> {
        self.transcript = Some(Mutex::new(TranscriptWriter::create(path)?));
        Ok(self)
    }

    pub fn capabilities(&self) -> Capabilities {
        self.backend.capabilities()
    }

    fn retrying<T>(&self, mut call: impl FnMut() -> Result<T>) -> Result<T> {
        let mut delay = self.backoff_base;
        let mut attempt = 1;
        loop {
            match call() {
                Err(e) if e.is_transient() && attempt < self.max_attempts => {
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<Completion> {
        if req.has_attachments() && !self.backend.capabilities().supports_images {
            return Err(Error::Capability("image attachments".into()));
        }
        self.limiter.acquire();
        let result = self.retrying(|| self.backend.complete(req));
        self.limiter.release();
        let text = result?;
        let hash = request_hash(req);
        if let Some(writer) = &self.transcript {
            writer.lock().unwrap().append(&TranscriptRecord::Complete {
                tag: req.tag.clone(),
                request_hash: hash.clone(),
                response: text.clone(),
            })?;
        }
        Ok(Completion {
            text,
            request_hash: hash,
        })
    }

    pub fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let dim = self
            .backend
            .capabilities()
            .embedding_dim
            .ok_or_else(|| Error::Capability("embedding".into()))?;
        if texts.is_empty() {
            return Err(Error::Config("embed called with no texts".into()));
        }
        self.limiter.acquire();
        let result = self.retrying(|| self.backend.embed(texts));
        self.limiter.release();
        let vectors = result?;
        if vectors.len() != texts.len() {
            return Err(Error::Integrity(format!(
                "asked for {} embeddings, got {}",
                texts.len(),
                vectors.len()
            )));
        }
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::Integrity(format!(
                    "backend declared dim {dim} but returned a vector of dim {}",
                    v.dim()
                )));
            }
        }
        if let Some(writer) = &self.transcript {
            writer.lock().unwrap().append(&TranscriptRecord::Embed {
                request_hash: embed_hash(texts),
                vectors: vectors.iter().map(|v| v.values().to_vec()).collect(),
            })?;
        }
        Ok(vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{ChatTurn, MockProvider, MockRule};
    use std::sync::atomic::{AtomicU32, Ordering};

    fn mock_client(rules: Vec<MockRule>) -> ProviderClient {
        let provider = MockProvider::new(
            rules,
            "None",
            Capabilities {
                supports_images: false,
                embedding_dim: Some(8),
            },
        );
        ProviderClient::new(Box::new(provider))
    }

    #[test]
    fn scripted_response_returned_verbatim() {
        let client = mock_client(vec![MockRule {
            tag: None,
            contains: vec!["hello".into()],
            response: "scripted".into(),
        }]);
        let req = CompletionRequest::new("t", vec![ChatTurn::user("hello world")]).unwrap();
        assert_eq!(client.complete(&req).unwrap().text, "scripted");
    }

    #[test]
    fn identical_requests_get_identical_responses() {
        let client = mock_client(vec![]);
        let req = CompletionRequest::new("t", vec![ChatTurn::user("q")]).unwrap();
        let a = client.complete(&req).unwrap();
        let b = client.complete(&req).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(a.request_hash, b.request_hash);
    }

    #[test]
    fn attachment_to_text_only_provider_is_capability_error() {
        let client = mock_client(vec![]);
        let req = CompletionRequest::new(
            "t",
            vec![ChatTurn::user_with_attachments("look", vec!["x.png".into()])],
        )
        .unwrap();
        assert!(matches!(client.complete(&req), Err(Error::Capability(_))));
    }

    #[test]
    fn embed_preserves_order_and_dim() {
        let client = mock_client(vec![]);
        let texts: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let vs = client.embed(&texts).unwrap();
        assert_eq!(vs.len(), 3);
        assert!(vs.iter().all(|v| v.dim() == 8));
        let again = client.embed(&texts).unwrap();
        assert_eq!(vs, again);
    }

    struct Flaky {
        failures_left: AtomicU32,
    }

    impl ModelProvider for Flaky {
        fn capabilities(&self) -> Capabilities {
            Capabilities {
                supports_images: false,
                embedding_dim: None,
            }
        }

        fn complete(&self, _req: &CompletionRequest) -> Result<String> {
            if self.failures_left.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_ok() {
                Err(Error::Transport("synthetic outage".into()))
            } else {
                Ok("recovered".into())
            }
        }

        fn embed(&self, _texts: &[String]) -> Result<Vec<EmbeddingVector>> {
            Err(Error::Capability("embedding".into()))
        }
    }

    #[test]
    fn transient_failures_are_retried_then_succeed() {
        let client = ProviderClient::new(Box::new(Flaky {
            failures_left: AtomicU32::new(2),
        }))
        .with_max_attempts(3)
        .with_backoff_base(Duration::ZERO);
        let req = CompletionRequest::new("t", vec![ChatTurn::user("x")]).unwrap();
        assert_eq!(client.complete(&req).unwrap().text, "recovered");
    }

    #[test]
    fn retries_exhaust_into_transport_error() {
        let client = ProviderClient::new(Box::new(Flaky {
            failures_left: AtomicU32::new(10),
        }))
        .with_max_attempts(3)
        .with_backoff_base(Duration::ZERO);
        let req = CompletionRequest::new("t", vec![ChatTurn::user("x")]).unwrap();
        assert!(matches!(client.complete(&req), Err(Error::Transport(_))));
    }
}
