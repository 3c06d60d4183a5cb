//! Transcript-replay backend: serves responses recorded in a previous run,
//! so any run can be reproduced offline.

use std::path::Path;

use crate::error::{Error, Result};
use crate::index::EmbeddingVector;
use crate::provider::transcript::{embed_hash, request_hash, Transcript};
use crate::provider::{Capabilities, CompletionRequest, ModelProvider};

pub struct ReplayProvider {
    transcript: Transcript,
    capabilities: Capabilities,
}

impl ReplayProvider {
    pub fn new(transcript: Transcript, capabilities: Capabilities) -> Self {
        ReplayProvider {
            transcript,
            capabilities,
        }
    }

    pub fn from_file(path: &Path, capabilities: Capabilities) -> Result<Self> {
        Ok(ReplayProvider::new(Transcript::load(path)?, capabilities))
    }
}

impl ModelProvider for ReplayProvider {
    fn capabilities(&self) -> Capabilities {
        self.capabilities
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String> {
        let hash = request_hash(req);
        self.transcript
            .completions
            .get(&hash)
            .cloned()
            .ok_or_else(|| Error::Transport(format!("request {hash} not in transcript (tag {})", req.tag)))
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        let hash = embed_hash(texts);
        let vectors = self
            .transcript
            .embeddings
            .get(&hash)
            .ok_or_else(|| Error::Transport(format!("embedding request {hash} not in transcript")))?;
        vectors.iter().cloned().map(EmbeddingVector::new).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{ChatTurn, MockProvider, ProviderClient};

    #[test]
    fn replays_recorded_exchanges_and_rejects_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let transcript_path = dir.path().join("transcript.jsonl");

        let caps = Capabilities {
            supports_images: false,
            embedding_dim: Some(4),
        };
        let recording = ProviderClient::new(Box::new(MockProvider::new(vec![], "scripted", caps)))
            .with_transcript(&transcript_path)
            .unwrap();
        let req = CompletionRequest::new("t", vec![ChatTurn::user("q")]).unwrap();
        let recorded = recording.complete(&req).unwrap();
        let texts = vec!["a".to_string()];
        let recorded_vecs = recording.embed(&texts).unwrap();

        let replay = ProviderClient::new(Box::new(
            ReplayProvider::from_file(&transcript_path, caps).unwrap(),
        ));
        assert_eq!(replay.complete(&req).unwrap().text, recorded.text);
        assert_eq!(replay.embed(&texts).unwrap(), recorded_vecs);

        let unseen = CompletionRequest::new("t", vec![ChatTurn::user("never seen")]).unwrap();
        assert!(matches!(replay.complete(&unseen), Err(Error::Transport(_))));
    }
}
