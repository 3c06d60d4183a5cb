//! Dense-embedding index: exact (exhaustive) nearest-neighbour search over
//! cosine distance, with deterministic lexicographic tie-breaking. No
//! approximate structures; at these corpus scales determinism is worth more
//! than speed.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Modality};
use crate::error::{Error, Result};
use crate::provider::ProviderClient;

const EMBED_BATCH: usize = 32;

/// A fixed-dimension embedding with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVector);
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Cosine distance `1 - a.b / (|a||b|)`, in `[0, 2]`.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.0.iter().zip(&b.0) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(1.0 - dot / (na.sqrt() * nb.sqrt()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    vector: EmbeddingVector,
    modality: Modality,
}

/// Immutable map from source id to its embedding and modality. Iteration is
/// in id order so every derived computation is reproducible.
#[derive(Debug, Clone)]
pub struct DenseIndex {
    entries: BTreeMap<String, IndexEntry>,
    dim: usize,
}

impl DenseIndex {
    pub fn from_vectors(vectors: Vec<(String, EmbeddingVector, Modality)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut dim = None;
        for (id, vector, modality) in vectors {
            match dim {
                None => dim = Some(vector.dim()),
                Some(d) if d != vector.dim() => {
                    return Err(Error::DimMismatch(d, vector.dim()));
                }
                _ => {}
            }
            if entries.insert(id.clone(), IndexEntry { vector, modality }).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        let dim = dim.ok_or(Error::EmptyCorpus)?;
        Ok(DenseIndex { entries, dim })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, id: &str) -> Option<&EmbeddingVector> {
        self.entries.get(id).map(|e| &e.vector)
    }

    pub fn modality(&self, id: &str) -> Option<Modality> {
        self.entries.get(id).map(|e| e.modality)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Up to `k` nearest ids by ascending cosine distance, ties broken by
    /// lexicographic id. The modality filter and exclusion set apply before
    /// ranking.
    pub fn knn(
        &self,
        query: &EmbeddingVector,
        k: usize,
        modality: Option<Modality>,
        exclude: Option<&HashSet<String>>,
    ) -> Result<Vec<(String, f64)>> {
        let mut scored = Vec::new();
        for (id, entry) in &self.entries {
            if let Some(m) = modality {
                if entry.modality != m {
                    continue;
                }
            }
            if let Some(ex) = exclude {
                if ex.contains(id) {
                    continue;
                }
            }
            scored.push((id.clone(), cosine_distance(query, &entry.vector)?));
        }
        scored.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .expect("finite distances")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(k);
        Ok(scored)
    }

    pub fn save(&self, path: &Path, corpus_hash: &str) -> Result<()> {
        let file = PersistedIndex {
            dim: self.dim,
            count: self.entries.len(),
            corpus_hash: corpus_hash.to_string(),
            entries: self
                .entries
                .iter()
                .map(|(id, e)| PersistedEntry {
                    id: id.clone(),
                    modality: e.modality,
                    vector: e.vector.values().to_vec(),
                })
                .collect(),
        };
        let json = serde_json::to_string(&file)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    /// Load a persisted index, returning it with the corpus hash it was
    /// built from so callers can detect staleness.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: PersistedIndex = serde_json::from_str(&raw)?;
        let index = DenseIndex::from_vectors(
            file.entries
                .into_iter()
                .map(|e| Ok((e.id, EmbeddingVector::new(e.vector)?, e.modality)))
                .collect::<Result<Vec<_>>>()?,
        )?;
        if index.len() != file.count || index.dim() != file.dim {
            return Err(Error::Integrity("persisted index header disagrees with records".into()));
        }
        Ok((index, file.corpus_hash))
    }
}

#[derive(Serialize, Deserialize)]
struct PersistedIndex {
    dim: usize,
    count: usize,
    corpus_hash: String,
    entries: Vec<PersistedEntry>,
}

#[derive(Serialize, Deserialize)]
struct PersistedEntry {
    id: String,
    modality: Modality,
    vector: Vec<f64>,
}

/// Embed every source in the corpus: passages and tables by their
/// (title-prefixed) text, images by their caption-plus-verbalisation search
/// text.
pub fn build_dense_index(client: &ProviderClient, corpus: &Corpus) -> Result<DenseIndex> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut vectors = Vec::with_capacity(corpus.len());
    let sources = corpus.sources();
    for chunk in sources.chunks(EMBED_BATCH) {
        let texts = chunk
            .iter()
            .map(|s| s.retrieval_text())
            .collect::<Result<Vec<_>>>()?;
        let embedded = client.embed(&texts).map_err(|e| match e {
            Error::Transport(msg) => {
                Error::Transport(format!("embedding batch starting at {}: {msg}", chunk[0].id))
            }
            other => other,
        })?;
        for (src, vector) in chunk.iter().zip(embedded) {
            vectors.push((src.id.clone(), vector, src.modality));
        }
    }
    DenseIndex::from_vectors(vectors)
}
