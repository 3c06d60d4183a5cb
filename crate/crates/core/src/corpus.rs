//! Multimodal source data model: ingestion, validation, preprocessing and
//! the text serializations used for retrieval.
//!
//! A corpus is a JSONL file with one source per line:
//!
//! ```text
//! {"id": "t1", "modality": "text", "title": "...", "text": "..."}
//! {"id": "i1", "modality": "image", "caption": "...", "verbalisation": "...", "image_ref": "img/i1.png"}
//! ```

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::provider::{ChatTurn, CompletionRequest, PromptCatalog, ProviderClient};

/// Default preprocessing threshold: text passages shorter than this many
/// characters are dropped at ingest.
pub const DEFAULT_MIN_TEXT_CHARS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Table,
    Image,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Text, Modality::Table, Modality::Image];

    /// Short label used in report columns ("Txt-Tab" style).
    pub fn short(&self) -> &'static str {
        match self {
            Modality::Text => "Txt",
            Modality::Table => "Tab",
            Modality::Image => "Im",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modality::Text => "text",
            Modality::Table => "table",
            Modality::Image => "image",
        };
        f.write_str(s)
    }
}

/// One retrievable unit: a text passage, a pipe-serialized table, or a
/// captioned image with its verbalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub id: String,
    pub modality: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalisation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

impl Source {
    pub fn text(id: impl Into<String>, title: Option<&str>, body: impl Into<String>) -> Self {
        Source {
            id: id.into(),
            modality: Modality::Text,
            title: title.map(str::to_string),
            text: body.into(),
            caption: None,
            verbalisation: None,
            image_ref: None,
        }
    }

    pub fn table(id: impl Into<String>, title: impl Into<String>, serialized: impl Into<String>) -> Self {
        Source {
            id: id.into(),
            modality: Modality::Table,
            title: Some(title.into()),
            text: serialized.into(),
            caption: None,
            verbalisation: None,
            image_ref: None,
        }
    }

    pub fn image(
        id: impl Into<String>,
        caption: impl Into<String>,
        verbalisation: Option<&str>,
        image_ref: impl Into<String>,
    ) -> Self {
        Source {
            id: id.into(),
            modality: Modality::Image,
            title: None,
            text: String::new(),
            caption: Some(caption.into()),
            verbalisation: verbalisation.map(str::to_string),
            image_ref: Some(image_ref.into()),
        }
    }

    /// The text that stands in for this source in every text-based index:
    /// title-prefixed body for passages, the serialized table as-is (it
    /// already starts with its title), caption plus verbalisation for images.
    pub fn retrieval_text(&self) -> Result<String> {
        match self.modality {
            Modality::Text => Ok(match &self.title {
                Some(t) => format!("{}: {}", t, self.text),
                None => self.text.clone(),
            }),
            Modality::Table => Ok(self.text.clone()),
            Modality::Image => image_search_text(self),
        }
    }

    /// Field-level invariant check; error text names the offending field.
    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty field `id`".into());
        }
        match self.modality {
            Modality::Image => {
                if self.caption.is_none() {
                    return Err(format!("image record {} missing field `caption`", self.id));
                }
                if self.image_ref.is_none() {
                    return Err(format!("image record {} missing field `image_ref`", self.id));
                }
            }
            Modality::Text | Modality::Table => {
                if self.caption.is_some() {
                    return Err(format!("{} record {} must not set `caption`", self.modality, self.id));
                }
                if self.image_ref.is_some() {
                    return Err(format!("{} record {} must not set `image_ref`", self.modality, self.id));
                }
                if self.verbalisation.is_some() {
                    return Err(format!("{} record {} must not set `verbalisation`", self.modality, self.id));
                }
                if self.modality == Modality::Table {
                    if self.text.is_empty() {
                        return Err(format!("table record {} has empty `text`", self.id));
                    }
                    if let Some(t) = &self.title {
                        if !self.text.starts_with(t.as_str()) {
                            return Err(format!("table record {} `text` does not start with its title", self.id));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModalityCounts {
    pub text: usize,
    pub table: usize,
    pub image: usize,
}

impl ModalityCounts {
    pub fn get(&self, m: Modality) -> usize {
        match m {
            Modality::Text => self.text,
            Modality::Table => self.table,
            Modality::Image => self.image,
        }
    }

    pub fn total(&self) -> usize {
        self.text + self.table + self.image
    }
}

/// An immutable, validated collection of sources with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    sources: Vec<Source>,
    by_id: HashMap<String, usize>,
    counts: ModalityCounts,
}

impl Corpus {
    /// Build a corpus from already-filtered sources, enforcing the per-source
    /// invariants and id uniqueness.
    pub fn from_sources(sources: Vec<Source>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(sources.len());
        let mut counts = ModalityCounts::default();
        for (i, src) in sources.iter().enumerate() {
            src.validate()
                .map_err(|msg| Error::MalformedRecord { line: i + 1, msg })?;
            if by_id.insert(src.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(src.id.clone()));
            }
            match src.modality {
                Modality::Text => counts.text += 1,
                Modality::Table => counts.table += 1,
                Modality::Image => counts.image += 1,
            }
        }
        Ok(Corpus { sources, by_id, counts })
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn get(&self, id: &str) -> Option<&Source> {
        self.by_id.get(id).map(|&i| &self.sources[i])
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn counts_by_modality(&self) -> ModalityCounts {
        self.counts
    }

    /// Content hash keying sidecar files (e.g. the persisted dense index) to
    /// this exact corpus.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for src in &self.sources {
            h.update(serde_json::to_string(src).expect("source serializes").as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Replace the verbalisation of an image source, returning a new corpus.
    pub fn with_verbalisation(&self, id: &str, verbalisation: String) -> Result<Corpus> {
        let mut sources = self.sources.clone();
        let idx = *self.by_id.get(id).ok_or_else(|| Error::UnknownSource(id.into()))?;
        if sources[idx].modality != Modality::Image {
            return Err(Error::WrongModality {
                id: id.into(),
                expected: Modality::Image,
                found: sources[idx].modality,
            });
        }
        sources[idx].verbalisation = Some(verbalisation);
        Corpus::from_sources(sources)
    }
}

/// Ingest a JSONL corpus file, dropping text passages shorter than
/// `min_text_chars` characters and rejecting malformed or duplicate records.
pub fn ingest_corpus(path: &Path, min_text_chars: usize) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut sources = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let src: Source = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: lineno,
            msg: e.to_string(),
        })?;
        src.validate()
            .map_err(|msg| Error::MalformedRecord { line: lineno, msg })?;
        if seen.insert(src.id.clone(), lineno).is_some() {
            return Err(Error::DuplicateId(src.id.clone()));
        }
        if src.modality == Modality::Text && src.text.chars().count() < min_text_chars {
            continue;
        }
        sources.push(src);
    }
    Corpus::from_sources(sources)
}

/// Serialize a table to the pipe-separated format: title, header row, data
/// rows. Pipes inside cells are replaced with "/" so the separator stays
/// unambiguous.
pub fn serialize_table(title: &str, header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let clean = |cell: &String| cell.replace('|', "/");
    let mut out = String::from(title);
    out.push('\n');
    out.push_str(&header.iter().map(clean).collect::<Vec<_>>().join(" | "));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i,
                expected: header.len(),
                found: row.len(),
            });
        }
        out.push('\n');
        out.push_str(&row.iter().map(clean).collect::<Vec<_>>().join(" | "));
    }
    Ok(out)
}

/// The text under which an image is retrieved: caption, then the
/// verbalisation when present.
pub fn image_search_text(src: &Source) -> Result<String> {
    if src.modality != Modality::Image {
        return Err(Error::WrongModality {
            id: src.id.clone(),
            expected: Modality::Image,
            found: src.modality,
        });
    }
    let caption = src.caption.as_deref().ok_or_else(|| Error::MalformedRecord {
        line: 0,
        msg: format!("image record {} missing field `caption`", src.id),
    })?;
    Ok(match src.verbalisation.as_deref() {
        Some(v) if !v.is_empty() => format!("{}: {}", caption, v),
        _ => caption.to_string(),
    })
}

/// Ask the provider to describe an image, returning the description verbatim
/// as the new verbalisation.
pub fn verbalize_image(client: &ProviderClient, catalog: &PromptCatalog, src: &Source) -> Result<String> {
    if src.modality != Modality::Image {
        return Err(Error::WrongModality {
            id: src.id.clone(),
            expected: Modality::Image,
            found: src.modality,
        });
    }
    let caption = src.caption.as_deref().unwrap_or_default();
    let prompt = catalog.get("verbalise")?.render(&[("caption", caption)])?;
    let image_ref = src
        .image_ref
        .clone()
        .ok_or_else(|| Error::Capability(format!("image {} has no image_ref", src.id)))?;
    let req = CompletionRequest::new(
        "verbalisation",
        vec![ChatTurn::user_with_attachments(prompt, vec![image_ref])],
    )?;
    let completion = client.complete(&req)?;
    let text = completion.text.trim().to_string();
    if text.is_empty() {
        return Err(Error::EmptyVerbalisation(src.id.clone()));
    }
    Ok(text)
}
