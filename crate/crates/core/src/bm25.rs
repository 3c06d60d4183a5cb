//! Okapi BM25 over the corpus, built fresh from sources (no persistence).
//!
//! Documents are the same retrieval texts the dense index embeds; images are
//! indexed by their caption-plus-verbalisation search text. IDF uses the
//! non-negative variant `ln(1 + (N - df + 0.5) / (df + 0.5))`.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::{Corpus, Modality};
use crate::error::{Error, Result};
use crate::tokenize::tokenize;

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct Bm25Index {
    postings: HashMap<String, Vec<(String, u32)>>,
    doc_lengths: HashMap<String, usize>,
    modality_of: HashMap<String, Modality>,
    avg_doc_length: f64,
    doc_count: usize,
    k1: f64,
    b: f64,
}

/// Build with the standard parameters k1 = 1.2, b = 0.75.
pub fn build_bm25(corpus: &Corpus) -> Result<Bm25Index> {
    build_bm25_with_params(corpus, DEFAULT_K1, DEFAULT_B)
}

pub fn build_bm25_with_params(corpus: &Corpus, k1: f64, b: f64) -> Result<Bm25Index> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut postings: HashMap<String, Vec<(String, u32)>> = HashMap::new();
    let mut doc_lengths = HashMap::new();
    let mut modality_of = HashMap::new();
    let mut total_len = 0usize;

    let mut docs: Vec<(&str, Vec<String>, Modality)> = Vec::with_capacity(corpus.len());
    for src in corpus.sources() {
        docs.push((&src.id, tokenize(&src.retrieval_text()?), src.modality));
    }
    // postings are appended in id order so scoring is insertion-order free
    docs.sort_by(|a, b| a.0.cmp(b.0));

    for (id, tokens, modality) in docs {
        total_len += tokens.len();
        doc_lengths.insert(id.to_string(), tokens.len());
        modality_of.insert(id.to_string(), modality);
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for t in &tokens {
            *counts.entry(t).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            postings
                .entry(term.to_string())
                .or_default()
                .push((id.to_string(), tf));
        }
    }

    Ok(Bm25Index {
        postings,
        doc_lengths,
        modality_of,
        avg_doc_length: total_len as f64 / corpus.len() as f64,
        doc_count: corpus.len(),
        k1,
        b,
    })
}

impl Bm25Index {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    /// Top-k documents by descending score, ties broken by lexicographic id.
    /// Only documents matching at least one query term are returned.
    pub fn search(&self, query: &str, k: usize, modality: Option<Modality>) -> Result<Vec<(String, f64)>> {
        let terms = tokenize(query);
        if terms.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let n = self.doc_count as f64;
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for term in &terms {
            let Some(postings) = self.postings.get(term) else {
                continue;
            };
            let df = postings.len() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            for (id, tf) in postings {
                if let Some(m) = modality {
                    if self.modality_of[id] != m {
                        continue;
                    }
                }
                let dl = self.doc_lengths[id] as f64;
                let tf = *tf as f64;
                let norm = tf + self.k1 * (1.0 - self.b + self.b * dl / self.avg_doc_length);
                *scores.entry(id).or_insert(0.0) += idf * tf * (self.k1 + 1.0) / norm;
            }
        }
        let mut ranked: Vec<(String, f64)> = scores
            .into_iter()
            .map(|(id, s)| (id.to_string(), s))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite scores")
                .then_with(|| a.0.cmp(&b.0))
        });
        ranked.truncate(k);
        Ok(ranked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;

    fn doc(id: &str, text: &str) -> Source {
        Source::text(id, None, text)
    }

    #[test]
    fn sole_match_ranks_first() {
        let corpus = Corpus::from_sources(vec![doc("d1", "cat sat")]).unwrap();
        let index = build_bm25(&corpus).unwrap();
        let hits = index.search("cat", 5, None).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, "d1");
    }

    #[test]
    fn absent_term_gives_empty_result() {
        let corpus = Corpus::from_sources(vec![doc("d1", "cat sat")]).unwrap();
        let index = build_bm25(&corpus).unwrap();
        assert!(index.search("dog", 5, None).unwrap().is_empty());
    }

    #[test]
    fn empty_query_is_an_error() {
        let corpus = Corpus::from_sources(vec![doc("d1", "cat sat")]).unwrap();
        let index = build_bm25(&corpus).unwrap();
        assert!(matches!(index.search("?!", 5, None), Err(Error::EmptyQuery)));
    }

    fn five_doc_corpus() -> Vec<Source> {
        vec![
            doc("d1", "solar panels convert sunlight into electricity"),
            doc("d2", "wind turbines convert wind energy into electricity power"),
            doc("d3", "solar flares disrupt satellite communication systems badly"),
            doc("d4", "hydroelectric dams store potential energy in reservoirs"),
            doc("d5", "geothermal plants tap heat beneath the earth surface"),
        ]
    }

    #[test]
    fn scores_match_hand_computed_okapi_formula() {
        // expected values computed independently from the formula with
        // k1 = 1.2, b = 0.75, idf = ln(1 + (N - df + 0.5)/(df + 0.5))
        let corpus = Corpus::from_sources(five_doc_corpus()).unwrap();
        let index = build_bm25(&corpus).unwrap();
        let hits = index.search("solar electricity", 5, None).unwrap();
        let expected = [
            ("d1", 1.8790548509_f64),
            ("d3", 0.8855315964),
            ("d2", 0.8374048792),
        ];
        assert_eq!(hits.len(), expected.len());
        for ((id, score), (eid, escore)) in hits.iter().zip(expected) {
            assert_eq!(id, eid);
            assert!((score - escore).abs() < 1e-9, "{id}: {score} vs {escore}");
        }
    }

    #[test]
    fn ranking_is_invariant_under_insertion_order() {
        let mut docs = five_doc_corpus();
        let forward = build_bm25(&Corpus::from_sources(docs.clone()).unwrap()).unwrap();
        docs.reverse();
        let backward = build_bm25(&Corpus::from_sources(docs).unwrap()).unwrap();
        let a = forward.search("solar electricity energy", 5, None).unwrap();
        let b = backward.search("solar electricity energy", 5, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn modality_filter_restricts_results() {
        let corpus = Corpus::from_sources(vec![
            doc("d1", "solar power"),
            Source::table("t1", "solar", "solar\noutput\n5"),
        ])
        .unwrap();
        let index = build_bm25(&corpus).unwrap();
        let tables = index.search("solar", 5, Some(Modality::Table)).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].0, "t1");
    }
}
