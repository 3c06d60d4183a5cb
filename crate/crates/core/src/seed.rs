//! Seed-source sampling.
//!
//! Each source gets a weight: the mean cosine distance to its k nearest
//! neighbours (itself excluded). Outliers far from everything get large
//! weights, and sampling follows the softmax
//! `p_i = exp(-beta * w_i) / sum_j exp(-beta * w_j)`, so they are drawn
//! rarely and seeds concentrate on well-connected sources.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::index::DenseIndex;

pub const DEFAULT_K_SEED: usize = 5;
pub const DEFAULT_BETA: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct SeedWeights {
    w: BTreeMap<String, f64>,
    k_seed: usize,
    beta: f64,
}

impl SeedWeights {
    /// Build weights directly; for tests and callers with precomputed values.
    pub fn from_weights(w: BTreeMap<String, f64>, k_seed: usize, beta: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InsufficientData("no seed weights".into()));
        }
        if w.values().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InsufficientData("weights must be finite and nonnegative".into()));
        }
        Ok(SeedWeights { w, k_seed, beta })
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.w
    }

    pub fn k_seed(&self) -> usize {
        self.k_seed
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Mean cosine distance from each source to its `k_seed` nearest neighbours,
/// excluding the source itself.
pub fn compute_seed_weights(index: &DenseIndex, k_seed: usize, beta: f64) -> Result<SeedWeights> {
    if index.len() < k_seed + 1 {
        return Err(Error::TooFewSources {
            needed: k_seed + 1,
            have: index.len(),
        });
    }
    let mut w = BTreeMap::new();
    for id in index.ids() {
        let query = index.vector(id).expect("indexed id");
        let myself: HashSet<String> = [id.to_string()].into();
        let neighbours = index.knn(query, k_seed, None, Some(&myself))?;
        let mean = neighbours.iter().map(|(_, d)| d).sum::<f64>() / k_seed as f64;
        w.insert(id.to_string(), mean);
    }
    SeedWeights::from_weights(w, k_seed, beta)
}

/// Draw one source id from the softmax distribution over weights. Uses a
/// numerically stable shift (the minimum of `beta * w` is subtracted before
/// exponentiation).
pub fn sample_seed<R: Rng + ?Sized>(weights: &SeedWeights, rng: &mut R) -> String {
    let beta = weights.beta;
    let min_bw = weights
        .w
        .values()
        .map(|w| beta * w)
        .fold(f64::INFINITY, f64::min);
    let exps: Vec<(&String, f64)> = weights
        .w
        .iter()
        .map(|(id, w)| (id, (-(beta * w - min_bw)).exp()))
        .collect();
    let total: f64 = exps.iter().map(|(_, e)| e).sum();
    let mut u = rng.gen::<f64>() * total;
    for (id, e) in &exps {
        u -= e;
        if u <= 0.0 {
            return (*id).clone();
        }
    }
    exps.last().expect("nonempty weights").0.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Modality;
    use crate::index::{cosine_distance, DenseIndex, EmbeddingVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn index_from(vs: Vec<Vec<f64>>) -> DenseIndex {
        DenseIndex::from_vectors(
            vs.into_iter()
                .enumerate()
                .map(|(i, v)| (format!("s{i:03}"), EmbeddingVector::new(v).unwrap(), Modality::Text))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_vectors_have_zero_weights() {
        let index = index_from(vec![vec![1.0, 1.0]; 4]);
        let weights = compute_seed_weights(&index, 2, 0.1).unwrap();
        assert!(weights.weights().values().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn orthogonal_outlier_has_largest_weight() {
        // tight cluster near (1, 0), one outlier at (0, 1)
        let index = index_from(vec![
            vec![1.0, 0.0],
            vec![0.99, 0.01],
            vec![0.98, 0.02],
            vec![0.0, 1.0],
        ]);
        let weights = compute_seed_weights(&index, 2, 0.1).unwrap();
        let outlier = weights.weights()["s003"];
        for (id, w) in weights.weights() {
            if id != "s003" {
                assert!(outlier > *w, "outlier {outlier} vs {id} {w}");
            }
        }
    }

    #[test]
    fn weights_match_brute_force_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let vs: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let index = index_from(vs.clone());
        let weights = compute_seed_weights(&index, 5, 0.1).unwrap();

        // oracle: all pairwise distances per source, sort, average smallest 5
        for (i, v) in vs.iter().enumerate() {
            let a = EmbeddingVector::new(v.clone()).unwrap();
            let mut dists: Vec<f64> = vs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, u)| cosine_distance(&a, &EmbeddingVector::new(u.clone()).unwrap()).unwrap())
                .collect();
            dists.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let expected = dists[..5].iter().sum::<f64>() / 5.0;
            let got = weights.weights()[&format!("s{i:03}")];
            assert!((got - expected).abs() < 1e-12, "s{i:03}: {got} vs {expected}");
        }
    }

    #[test]
    fn too_few_entries_is_an_error() {
        let index = index_from(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(
            compute_seed_weights(&index, 5, 0.1),
            Err(Error::TooFewSources { needed: 6, have: 2 })
        ));
    }

    fn frequencies(weights: &SeedWeights, draws: usize, seed: u64) -> BTreeMap<String, f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..draws {
            *counts.entry(sample_seed(weights, &mut rng)).or_insert(0) += 1;
        }
        counts
            .into_iter()
            .map(|(id, c)| (id, c as f64 / draws as f64))
            .collect()
    }

    #[test]
    fn beta_zero_is_uniform_within_two_percent() {
        let w: BTreeMap<String, f64> = [("a", 0.0), ("b", 3.0), ("c", 9.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let weights = SeedWeights::from_weights(w, 5, 0.0).unwrap();
        let freqs = frequencies(&weights, 100_000, 1);
        for f in freqs.values() {
            assert!((f - 1.0 / 3.0).abs() < 0.02, "{freqs:?}");
        }
    }

    #[test]
    fn softmax_matches_closed_form_within_one_percent() {
        // w = {0, 10}, beta = 0.1: P(first) = 1 / (1 + e^-1) = 0.731058...
        let w: BTreeMap<String, f64> = [("a".to_string(), 0.0), ("b".to_string(), 10.0)].into();
        let weights = SeedWeights::from_weights(w, 5, 0.1).unwrap();
        let freqs = frequencies(&weights, 100_000, 2);
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((freqs["a"] - expected).abs() < 0.01, "{freqs:?}");
        assert!((freqs["b"] - (1.0 - expected)).abs() < 0.01, "{freqs:?}");
    }

    #[test]
    fn identical_weights_sample_uniformly() {
        let w: BTreeMap<String, f64> = (0..4).map(|i| (format!("s{i}"), 2.5)).collect();
        let weights = SeedWeights::from_weights(w, 5, 0.7).unwrap();
        let freqs = frequencies(&weights, 100_000, 3);
        for f in freqs.values() {
            assert!((f - 0.25).abs() < 0.02, "{freqs:?}");
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let base: BTreeMap<String, f64> = [("a", 0.2), ("b", 1.7), ("c", 0.9)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let shifted: BTreeMap<String, f64> = base.iter().map(|(k, v)| (k.clone(), v + 100.0)).collect();
        let w1 = SeedWeights::from_weights(base, 5, 0.8).unwrap();
        let w2 = SeedWeights::from_weights(shifted, 5, 0.8).unwrap();
        let f1 = frequencies(&w1, 100_000, 4);
        let f2 = frequencies(&w2, 100_000, 4);
        for (id, f) in &f1 {
            assert!((f - f2[id]).abs() < 0.01, "{f1:?} vs {f2:?}");
        }
    }

    #[test]
    fn lower_weight_is_sampled_more_often() {
        let w: BTreeMap<String, f64> = [("low".to_string(), 1.0), ("high".to_string(), 4.0)].into();
        let weights = SeedWeights::from_weights(w, 5, 0.5).unwrap();
        let freqs = frequencies(&weights, 100_000, 5);
        assert!(freqs["low"] > freqs["high"], "{freqs:?}");
    }
}
