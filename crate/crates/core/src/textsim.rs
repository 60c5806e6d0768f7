//! Per-user tweet documents, TF-IDF cosine similarity, and the standardized
//! log-similarity score.
//!
//! Every tweet a user authors in the window is aggregated into one document
//! (retweet texts are excluded). Similarities between a user and her
//! followers are log-normal-ish; `y_score` places a candidate follower
//! within that per-user distribution.

use std::collections::HashMap;

use thiserror::Error;

use crate::event::{Timestamp, UserId};
use crate::store::TemporalGraph;

#[derive(Debug, Error)]
pub enum TextsimError {
    #[error("need at least 2 non-empty documents, got {0}")]
    TooFewDocuments(usize),
    #[error("similarity stats undefined for user {user:?}: {usable} usable followers")]
    UndefinedStats { user: UserId, usable: usize },
    #[error("y-score undefined: similarity is zero")]
    ZeroSimilarity,
    #[error("y-score undefined: degenerate stats (sigma = 0)")]
    DegenerateStats,
}

/// Token ids are corpus-local, assigned in first-seen order.
pub struct Corpus {
    pub vocab: Vec<String>,
    token_ids: HashMap<String, u32>,
    /// Per user: sorted `(token, count)` pairs. Empty for users with no
    /// usable tweet text.
    docs: Vec<Vec<(u32, u32)>>,
}

impl Corpus {
    pub fn n_users(&self) -> usize {
        self.docs.len()
    }

    pub fn document(&self, u: UserId) -> &[(u32, u32)] {
        &self.docs[u.index()]
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_ids.get(token).copied()
    }
}

/// Sparse TF-IDF vector; `weights` sorted by token id, zero-weight entries
/// omitted. A zero norm flags an unusable (empty) document.
#[derive(Debug, Clone, Default)]
pub struct TfIdfVector {
    pub weights: Vec<(u32, f64)>,
    pub norm: f64,
}

impl TfIdfVector {
    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }
}

/// TF-IDF vectors for every user, indexed by `UserId`.
pub struct TfIdfTable {
    pub vectors: Vec<TfIdfVector>,
}

impl TfIdfTable {
    pub fn get(&self, u: UserId) -> &TfIdfVector {
        &self.vectors[u.index()]
    }

    pub fn similarity(&self, a: UserId, b: UserId) -> f64 {
        cosine(self.get(a), self.get(b))
    }
}

/// Log-moments of a user's follower similarities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityStats {
    pub user: UserId,
    /// Mean of `ln S(user, k)` over usable followers.
    pub mu: f64,
    /// Population standard deviation of the same.
    pub sigma: f64,
    /// Followers with a positive similarity.
    pub n_followers: usize,
    /// Followers excluded because their similarity was zero.
    pub n_zero_sim: usize,
}

impl SimilarityStats {
    /// All usable followers share one similarity value.
    pub fn is_degenerate(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Split on whitespace, strip surrounding punctuation while keeping `#`/`@`
/// prefixes, drop `http...` tokens, and lowercase everything except all-caps
/// words of up to five letters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let t = raw.trim_end_matches(|c: char| !c.is_alphanumeric());
            let t =
                t.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '#' && c != '@');
            if t.is_empty() {
                return None;
            }
            if t.len() >= 4 && t[..4].eq_ignore_ascii_case("http") {
                return None;
            }
            let all_caps = t.len() <= 5 && t.chars().all(|c| c.is_ascii_uppercase());
            if all_caps {
                Some(t.to_string())
            } else {
                Some(t.to_lowercase())
            }
        })
        .collect()
}

/// Aggregate every authored tweet into one document per user.
/// `include_retweet_texts` exists to measure how much that exclusion matters;
/// production paths pass `false`.
pub fn build_corpus(g: &TemporalGraph, include_retweet_texts: bool) -> Corpus {
    let mut vocab: Vec<String> = Vec::new();
    let mut token_ids: HashMap<String, u32> = HashMap::new();
    let mut docs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); g.n_users()];
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for u in g.users() {
        counts.clear();
        let mut add_text = |text: &str, counts: &mut HashMap<u32, u32>| {
            for tok in tokenize(text) {
                let id = match token_ids.get(&tok) {
                    Some(&id) => id,
                    None => {
                        let id = vocab.len() as u32;
                        vocab.push(tok.clone());
                        token_ids.insert(tok, id);
                        id
                    }
                };
                *counts.entry(id).or_insert(0) += 1;
            }
        };
        for ev in g.tweets_of(u) {
            if let Some(text) = &ev.text {
                add_text(text, &mut counts);
            }
        }
        if include_retweet_texts {
            for ev in g.events() {
                if ev.kind == crate::event::EventKind::Retweet && ev.actor == u {
                    if let Some(text) = &ev.text {
                        add_text(text, &mut counts);
                    }
                }
            }
        }
        let mut doc: Vec<(u32, u32)> = counts.iter().map(|(&t, &c)| (t, c)).collect();
        doc.sort_unstable();
        docs[u.index()] = doc;
    }
    Corpus {
        vocab,
        token_ids,
        docs,
    }
}

/// Build a corpus directly from `(user index, token list)` pairs; used by
/// tests and callers that already hold tokenized documents.
pub fn corpus_from_tokens(n_users: usize, docs: &[(usize, Vec<String>)]) -> Corpus {
    let mut vocab: Vec<String> = Vec::new();
    let mut token_ids: HashMap<String, u32> = HashMap::new();
    let mut out: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_users];
    for (user, tokens) in docs {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for tok in tokens {
            let id = match token_ids.get(tok) {
                Some(&id) => id,
                None => {
                    let id = vocab.len() as u32;
                    vocab.push(tok.clone());
                    token_ids.insert(tok.clone(), id);
                    id
                }
            };
            *counts.entry(id).or_insert(0) += 1;
        }
        let mut doc: Vec<(u32, u32)> = counts.into_iter().collect();
        doc.sort_unstable();
        out[*user] = doc;
    }
    Corpus {
        vocab,
        token_ids,
        docs: out,
    }
}

/// `weight(t, d) = count(t, d) * ln(N / df(t))` with `N` the number of
/// non-empty documents; tokens present in every document weigh zero.
pub fn tfidf(corpus: &Corpus) -> Result<TfIdfTable, TextsimError> {
    let n_docs = corpus.docs.iter().filter(|d| !d.is_empty()).count();
    if n_docs < 2 {
        return Err(TextsimError::TooFewDocuments(n_docs));
    }
    let mut df = vec![0u32; corpus.vocab.len()];
    for doc in &corpus.docs {
        for &(t, _) in doc {
            df[t as usize] += 1;
        }
    }
    let n = n_docs as f64;
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { (n / f64::from(d)).ln() })
        .collect();
    let vectors = corpus
        .docs
        .iter()
        .map(|doc| {
            let weights: Vec<(u32, f64)> = doc
                .iter()
                .filter_map(|&(t, c)| {
                    let w = f64::from(c) * idf[t as usize];
                    (w > 0.0).then_some((t, w))
                })
                .collect();
            let norm = weights.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
            TfIdfVector { weights, norm }
        })
        .collect();
    Ok(TfIdfTable { vectors })
}

/// Cosine similarity in `[0, 1]`; zero when either vector is zero.
pub fn cosine(a: &TfIdfVector, b: &TfIdfVector) -> f64 {
    if a.norm == 0.0 || b.norm == 0.0 {
        return 0.0;
    }
    let mut dot = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.weights.len() && j < b.weights.len() {
        let (ta, wa) = a.weights[i];
        let (tb, wb) = b.weights[j];
        match ta.cmp(&tb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += wa * wb;
                i += 1;
                j += 1;
            }
        }
    }
    (dot / (a.norm * b.norm)).clamp(0.0, 1.0)
}

/// Log-moments over an explicit list of similarities; zero similarities are
/// excluded and counted. Fewer than two usable values is undefined.
pub fn stats_from_similarities(
    user: UserId,
    sims: &[f64],
) -> Result<SimilarityStats, TextsimError> {
    let usable: Vec<f64> = sims.iter().copied().filter(|&s| s > 0.0).collect();
    let n_zero = sims.len() - usable.len();
    if usable.len() < 2 {
        return Err(TextsimError::UndefinedStats {
            user,
            usable: usable.len(),
        });
    }
    let logs: Vec<f64> = usable.iter().map(|s| s.ln()).collect();
    let mu = logs.iter().sum::<f64>() / logs.len() as f64;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / logs.len() as f64;
    Ok(SimilarityStats {
        user,
        mu,
        sigma: var.sqrt(),
        n_followers: usable.len(),
        n_zero_sim: n_zero,
    })
}

/// Log-moments of `ln S(i, k)` over the followers of `i` at `t`.
pub fn similarity_stats(
    g: &TemporalGraph,
    i: UserId,
    t: Timestamp,
    table: &TfIdfTable,
) -> Result<SimilarityStats, TextsimError> {
    let vi = table.get(i);
    let sims: Vec<f64> = g
        .followers_at(i, t)
        .into_iter()
        .map(|k| cosine(vi, table.get(k)))
        .collect();
    stats_from_similarities(i, &sims)
}

/// `Y = (ln S - mu) / sigma`.
pub fn y_score(similarity: f64, stats: &SimilarityStats) -> Result<f64, TextsimError> {
    if similarity <= 0.0 {
        return Err(TextsimError::ZeroSimilarity);
    }
    if stats.sigma <= 0.0 {
        return Err(TextsimError::DegenerateStats);
    }
    Ok((similarity.ln() - stats.mu) / stats.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn tokenize_strips_punctuation_and_urls() {
        assert_eq!(
            tokenize("Police arrest protestors! http://x.co"),
            ["police", "arrest", "protestors"]
        );
    }

    #[test]
    fn tokenize_keeps_hash_and_at_prefixes() {
        assert_eq!(
            tokenize("#OWS solidarity @OccupyLA"),
            ["#ows", "solidarity", "@occupyla"]
        );
    }

    #[test]
    fn tokenize_preserves_short_all_caps() {
        assert_eq!(tokenize("LAPD eviction"), ["LAPD", "eviction"]);
        assert_eq!(tokenize("POLICE"), ["police"]);
    }

    fn toy_corpus() -> Corpus {
        corpus_from_tokens(
            3,
            &[
                (0, vec!["a".into(), "b".into()]),
                (1, vec!["a".into(), "c".into()]),
                (2, vec!["a".into(), "b".into()]),
            ],
        )
    }

    #[test]
    fn universal_token_has_zero_weight() {
        let table = tfidf(&toy_corpus()).unwrap();
        let a_id = 0u32; // first seen token
        for v in &table.vectors {
            assert!(v.weights.iter().all(|&(t, _)| t != a_id));
        }
    }

    #[test]
    fn hand_computed_cosines() {
        let table = tfidf(&toy_corpus()).unwrap();
        // d1 and d3 both reduce to the "b" axis.
        assert!((table.similarity(UserId(0), UserId(2)) - 1.0).abs() < 1e-12);
        // d1 and d2 share only the zero-weight universal token.
        assert_eq!(table.similarity(UserId(0), UserId(1)), 0.0);
    }

    #[test]
    fn too_few_documents_is_an_error() {
        let c = corpus_from_tokens(2, &[(0, vec!["a".into()])]);
        assert!(matches!(tfidf(&c), Err(TextsimError::TooFewDocuments(1))));
    }

    #[test]
    fn cosine_identity_orthogonality() {
        let v = TfIdfVector {
            weights: vec![(0, 1.0), (3, 2.0)],
            norm: 5f64.sqrt(),
        };
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);
        let w = TfIdfVector {
            weights: vec![(1, 4.0)],
            norm: 4.0,
        };
        assert_eq!(cosine(&v, &w), 0.0);
        assert_eq!(cosine(&v, &TfIdfVector::default()), 0.0);
    }

    #[test]
    fn cosine_matches_dense_oracle() {
        let mut rng = StdRng::seed_from_u64(17);
        let dim = 40usize;
        for _ in 0..200 {
            let mut dense_a = vec![0.0; dim];
            let mut dense_b = vec![0.0; dim];
            let mut a = Vec::new();
            let mut b = Vec::new();
            for t in 0..dim {
                if rng.random_range(0.0..1.0) < 0.3 {
                    let w = rng.random_range(0.1..5.0);
                    dense_a[t] = w;
                    a.push((t as u32, w));
                }
                if rng.random_range(0.0..1.0) < 0.3 {
                    let w = rng.random_range(0.1..5.0);
                    dense_b[t] = w;
                    b.push((t as u32, w));
                }
            }
            let mk = |w: Vec<(u32, f64)>| {
                let norm = w.iter().map(|&(_, x)| x * x).sum::<f64>().sqrt();
                TfIdfVector { weights: w, norm }
            };
            let (va, vb) = (mk(a), mk(b));
            let dot: f64 = dense_a.iter().zip(&dense_b).map(|(x, y)| x * y).sum();
            let na = dense_a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = dense_b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let want = if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                dot / (na * nb)
            };
            assert!((cosine(&va, &vb) - want).abs() < 1e-12);
            assert!((cosine(&va, &vb) - cosine(&vb, &va)).abs() == 0.0);
        }
    }

    #[test]
    fn hand_moment_stats_and_y_score() {
        let sims = [(-3.0f64).exp(), (-2.0f64).exp(), (-1.0f64).exp()];
        let stats = stats_from_similarities(UserId(9), &sims).unwrap();
        assert!((stats.mu - -2.0).abs() < 1e-12);
        assert!((stats.sigma - 0.816_496_580_927_726).abs() < 1e-9);
        assert_eq!(stats.n_followers, 3);
        assert_eq!(stats.n_zero_sim, 0);

        let y = y_score((-1.0f64).exp(), &stats).unwrap();
        assert!((y - 1.224_744_871_391_589).abs() < 1e-9);
        // Center and unit step.
        assert!(y_score(stats.mu.exp(), &stats).unwrap().abs() < 1e-12);
        assert!((y_score((stats.mu + stats.sigma).exp(), &stats).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_undefined_stats() {
        let stats = stats_from_similarities(UserId(0), &[0.5, 0.5, 0.5]).unwrap();
        assert!(stats.is_degenerate());
        assert!(matches!(
            y_score(0.5, &stats),
            Err(TextsimError::DegenerateStats)
        ));
        assert!(matches!(
            stats_from_similarities(UserId(0), &[0.5, 0.0]),
            Err(TextsimError::UndefinedStats { usable: 1, .. })
        ));
        let with_zero = stats_from_similarities(UserId(0), &[0.5, 0.25, 0.0]).unwrap();
        assert_eq!(with_zero.n_zero_sim, 1);
        assert!(matches!(
            y_score(0.0, &with_zero),
            Err(TextsimError::ZeroSimilarity)
        ));
    }

    #[test]
    fn standardization_is_exact_by_construction() {
        let mut rng = StdRng::seed_from_u64(4);
        let sims: Vec<f64> = (0..50).map(|_| rng.random_range(0.01..0.9)).collect();
        let stats = stats_from_similarities(UserId(1), &sims).unwrap();
        let ys: Vec<f64> = sims.iter().map(|&s| y_score(s, &stats).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let std =
            (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();
        assert!(mean.abs() < 1e-9);
        assert!((std - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duplicating_documents_leaves_cosines_unchanged() {
        let mut rng = StdRng::seed_from_u64(31);
        let vocab: Vec<String> = (0..30).map(|i| format!("tok{i}")).collect();
        let rand_doc = |rng: &mut StdRng| -> Vec<String> {
            (0..20)
                .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
                .collect()
        };
        let d0 = rand_doc(&mut rng);
        let d1 = rand_doc(&mut rng);
        let d2 = rand_doc(&mut rng);
        let single = corpus_from_tokens(3, &[(0, d0.clone()), (1, d1.clone()), (2, d2.clone())]);
        let doubled: Vec<String> = d0.iter().chain(&d0).cloned().collect();
        let dup = corpus_from_tokens(3, &[(0, doubled), (1, d1), (2, d2)]);
        let ts = tfidf(&single).unwrap();
        let td = tfidf(&dup).unwrap();
        for other in [1u32, 2] {
            let a = ts.similarity(UserId(0), UserId(other));
            let b = td.similarity(UserId(0), UserId(other));
            assert!((a - b).abs() < 1e-12);
        }
    }
}
