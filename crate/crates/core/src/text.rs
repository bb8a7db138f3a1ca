//! Composite text documents, tokenization, a TF-IDF baseline and cosine
//! similarity between text vectors.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cluster::{FeatureMatrix, Modality};
use crate::num::{ln, norm, normalize};
use crate::{Error, Result};

/// Bundled English stop-word list, one lowercase word per line.
pub const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");

pub const MIN_TOKEN_LEN: usize = 3;

pub fn parse_stopwords(list: &str) -> BTreeSet<String> {
    list.lines()
        .map(str::trim)
        .filter(|w| !w.is_empty() && !w.starts_with('#'))
        .map(|w| w.to_ascii_lowercase())
        .collect()
}

pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(STOPWORDS_EN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeDoc {
    pub video_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub video_id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextSource {
    ExternalEmbedding,
    Tfidf,
}

impl TextSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TextSource::ExternalEmbedding => "external_embedding",
            TextSource::Tfidf => "tfidf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextFeature {
    pub video_id: String,
    pub values: Vec<f64>,
    pub source: TextSource,
}

/// `title \n description \n transcript`, verbatim.
pub fn composite_doc(
    video_id: &str,
    title: &str,
    description: &str,
    transcript: &str,
) -> CompositeDoc {
    let mut text = String::with_capacity(title.len() + description.len() + transcript.len() + 2);
    text.push_str(title);
    text.push('\n');
    text.push_str(description);
    text.push('\n');
    text.push_str(transcript);
    CompositeDoc {
        video_id: video_id.into(),
        text,
    }
}

/// Splits on every character outside `A-Za-z`, lowercases, and drops short
/// tokens and stop-words. Token order is preserved.
pub fn tokenize(doc: &CompositeDoc, stopwords: &BTreeSet<String>) -> TokenizedDoc {
    TokenizedDoc {
        video_id: doc.video_id.clone(),
        tokens: tokenize_str(&doc.text, stopwords),
    }
}

pub fn tokenize_str(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphabetic())
        .filter(|t| t.len() >= MIN_TOKEN_LEN)
        .map(|t| t.to_ascii_lowercase())
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// Smoothed TF-IDF over a corpus.
///
/// `tf = count / len(doc)`, `idf = ln((1 + N) / (1 + df)) + 1`; rows are
/// L2-normalized and empty documents stay all-zero. The vocabulary is sorted,
/// which fixes the column order.
pub fn tfidf_matrix(docs: &[TokenizedDoc]) -> Result<(FeatureMatrix, Vec<String>)> {
    if docs.len() < 2 {
        return Err(Error::InvalidInput(alloc::format!(
            "tf-idf needs at least 2 documents, got {}",
            docs.len()
        )));
    }
    if docs.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::EmptyInput("every document is empty"));
    }
    let vocab: Vec<String> = docs
        .iter()
        .flat_map(|d| d.tokens.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let n_docs = docs.len();
    let v = vocab.len();
    let mut counts = vec![0usize; n_docs * v];
    let mut df = vec![0usize; v];
    for (d, doc) in docs.iter().enumerate() {
        for t in &doc.tokens {
            counts[d * v + index[t.as_str()]] += 1;
        }
        for w in 0..v {
            if counts[d * v + w] > 0 {
                df[w] += 1;
            }
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&f| ln((1 + n_docs) as f64 / (1 + f) as f64) + 1.0)
        .collect();

    let mut rows = vec![0.0; n_docs * v];
    for (d, doc) in docs.iter().enumerate() {
        let len = doc.tokens.len();
        if len == 0 {
            continue;
        }
        let row = &mut rows[d * v..(d + 1) * v];
        for w in 0..v {
            row[w] = counts[d * v + w] as f64 / len as f64 * idf[w];
        }
        normalize(row);
    }
    let ids = docs.iter().map(|d| d.video_id.clone()).collect();
    Ok((FeatureMatrix::new(ids, v, rows, Modality::Text)?, vocab))
}

/// Cosine similarity between every pair of rows. Rows must be non-zero.
pub fn cosine_similarity_matrix(features: &FeatureMatrix) -> Result<Vec<f64>> {
    let n = features.n_rows();
    let norms: Vec<f64> = (0..n).map(|i| norm(features.row(i))).collect();
    if let Some(i) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroNorm {
            id: features.ids()[i].clone(),
        });
    }
    let mut sim = vec![0.0; n * n];
    for i in 0..n {
        sim[i * n + i] = 1.0;
        for j in i + 1..n {
            let s = crate::num::dot(features.row(i), features.row(j)) / (norms[i] * norms[j]);
            let s = s.clamp(-1.0, 1.0);
            sim[i * n + j] = s;
            sim[j * n + i] = s;
        }
    }
    Ok(sim)
}
