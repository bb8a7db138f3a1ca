//! LDA by collapsed Gibbs sampling, with topics ranked by UMass coherence.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::num::ln;
use crate::rng::SplitMix64;
use crate::text::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub n_topics: usize,
    /// Document-topic prior; `None` means `50 / n_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub top_words: usize,
    pub report_topics: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            n_topics: 10,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
            top_words: 10,
            report_topics: 3,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.n_topics as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidInput(m));
        if self.n_topics < 2 {
            return fail(format!(
                "n_topics must be at least 2, got {}",
                self.n_topics
            ));
        }
        if self.alpha().is_nan() || self.alpha() <= 0.0 || self.beta.is_nan() || self.beta <= 0.0 {
            return fail("alpha and beta must be positive".into());
        }
        if self.top_words < 2 {
            return fail(format!(
                "top_words must be at least 2, got {}",
                self.top_words
            ));
        }
        if self.report_topics > self.n_topics {
            return fail(format!(
                "report_topics {} exceeds n_topics {}",
                self.report_topics, self.n_topics
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedTopic {
    pub rank: usize,
    pub topic: usize,
    pub coherence: f64,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub n_topics: usize,
    pub vocabulary: Vec<String>,
    /// Documents that were fitted, in input order.
    pub doc_ids: Vec<String>,
    /// Documents skipped because they had no tokens.
    pub dropped: Vec<String>,
    /// `K x V`, row-major.
    pub phi: Vec<f64>,
    /// `D x K`, row-major.
    pub theta: Vec<f64>,
    pub coherence: Vec<f64>,
    pub top_topics: Vec<RankedTopic>,
}

impl TopicModel {
    pub fn phi_row(&self, k: usize) -> &[f64] {
        let v = self.vocabulary.len();
        &self.phi[k * v..(k + 1) * v]
    }

    pub fn theta_row(&self, d: usize) -> &[f64] {
        &self.theta[d * self.n_topics..(d + 1) * self.n_topics]
    }

    /// The `m` highest-probability words of topic `k`; ties resolve
    /// lexicographically.
    pub fn top_words(&self, k: usize, m: usize) -> Vec<String> {
        let row = self.phi_row(k);
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.into_iter()
            .take(m)
            .map(|w| self.vocabulary[w].clone())
            .collect()
    }
}

/// Document frequencies over a fixed corpus, for coherence scoring.
#[derive(Debug, Clone)]
pub struct DocFrequencies {
    docs: Vec<BTreeSet<String>>,
}

impl DocFrequencies {
    pub fn new(docs: &[TokenizedDoc]) -> Self {
        Self {
            docs: docs
                .iter()
                .map(|d| d.tokens.iter().cloned().collect())
                .collect(),
        }
    }

    pub fn df(&self, w: &str) -> usize {
        self.docs.iter().filter(|d| d.contains(w)).count()
    }

    pub fn co_df(&self, a: &str, b: &str) -> usize {
        self.docs
            .iter()
            .filter(|d| d.contains(a) && d.contains(b))
            .count()
    }

    /// `sum_{i>j} ln((D(w_i, w_j) + 1) / D(w_j))` over the ordered list.
    pub fn umass<S: AsRef<str>>(&self, words: &[S]) -> Result<f64> {
        let mut df = Vec::with_capacity(words.len());
        for w in words {
            let d = self.df(w.as_ref());
            if d == 0 {
                return Err(Error::InvalidInput(format!(
                    "word `{}` does not occur in the corpus",
                    w.as_ref()
                )));
            }
            df.push(d);
        }
        let mut total = 0.0;
        for i in 1..words.len() {
            for j in 0..i {
                let co = self.co_df(words[i].as_ref(), words[j].as_ref());
                total += ln((co + 1) as f64 / df[j] as f64);
            }
        }
        Ok(total)
    }
}

pub fn umass_coherence<S: AsRef<str>>(top_words: &[S], docs: &[TokenizedDoc]) -> Result<f64> {
    if top_words.len() < 2 {
        return Err(Error::InvalidInput(
            "coherence needs at least two words".into(),
        ));
    }
    DocFrequencies::new(docs).umass(top_words)
}

struct GibbsState {
    k: usize,
    v: usize,
    words: Vec<Vec<usize>>,
    z: Vec<Vec<usize>>,
    ndk: Vec<usize>,
    nkw: Vec<usize>,
    nk: Vec<usize>,
}

impl GibbsState {
    fn check_counts(&self) {
        for (d, doc) in self.words.iter().enumerate() {
            let s: usize = self.ndk[d * self.k..(d + 1) * self.k].iter().sum();
            debug_assert_eq!(s, doc.len(), "doc {d} topic counts drifted");
        }
        for t in 0..self.k {
            let s: usize = self.nkw[t * self.v..(t + 1) * self.v].iter().sum();
            debug_assert_eq!(s, self.nk[t], "topic {t} word counts drifted");
        }
    }
}

pub fn lda_fit(docs: &[TokenizedDoc], config: &LdaConfig) -> Result<TopicModel> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::EmptyInput("corpus"));
    }
    let (kept, dropped): (Vec<&TokenizedDoc>, Vec<&TokenizedDoc>) =
        docs.iter().partition(|d| !d.tokens.is_empty());
    if kept.is_empty() {
        return Err(Error::EmptyInput("every document has zero tokens"));
    }
    let vocabulary: Vec<String> = kept
        .iter()
        .flat_map(|d| d.tokens.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();

    let k = config.n_topics;
    let v = vocabulary.len();
    let n_docs = kept.len();
    let alpha = config.alpha();
    let beta = config.beta;
    let v_beta = v as f64 * beta;
    let mut rng = SplitMix64::new(config.seed);

    let words: Vec<Vec<usize>> = kept
        .iter()
        .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
        .collect();
    let mut st = GibbsState {
        k,
        v,
        z: Vec::with_capacity(n_docs),
        ndk: vec![0; n_docs * k],
        nkw: vec![0; k * v],
        nk: vec![0; k],
        words,
    };
    for d in 0..n_docs {
        let zs: Vec<usize> = st.words[d].iter().map(|_| rng.below(k)).collect();
        for (&w, &t) in st.words[d].iter().zip(&zs) {
            st.ndk[d * k + t] += 1;
            st.nkw[t * v + w] += 1;
            st.nk[t] += 1;
        }
        st.z.push(zs);
    }

    let mut p = vec![0.0; k];
    for _ in 0..config.iterations {
        for d in 0..n_docs {
            for i in 0..st.words[d].len() {
                let w = st.words[d][i];
                let old = st.z[d][i];
                st.ndk[d * k + old] -= 1;
                st.nkw[old * v + w] -= 1;
                st.nk[old] -= 1;
                for t in 0..k {
                    p[t] = (st.ndk[d * k + t] as f64 + alpha) * (st.nkw[t * v + w] as f64 + beta)
                        / (st.nk[t] as f64 + v_beta);
                }
                let new = rng.weighted_index(&p).expect("positive Gibbs weights");
                st.z[d][i] = new;
                st.ndk[d * k + new] += 1;
                st.nkw[new * v + w] += 1;
                st.nk[new] += 1;
            }
        }
        if cfg!(debug_assertions) {
            st.check_counts();
        }
    }

    let mut phi = vec![0.0; k * v];
    for t in 0..k {
        let denom = st.nk[t] as f64 + v_beta;
        for w in 0..v {
            phi[t * v + w] = (st.nkw[t * v + w] as f64 + beta) / denom;
        }
    }
    let mut theta = vec![0.0; n_docs * k];
    for d in 0..n_docs {
        let denom = st.words[d].len() as f64 + k as f64 * alpha;
        for t in 0..k {
            theta[d * k + t] = (st.ndk[d * k + t] as f64 + alpha) / denom;
        }
    }

    let mut model = TopicModel {
        n_topics: k,
        vocabulary,
        doc_ids: kept.iter().map(|d| d.video_id.clone()).collect(),
        dropped: dropped.iter().map(|d| d.video_id.clone()).collect(),
        phi,
        theta,
        coherence: Vec::new(),
        top_topics: Vec::new(),
    };
    let kept_docs: Vec<TokenizedDoc> = kept.into_iter().cloned().collect();
    let freqs = DocFrequencies::new(&kept_docs);
    model.coherence = (0..k)
        .map(|t| freqs.umass(&model.top_words(t, config.top_words)))
        .collect::<Result<_>>()?;
    model.top_topics = report_topics(&model, config);
    Ok(model)
}

/// Topics ranked by coherence (descending, ties by topic index), truncated to
/// `config.report_topics`.
pub fn report_topics(model: &TopicModel, config: &LdaConfig) -> Vec<RankedTopic> {
    let mut order: Vec<usize> = (0..model.n_topics).collect();
    order.sort_by(|&a, &b| {
        model.coherence[b]
            .total_cmp(&model.coherence[a])
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .take(config.report_topics)
        .enumerate()
        .map(|(rank, t)| RankedTopic {
            rank: rank + 1,
            topic: t,
            coherence: model.coherence[t],
            words: model.top_words(t, config.top_words),
        })
        .collect()
}

/// Fits one model per topic count and returns `(K, mean coherence)`.
/// `report_topics` is clamped to each `K`.
pub fn scan_topic_counts(
    docs: &[TokenizedDoc],
    config: &LdaConfig,
    counts: impl IntoIterator<Item = usize>,
) -> Result<Vec<(usize, f64)>> {
    counts
        .into_iter()
        .map(|k| {
            let cfg = LdaConfig {
                n_topics: k,
                report_topics: config.report_topics.min(k),
                ..config.clone()
            };
            let m = lda_fit(docs, &cfg)?;
            Ok((k, crate::num::mean(&m.coherence)))
        })
        .collect()
}
