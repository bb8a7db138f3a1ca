//! Stage graph behind every CLI command.
//!
//! Each command asks for the products it needs; products are computed once
//! per run, and computing one writes its artifacts. Per-video failures are
//! recorded and the video is left out of that modality only. Every written
//! file is hashed into `summary.json`, which is written last.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use mediabar_core::barcode::{self, Barcode};
use mediabar_core::cluster::{self, ClusterModel, FeatureMatrix, KSelection, Modality};
use mediabar_core::dsp::{self, MfccExtractor, MfccMatrix};
use mediabar_core::repurpose::{self, FrameSequence, RepurposeReport, VideoSignatures};
use mediabar_core::text::{self, TextSource, TokenizedDoc};
use mediabar_core::topics::{self, LdaConfig, RankedTopic};
use mediabar_core::FrameImage;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Resolved;
use crate::error::{Error, Result};
use crate::formats::{self, canonical_json, real, reals};
use crate::ingest::{self, Manifest, VideoEntry};
use crate::ppm::encode_ppm;

pub const SWATCH_SIZE: usize = 32;
/// Topic counts fitted by the K scan.
pub const SCAN_TOPIC_COUNTS: std::ops::RangeInclusive<usize> = 2..=10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Barcode,
    Audio,
    Text,
    Cluster(Modality),
    Topics,
    Repurpose,
    Pipeline,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Barcode => "barcode".into(),
            Command::Audio => "audio".into(),
            Command::Text => "text".into(),
            Command::Cluster(m) => format!("cluster {}", m.as_str()),
            Command::Topics => "topics".into(),
            Command::Repurpose => "repurpose".into(),
            Command::Pipeline => "pipeline".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Completed without some videos or clusters.
    Partial,
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Partial => "partial",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoError {
    pub video: String,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub status: Status,
    pub included: Vec<String>,
    pub excluded: Vec<String>,
    pub notes: Vec<String>,
}

impl StageReport {
    fn new(included: Vec<String>, excluded: Vec<String>) -> Self {
        let status = if excluded.is_empty() {
            Status::Ok
        } else {
            Status::Partial
        };
        Self {
            status,
            included,
            excluded,
            notes: Vec::new(),
        }
    }

    fn failed(note: String) -> Self {
        Self {
            status: Status::Failed,
            included: Vec::new(),
            excluded: Vec::new(),
            notes: vec![note],
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Output-relative path (with `/` separators) to SHA-256 hex digest.
    pub files: BTreeMap<String, String>,
    pub errors: Vec<VideoError>,
    pub stages: BTreeMap<String, StageReport>,
}

impl Outcome {
    /// 0 when no video failed and every stage completed, else 1.
    pub fn exit_code(&self) -> i32 {
        let clean = self.errors.is_empty() && self.stages.values().all(|s| s.status == Status::Ok);
        if clean {
            0
        } else {
            1
        }
    }
}

struct AudioProducts {
    mfcc: BTreeMap<String, MfccMatrix>,
    sample_rates: BTreeMap<String, u32>,
    features: BTreeMap<String, Vec<f64>>,
}

struct TextProducts {
    source: TextSource,
    features: BTreeMap<String, Vec<f64>>,
    docs: BTreeMap<String, TokenizedDoc>,
}

struct Clustering {
    features: FeatureMatrix,
    selection: KSelection,
    model: ClusterModel,
}

/// Products are `None` until computed and `Some(None)` when their stage failed.
struct Run<'a> {
    cfg: &'a Resolved,
    manifest: Option<Manifest>,
    outcome: Outcome,
    barcodes: Option<Option<BTreeMap<String, Barcode>>>,
    audio: Option<Option<AudioProducts>>,
    text: Option<Option<TextProducts>>,
    clusters: BTreeMap<Modality, Option<Clustering>>,
    topics: Option<BTreeMap<usize, Vec<RankedTopic>>>,
}

/// Runs `command` and writes `summary.json`. Errors are reserved for problems
/// that stop the whole run (configuration, unreadable manifest, unwritable
/// output); everything else lands in the returned [`Outcome`].
pub fn run(cfg: &Resolved, command: Command) -> Result<Outcome> {
    let manifest = match &cfg.manifest {
        Some(p) => Some(ingest::load_manifest(p)?),
        None => None,
    };
    let needs_manifest = !matches!(command, Command::Cluster(_));
    if needs_manifest && manifest.is_none() {
        return Err(Error::Config(format!(
            "`{}` needs a manifest (--manifest)",
            command.name()
        )));
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;

    let mut run = Run {
        cfg,
        manifest,
        outcome: Outcome::default(),
        barcodes: None,
        audio: None,
        text: None,
        clusters: BTreeMap::new(),
        topics: None,
    };
    let m = cfg.modalities;
    match command {
        Command::Barcode => {
            run.barcodes()?;
        }
        Command::Audio => {
            run.audio()?;
        }
        Command::Text => {
            run.text()?;
        }
        Command::Cluster(modality) => {
            run.cluster(modality)?;
            if modality == Modality::Text && cfg.topics {
                run.topics()?;
            }
            run.write_profiles(modality)?;
        }
        Command::Topics => {
            run.topics()?;
        }
        Command::Repurpose => run.repurpose()?,
        Command::Pipeline => {
            for (on, modality) in [
                (m.barcode, Modality::Barcode),
                (m.audio, Modality::Audio),
                (m.text, Modality::Text),
            ] {
                if on {
                    run.cluster(modality)?;
                }
            }
            if m.text && cfg.topics {
                run.topics()?;
            }
            for (on, modality) in [
                (m.barcode, Modality::Barcode),
                (m.audio, Modality::Audio),
                (m.text, Modality::Text),
            ] {
                if on {
                    run.write_profiles(modality)?;
                }
            }
            if cfg.repurpose {
                run.repurpose()?;
            }
        }
    }
    run.write_summary(command)?;
    Ok(run.outcome)
}

/// Tokens and optional embedding of one video.
type TextInput = (TokenizedDoc, Option<Vec<f64>>);
/// Fitted config, dropped words, ranked topics and optional K scan of one cluster.
type ClusterTopics = (
    LdaConfig,
    Vec<String>,
    Vec<RankedTopic>,
    Option<Vec<(usize, f64)>>,
);

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn ids_of<T>(m: &BTreeMap<String, T>) -> Vec<String> {
    m.keys().cloned().collect()
}

/// Splits per-video results into successes and `(id, message)` failures,
/// both ordered by id.
fn partition<T>(results: Vec<(String, Result<T>)>) -> (BTreeMap<String, T>, Vec<(String, String)>) {
    let mut ok = BTreeMap::new();
    let mut failed = Vec::new();
    for (id, r) in results {
        match r {
            Ok(v) => {
                ok.insert(id, v);
            }
            Err(e) => failed.push((id, e.to_string())),
        }
    }
    failed.sort();
    (ok, failed)
}

fn load_barcode(entry: &VideoEntry, stride: usize) -> Result<Barcode> {
    let frames = ingest::read_frames(&entry.frames)?;
    let kept: Vec<FrameImage> = frames.into_iter().step_by(stride).collect();
    Ok(barcode::build_barcode(&kept, &entry.id)?)
}

impl Run<'_> {
    fn entries(&self) -> Vec<VideoEntry> {
        self.manifest
            .as_ref()
            .map(|m| m.videos.clone())
            .unwrap_or_default()
    }

    fn emit(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = rel
            .split('/')
            .fold(self.cfg.out.clone(), |p, part| p.join(part));
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outcome
            .files
            .insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn emit_json(&mut self, rel: &str, v: &Value) -> Result<()> {
        self.emit(rel, canonical_json(v).as_bytes())
    }

    fn record_failures(&mut self, stage: &str, failed: &[(String, String)]) {
        for (id, e) in failed {
            self.outcome.errors.push(VideoError {
                video: id.clone(),
                stage: stage.into(),
                error: e.clone(),
            });
        }
    }

    fn stage(&mut self, name: &str, report: StageReport) {
        self.outcome.stages.insert(name.into(), report);
    }

    fn barcodes(&mut self) -> Result<Option<&BTreeMap<String, Barcode>>> {
        if self.barcodes.is_none() {
            let stride = self.cfg.barcode.stride;
            let results: Vec<(String, Result<Barcode>)> = self
                .entries()
                .par_iter()
                .map(|e| (e.id.clone(), load_barcode(e, stride)))
                .collect();
            let (ok, failed) = partition(results);
            self.record_failures("barcode", &failed);
            let height = self.cfg.barcode.render_height;
            let len = self.cfg.barcode.feature_len;
            let mut rows = Vec::new();
            for (id, b) in &ok {
                let img = barcode::render_barcode(b, height)?;
                self.emit(&format!("barcode/{id}.barcode.ppm"), &encode_ppm(&img))?;
                rows.push((id.clone(), barcode::barcode_feature(b, len)?.values));
            }
            let csv = formats::feature_csv(
                "f",
                3 * len,
                rows.iter().map(|(id, v)| (id.as_str(), v.as_slice())),
            );
            self.emit("barcode/features.csv", &csv)?;
            let report = StageReport::new(ids_of(&ok), failed.into_iter().map(|f| f.0).collect());
            self.stage("barcode", report);
            self.barcodes = Some(Some(ok));
        }
        Ok(self.barcodes.as_ref().and_then(|b| b.as_ref()))
    }

    fn audio(&mut self) -> Result<Option<&AudioProducts>> {
        if self.audio.is_none() {
            let cfg = self.cfg;
            type PerVideo = (MfccMatrix, u32, Vec<f64>, Vec<(f64, f64)>);
            let results: Vec<(String, Result<PerVideo>)> = self
                .entries()
                .par_iter()
                .map_init(
                    || MfccExtractor::new(cfg.mfcc.clone()).expect("config validated on resolve"),
                    |ex, e| {
                        let r = (|| {
                            let clip = ingest::read_wav(&e.audio.path)?;
                            let m = ex.extract(&clip, &e.id)?;
                            let f = dsp::summarize_mfcc(&m)?;
                            let env = dsp::waveform_envelope(&clip, cfg.envelope_bins)?;
                            Ok((m, clip.sample_rate(), f.values, env))
                        })();
                        (e.id.clone(), r)
                    },
                )
                .collect();
            let (ok, failed) = partition(results);
            self.record_failures("audio", &failed);
            let mut products = AudioProducts {
                mfcc: BTreeMap::new(),
                sample_rates: BTreeMap::new(),
                features: BTreeMap::new(),
            };
            for (id, (m, rate, f, env)) in ok {
                self.emit(
                    &format!("audio/{id}.envelope.csv"),
                    &formats::envelope_csv(&env),
                )?;
                products.mfcc.insert(id.clone(), m);
                products.sample_rates.insert(id.clone(), rate);
                products.features.insert(id, f);
            }
            let csv = formats::feature_csv(
                "a",
                2 * cfg.mfcc.n_mfcc,
                products
                    .features
                    .iter()
                    .map(|(id, v)| (id.as_str(), v.as_slice())),
            );
            self.emit("audio/features.csv", &csv)?;
            let report = StageReport::new(
                ids_of(&products.features),
                failed.into_iter().map(|f| f.0).collect(),
            );
            self.stage("audio", report);
            self.audio = Some(Some(products));
        }
        Ok(self.audio.as_ref().and_then(|a| a.as_ref()))
    }

    fn stopwords(&self) -> Result<BTreeSet<String>> {
        match &self.cfg.stopwords {
            None => Ok(text::default_stopwords()),
            Some(p) => {
                let list = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Ok(text::parse_stopwords(&list))
            }
        }
    }

    fn text(&mut self) -> Result<Option<&TextProducts>> {
        if self.text.is_none() {
            let stopwords = self.stopwords()?;
            let results: Vec<(String, Result<TextInput>)> = self
                .entries()
                .par_iter()
                .map(|e| {
                    let r = ingest::read_text_sidecars(e).map(|(transcript, emb)| {
                        let doc = text::composite_doc(&e.id, &e.title, &e.description, &transcript);
                        (text::tokenize(&doc, &stopwords), emb)
                    });
                    (e.id.clone(), r)
                })
                .collect();
            let (ok, mut failed) = partition(results);
            let products = self.text_features(ok, &mut failed);
            failed.sort();
            self.record_failures("text", &failed);
            let excluded: Vec<String> = failed.into_iter().map(|f| f.0).collect();
            match products {
                Ok((p, vocab)) => {
                    let dim = p.features.values().next().map_or(0, Vec::len);
                    let csv = formats::feature_csv(
                        "t",
                        dim,
                        p.features.iter().map(|(id, v)| (id.as_str(), v.as_slice())),
                    );
                    self.emit("text/features.csv", &csv)?;
                    if let Some(vocab) = vocab {
                        self.emit("text/vocabulary.txt", &formats::vocabulary_txt(&vocab))?;
                    }
                    let fm = FeatureMatrix::from_rows(
                        p.features.iter().map(|(id, v)| (id.clone(), v)),
                        Modality::Text,
                    )?;
                    let sim = text::cosine_similarity_matrix(&fm)?;
                    self.emit(
                        "text/similarity.csv",
                        &formats::similarity_csv(fm.ids(), &sim),
                    )?;
                    let mut report = StageReport::new(ids_of(&p.features), excluded);
                    report.notes.push(format!("source: {}", p.source.as_str()));
                    self.stage("text", report);
                    self.text = Some(Some(p));
                }
                Err(note) => {
                    self.stage("text", StageReport::failed(note));
                    self.text = Some(None);
                }
            }
        }
        Ok(self.text.as_ref().and_then(|t| t.as_ref()))
    }

    /// Corpus-level text features. Videos whose vector is all zeros are moved
    /// to `failed`; a corpus-level problem fails the whole stage.
    #[allow(clippy::type_complexity)]
    fn text_features(
        &self,
        ok: BTreeMap<String, (TokenizedDoc, Option<Vec<f64>>)>,
        failed: &mut Vec<(String, String)>,
    ) -> Result<(TextProducts, Option<Vec<String>>), String> {
        let with_embedding = ok.values().filter(|(_, e)| e.is_some()).count();
        if with_embedding != 0 && with_embedding != ok.len() {
            return Err(format!(
                "{with_embedding} of {} videos have an embedding sidecar; a corpus must use one text source",
                ok.len()
            ));
        }
        let mut docs = BTreeMap::new();
        let mut features = BTreeMap::new();
        let (source, vocab) = if with_embedding > 0 {
            let embs: Vec<(&str, &[f64])> = ok
                .iter()
                .map(|(id, (_, e))| (id.as_str(), e.as_deref().unwrap_or_default()))
                .collect();
            ingest::check_embedding_lengths(embs).map_err(|e| e.to_string())?;
            for (id, (doc, emb)) in ok {
                let mut v = emb.expect("all videos have embeddings");
                if mediabar_core::num::normalize(&mut v) == 0.0 {
                    failed.push((id, "embedding has zero norm".into()));
                    continue;
                }
                features.insert(id.clone(), v);
                docs.insert(id, doc);
            }
            (TextSource::ExternalEmbedding, None)
        } else {
            let mut usable = Vec::new();
            for (id, (doc, _)) in ok {
                if doc.tokens.is_empty() {
                    failed.push((id, "document has no tokens after filtering".into()));
                } else {
                    usable.push(doc);
                }
            }
            if usable.len() < 2 {
                return Err(format!(
                    "TF-IDF needs at least 2 non-empty documents, got {}",
                    usable.len()
                ));
            }
            let (fm, vocab) = text::tfidf_matrix(&usable).map_err(|e| e.to_string())?;
            for (i, doc) in usable.into_iter().enumerate() {
                features.insert(doc.video_id.clone(), fm.row(i).to_vec());
                docs.insert(doc.video_id.clone(), doc);
            }
            (TextSource::Tfidf, Some(vocab))
        };
        if features.len() < 2 {
            return Err(format!(
                "{} usable text vectors; at least 2 are needed",
                features.len()
            ));
        }
        Ok((
            TextProducts {
                source,
                features,
                docs,
            },
            vocab,
        ))
    }

    /// The modality's feature matrix from this run, or read back from a
    /// previous run's CSV when there is no manifest.
    fn feature_matrix(&mut self, modality: Modality) -> Result<Option<FeatureMatrix>> {
        if self.manifest.is_none() {
            let dir = modality.as_str();
            let path = self.cfg.out.join(dir).join("features.csv");
            if !path.exists() {
                return Err(Error::Config(format!(
                    "no {dir} features at {} and no manifest to compute them",
                    path.display()
                )));
            }
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let (ids, dim, data) =
                formats::parse_feature_csv(&bytes).map_err(|r| Error::format(&path, r))?;
            let fm = FeatureMatrix::new(ids, dim, data, modality)?;
            return Ok(Some(self.text_representation(fm)?));
        }
        let rows: Option<Vec<(String, Vec<f64>)>> = match modality {
            Modality::Barcode => {
                let len = self.cfg.barcode.feature_len;
                match self.barcodes()? {
                    None => None,
                    Some(b) => Some(
                        b.iter()
                            .map(|(id, bc)| {
                                Ok((id.clone(), barcode::barcode_feature(bc, len)?.values))
                            })
                            .collect::<Result<_>>()?,
                    ),
                }
            }
            Modality::Audio => self.audio()?.map(|a| {
                a.features
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect()
            }),
            Modality::Text => self.text()?.map(|t| {
                t.features
                    .iter()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect()
            }),
        };
        match rows {
            None => Ok(None),
            Some(rows) if rows.len() < 2 => Ok(None),
            Some(rows) => {
                let fm = FeatureMatrix::from_rows(rows, modality)?;
                Ok(Some(self.text_representation(fm)?))
            }
        }
    }

    /// Swaps text feature rows for similarity rows when so configured.
    fn text_representation(&self, fm: FeatureMatrix) -> Result<FeatureMatrix> {
        if fm.modality() != Modality::Text || !self.cfg.similarity_rows {
            return Ok(fm);
        }
        let sim = text::cosine_similarity_matrix(&fm)?;
        Ok(FeatureMatrix::new(
            fm.ids().to_vec(),
            fm.n_rows(),
            sim,
            Modality::Text,
        )?)
    }

    fn cluster(&mut self, modality: Modality) -> Result<Option<&Clustering>> {
        if !self.clusters.contains_key(&modality) {
            let stage = format!("cluster.{}", modality.as_str());
            let fm = self.feature_matrix(modality)?;
            let outcome = match fm {
                None => Err(format!(
                    "fewer than 2 {} feature vectors available",
                    modality.as_str()
                )),
                Some(fm) => self.fit_clusters(fm),
            };
            let result = match outcome {
                Ok(c) => {
                    self.emit_json(
                        &format!("cluster/{}.json", modality.as_str()),
                        &self.cluster_json(&c),
                    )?;
                    let mut report = StageReport::new(c.features.ids().to_vec(), Vec::new());
                    report.notes.push(c.selection.rule.clone());
                    self.stage(&stage, report);
                    Some(c)
                }
                Err(note) => {
                    self.stage(&stage, StageReport::failed(note));
                    None
                }
            };
            self.clusters.insert(modality, result);
        }
        Ok(self.clusters[&modality].as_ref())
    }

    fn fit_clusters(&self, features: FeatureMatrix) -> Result<Clustering, String> {
        let n = features.n_rows();
        let mut opts = self.cfg.choose_k;
        if n < opts.k_min {
            return Err(format!(
                "{n} videos is fewer than the minimum k of {}",
                opts.k_min
            ));
        }
        // k = n makes every cluster a singleton; stop one short when possible.
        opts.k_max = opts.k_max.min(if n > opts.k_min { n - 1 } else { n });
        let (selection, model) =
            cluster::choose_k(&features, self.cfg.seed, opts).map_err(|e| e.to_string())?;
        Ok(Clustering {
            features,
            selection,
            model,
        })
    }

    fn cluster_json(&self, c: &Clustering) -> Value {
        let ids = c.features.ids();
        let assignments: Map<String, Value> = ids
            .iter()
            .zip(&c.model.assignments)
            .map(|(id, &a)| (id.clone(), json!(a)))
            .collect();
        let centers: Vec<Value> = (0..c.model.k).map(|k| reals(c.model.center(k))).collect();
        let mut v = json!({
            "modality": c.features.modality().as_str(),
            "seed": self.cfg.seed,
            "candidates": c.selection.candidates.iter().map(|k| json!({
                "k": k.k,
                "wcss": real(k.wcss),
                "silhouette": real(k.silhouette),
            })).collect::<Vec<_>>(),
            "chosen_k": c.selection.chosen_k,
            "elbow_k": c.selection.elbow_k,
            "assignments": assignments,
            "centers": centers,
            "rule": c.selection.rule,
        });
        if c.features.modality() == Modality::Text {
            let rows = if self.cfg.similarity_rows {
                "similarity_rows"
            } else {
                "feature_rows"
            };
            v["representation"] = json!(rows);
        }
        v
    }

    fn topics(&mut self) -> Result<()> {
        if self.topics.is_some() {
            return Ok(());
        }
        self.text()?;
        let members: Option<Vec<Vec<String>>> = self.cluster(Modality::Text)?.map(|c| {
            (0..c.model.k)
                .map(|k| {
                    c.model
                        .members(k)
                        .into_iter()
                        .map(|i| c.features.ids()[i].clone())
                        .collect()
                })
                .collect()
        });
        let (Some(members), Some(Some(text))) = (members, self.text.as_ref()) else {
            self.stage(
                "topics",
                StageReport::failed("text clustering unavailable".into()),
            );
            self.topics = Some(BTreeMap::new());
            return Ok(());
        };
        let base = self.cfg.lda.clone();
        let scan_k = self.cfg.scan_k;
        // Each cluster's chain is independent and seeded from its index.
        let fits: Vec<(usize, Result<ClusterTopics>)> = members
            .par_iter()
            .enumerate()
            .map(|(c, ids)| {
                let docs: Vec<TokenizedDoc> = ids.iter().map(|id| text.docs[id].clone()).collect();
                let cfg = LdaConfig {
                    seed: base.seed.wrapping_add(c as u64),
                    ..base.clone()
                };
                let r = (|| {
                    let model = topics::lda_fit(&docs, &cfg)?;
                    let scan = if scan_k {
                        Some(topics::scan_topic_counts(&docs, &cfg, SCAN_TOPIC_COUNTS)?)
                    } else {
                        None
                    };
                    Ok((
                        cfg.clone(),
                        model.dropped.clone(),
                        model.top_topics.clone(),
                        scan,
                    ))
                })();
                (c, r)
            })
            .collect();
        let mut reported = BTreeMap::new();
        let mut notes = Vec::new();
        for (c, r) in fits {
            match r {
                Ok((cfg, dropped, top, scan)) => {
                    self.emit_json(
                        &format!("topics/text_cluster{c}.json"),
                        &topic_report_json(c, &cfg, &dropped, &top),
                    )?;
                    if let Some(scan) = scan {
                        let v = json!({
                            "cluster": c,
                            "seed": cfg.seed,
                            "scan": scan.iter().map(|(k, coh)| json!({
                                "n_topics": k,
                                "mean_coherence": real(*coh),
                            })).collect::<Vec<_>>(),
                        });
                        self.emit_json(&format!("topics/text_cluster{c}.scan_k.json"), &v)?;
                    }
                    reported.insert(c, top);
                }
                Err(e) => notes.push(format!("cluster {c}: {e}")),
            }
        }
        let mut report = StageReport::new(
            reported
                .keys()
                .map(|c| format!("text_cluster{c}"))
                .collect(),
            Vec::new(),
        );
        if !notes.is_empty() {
            report.status = if reported.is_empty() {
                Status::Failed
            } else {
                Status::Partial
            };
            report.notes = notes;
        }
        self.stage("topics", report);
        self.topics = Some(reported);
        Ok(())
    }

    fn write_profiles(&mut self, modality: Modality) -> Result<()> {
        let exemplar_count = self.cfg.exemplars;
        let Some(c) = self.clusters.get(&modality).and_then(|c| c.as_ref()) else {
            return Ok(());
        };
        let ids = c.features.ids().to_vec();
        let mut profiles = Vec::new();
        let mut swatches = Vec::new();
        for k in 0..c.model.k {
            let members: Vec<String> = c.model.members(k).iter().map(|&i| ids[i].clone()).collect();
            let exemplars: Vec<String> =
                cluster::exemplars(&c.features, &c.model, k, exemplar_count)
                    .into_iter()
                    .map(|i| ids[i].clone())
                    .collect();
            let mut p = json!({
                "cluster": k,
                "size": members.len(),
                "members": members,
                "exemplars": exemplars,
            });
            if modality == Modality::Barcode {
                if let Some(Some(barcodes)) = &self.barcodes {
                    let refs: Vec<&Barcode> = members.iter().map(|id| &barcodes[id]).collect();
                    let avg = barcode::cluster_avg_color(&refs)?;
                    let rel = format!("cluster/swatches/barcode_cluster{k}.ppm");
                    p["avg_rgb"] = reals(&avg);
                    p["swatch"] = json!(rel);
                    let img = FrameImage::solid(SWATCH_SIZE, SWATCH_SIZE, barcode::quantize(&avg));
                    swatches.push((rel, encode_ppm(&img)));
                }
            }
            if modality == Modality::Text {
                if let Some(top) = self.topics.as_ref().and_then(|t| t.get(&k)) {
                    p["topics"] = Value::Array(top.iter().map(ranked_topic_json).collect());
                }
            }
            profiles.push(p);
        }
        let v = json!({
            "modality": modality.as_str(),
            "profiles": profiles,
        });
        for (rel, bytes) in swatches {
            self.emit(&rel, &bytes)?;
        }
        self.emit_json(&format!("cluster/{}.profiles.json", modality.as_str()), &v)
    }

    fn repurpose(&mut self) -> Result<()> {
        let m = self.cfg.modalities;
        let mut sigs: BTreeMap<String, VideoSignatures> = BTreeMap::new();
        let blank = |id: &str| VideoSignatures {
            id: id.to_string(),
            barcode: None,
            audio: None,
            audio_frame_rate: None,
        };
        if m.barcode {
            if let Some(b) = self.barcodes()? {
                for (id, bc) in b {
                    let seq = FrameSequence::new(3, bc.flat())?;
                    sigs.entry(id.clone()).or_insert_with(|| blank(id)).barcode = Some(seq);
                }
            }
        }
        if m.audio {
            let hop = self.cfg.mfcc.hop as f64;
            if let Some(a) = self.audio()? {
                for (id, mf) in &a.mfcc {
                    let s = sigs.entry(id.clone()).or_insert_with(|| blank(id));
                    s.audio = Some(FrameSequence::new(mf.n_coeffs, mf.data.clone())?);
                    s.audio_frame_rate = Some(a.sample_rates[id] as f64 / hop);
                }
            }
        }
        let groups: Option<BTreeMap<String, usize>> = if self.cfg.within_clusters {
            match self.cluster(Modality::Barcode)? {
                Some(c) => Some(
                    c.features
                        .ids()
                        .iter()
                        .cloned()
                        .zip(c.model.assignments.iter().copied())
                        .collect(),
                ),
                None => {
                    self.stage(
                        "repurpose",
                        StageReport::failed(
                            "--within-clusters needs barcode clusters, which are unavailable"
                                .into(),
                        ),
                    );
                    return Ok(());
                }
            }
        } else {
            None
        };
        let videos: Vec<VideoSignatures> = sigs.into_values().collect();
        let scanned = repurpose::scan_corpus(&videos, &self.cfg.scan, |a, b| match &groups {
            None => true,
            Some(g) => matches!((g.get(a), g.get(b)), (Some(x), Some(y)) if x == y),
        });
        match scanned {
            Ok(report) => {
                self.emit_json(
                    "repurpose/report.json",
                    &repurpose_json(&report, groups.is_some()),
                )?;
                let mut stage =
                    StageReport::new(videos.iter().map(|v| v.id.clone()).collect(), Vec::new());
                stage.notes.push(format!(
                    "{} pair(s) with shared segments",
                    report.pairs.len()
                ));
                self.stage("repurpose", stage);
            }
            Err(e) => self.stage("repurpose", StageReport::failed(e.to_string())),
        }
        Ok(())
    }

    fn write_summary(&mut self, command: Command) -> Result<()> {
        let stages: Map<String, Value> = self
            .outcome
            .stages
            .iter()
            .map(|(name, s)| {
                (
                    name.clone(),
                    json!({
                        "status": s.status.as_str(),
                        "included": s.included,
                        "excluded": s.excluded,
                        "notes": s.notes,
                    }),
                )
            })
            .collect();
        let errors: Vec<Value> = self
            .outcome
            .errors
            .iter()
            .map(|e| json!({"video": e.video, "stage": e.stage, "error": e.error}))
            .collect();
        let v = json!({
            "command": command.name(),
            "corpus_id": self.manifest.as_ref().map(|m| m.corpus_id.clone()),
            "seed": self.cfg.seed,
            "exit_code": self.outcome.exit_code(),
            "stages": stages,
            "errors": errors,
            "files": self.outcome.files,
        });
        let path = self.cfg.out.join("summary.json");
        fs::write(&path, canonical_json(&v)).map_err(|e| Error::io(&path, e))
    }
}

fn ranked_topic_json(t: &RankedTopic) -> Value {
    json!({
        "rank": t.rank,
        "topic": t.topic,
        "coherence": real(t.coherence),
        "words": t.words,
    })
}

pub fn topic_report_json(
    cluster: usize,
    cfg: &LdaConfig,
    dropped: &[String],
    top: &[RankedTopic],
) -> Value {
    json!({
        "cluster": cluster,
        "config": {
            "n_topics": cfg.n_topics,
            "alpha": real(cfg.alpha()),
            "beta": real(cfg.beta),
            "iterations": cfg.iterations,
            "seed": cfg.seed,
            "top_words": cfg.top_words,
            "report_topics": cfg.report_topics,
        },
        "dropped": dropped,
        "topics": top.iter().map(ranked_topic_json).collect::<Vec<_>>(),
    })
}

pub fn repurpose_json(report: &RepurposeReport, within_clusters: bool) -> Value {
    json!({
        "within_clusters": within_clusters,
        "pairs": report.pairs.iter().map(|p| json!({
            "a": p.a,
            "b": p.b,
            "multi_modal": p.multi_modal,
            "segments": p.segments.iter().map(|s| json!({
                "modality": s.modality.as_str(),
                "a_start": s.a_start,
                "a_end": s.a_end,
                "b_start": s.b_start,
                "b_end": s.b_end,
                "mean_score": real(s.mean_score),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "skipped": report.skipped.iter().map(|s| json!({
            "a": s.a,
            "b": s.b,
            "modality": s.modality.as_str(),
            "reason": s.reason,
        })).collect::<Vec<_>>(),
    })
}

/// Output-relative paths of every file under `dir`, sorted, `/`-separated.
pub fn list_tree(dir: &Path) -> Result<Vec<String>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path: PathBuf = entry.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).expect("under root");
                let parts: Vec<String> = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect();
                out.push(parts.join("/"));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}
