//! Pipeline configuration. The JSON config file mirrors [`PipelineConfig`];
//! every field is optional and falls back to the defaults below.

use std::fs;
use std::path::{Path, PathBuf};

use mediabar_core::barcode::{DEFAULT_FEATURE_LEN, DEFAULT_RENDER_HEIGHT};
use mediabar_core::cluster::{ChooseKOptions, KMeansOptions};
use mediabar_core::dsp::MfccConfig;
use mediabar_core::repurpose::{Centering, MatchConfig, ScanConfig};
use mediabar_core::topics::LdaConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Required: no stage draws implicit entropy.
    pub seed: Option<u64>,
    pub modalities: Modalities,
    pub topics: bool,
    pub repurpose: bool,
    pub k_range: KRange,
    pub restarts: usize,
    pub mfcc: MfccSettings,
    pub lda: LdaSettings,
    pub barcode: BarcodeSettings,
    pub matching: MatchingSettings,
    /// Replaces the bundled English stop-word list.
    pub stopwords: Option<PathBuf>,
    /// Cluster text on cosine-similarity rows instead of feature rows.
    pub similarity_rows: bool,
    /// Also fit every topic count in `2..=10` per text cluster and report
    /// mean coherence.
    pub scan_k: bool,
    pub envelope_bins: usize,
    pub exemplars: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            out: None,
            seed: None,
            modalities: Modalities::default(),
            topics: true,
            repurpose: true,
            k_range: KRange::default(),
            restarts: 8,
            mfcc: MfccSettings::default(),
            lda: LdaSettings::default(),
            barcode: BarcodeSettings::default(),
            matching: MatchingSettings::default(),
            stopwords: None,
            similarity_rows: false,
            scan_k: false,
            envelope_bins: 512,
            exemplars: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Modalities {
    pub barcode: bool,
    pub audio: bool,
    pub text: bool,
}

impl Default for Modalities {
    fn default() -> Self {
        Self {
            barcode: true,
            audio: true,
            text: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl Default for KRange {
    fn default() -> Self {
        Self { min: 2, max: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccSettings {
    pub frame_size: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub fmin: f64,
    pub fmax: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccSettings {
    fn default() -> Self {
        let c = MfccConfig::default();
        Self {
            frame_size: c.frame_size,
            hop: c.hop,
            n_mels: c.n_mels,
            n_mfcc: c.n_mfcc,
            fmin: c.fmin,
            fmax: c.fmax,
            log_floor: c.log_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSettings {
    pub n_topics: usize,
    /// `None` means `50 / n_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub top_words: usize,
    pub report_topics: usize,
}

impl Default for LdaSettings {
    fn default() -> Self {
        let c = LdaConfig::default();
        Self {
            n_topics: c.n_topics,
            alpha: c.alpha,
            beta: c.beta,
            iterations: c.iterations,
            top_words: c.top_words,
            report_topics: c.report_topics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarcodeSettings {
    /// Resampled length `L` of the clustering feature.
    pub feature_len: usize,
    /// Use every `stride`-th frame.
    pub stride: usize,
    pub render_height: usize,
}

impl Default for BarcodeSettings {
    fn default() -> Self {
        Self {
            feature_len: DEFAULT_FEATURE_LEN,
            stride: 1,
            render_height: DEFAULT_RENDER_HEIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringSetting {
    Global,
    PerChannel,
}

impl From<CenteringSetting> for Centering {
    fn from(c: CenteringSetting) -> Self {
        match c {
            CenteringSetting::Global => Centering::Global,
            CenteringSetting::PerChannel => Centering::PerChannel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSettings {
    /// Window in frames. For audio this is overridden per pair when
    /// `audio_window_secs` is set.
    pub window: usize,
    pub step_a: usize,
    pub threshold: f64,
    pub diagonal_slack: usize,
    #[serde(default)]
    pub min_len: Option<usize>,
    pub centering: CenteringSetting,
}

impl From<MatchConfig> for MatchSettings {
    fn from(c: MatchConfig) -> Self {
        Self {
            window: c.window,
            step_a: c.step_a,
            threshold: c.threshold,
            diagonal_slack: c.diagonal_slack,
            min_len: c.min_len,
            centering: match c.centering {
                Centering::Global => CenteringSetting::Global,
                Centering::PerChannel => CenteringSetting::PerChannel,
            },
        }
    }
}

impl From<MatchSettings> for MatchConfig {
    fn from(s: MatchSettings) -> Self {
        Self {
            window: s.window,
            centering: s.centering.into(),
            step_a: s.step_a,
            threshold: s.threshold,
            diagonal_slack: s.diagonal_slack,
            min_len: s.min_len,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSettings {
    pub barcode: MatchSettings,
    pub audio: MatchSettings,
    pub audio_window_secs: Option<f64>,
    /// Only compare pairs that share a barcode cluster.
    pub within_clusters: bool,
}

impl Default for MatchingSettings {
    fn default() -> Self {
        let scan = ScanConfig::default();
        Self {
            barcode: scan.barcode.into(),
            audio: scan.audio.into(),
            audio_window_secs: scan.audio_window_secs,
            within_clusters: false,
        }
    }
}

/// Fully resolved configuration, checked and converted to core types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub modalities: Modalities,
    pub topics: bool,
    pub repurpose: bool,
    pub choose_k: ChooseKOptions,
    pub mfcc: MfccConfig,
    pub lda: LdaConfig,
    pub barcode: BarcodeSettings,
    pub scan: ScanConfig,
    pub within_clusters: bool,
    pub stopwords: Option<PathBuf>,
    pub similarity_rows: bool,
    pub scan_k: bool,
    pub envelope_bins: usize,
    pub exemplars: usize,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let fail = |m: String| Err(Error::Config(m));
        let Some(seed) = self.seed else {
            return fail("a seed is required (--seed or \"seed\" in the config file)".into());
        };
        let Some(out) = self.out.clone() else {
            return fail("an output directory is required (--out)".into());
        };
        if self.k_range.min < 2 || self.k_range.max < self.k_range.min {
            return fail(format!(
                "k_range must satisfy 2 <= min <= max, got {}..={}",
                self.k_range.min, self.k_range.max
            ));
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1".into());
        }
        let b = self.barcode;
        if b.feature_len < 2 || b.stride == 0 || b.render_height == 0 {
            return fail("barcode feature_len must be >= 2, stride and render_height >= 1".into());
        }
        if self.envelope_bins == 0 {
            return fail("envelope_bins must be at least 1".into());
        }
        if self.exemplars == 0 {
            return fail("exemplars must be at least 1".into());
        }
        let m = &self.mfcc;
        let mfcc = MfccConfig {
            frame_size: m.frame_size,
            hop: m.hop,
            n_mels: m.n_mels,
            n_mfcc: m.n_mfcc,
            fmin: m.fmin,
            fmax: m.fmax,
            log_floor: m.log_floor,
        };
        mfcc.validate_shape()
            .map_err(|e| Error::Config(format!("mfcc: {e}")))?;
        let l = &self.lda;
        let lda = LdaConfig {
            n_topics: l.n_topics,
            alpha: l.alpha,
            beta: l.beta,
            iterations: l.iterations,
            seed,
            top_words: l.top_words,
            report_topics: l.report_topics,
        };
        lda.validate()
            .map_err(|e| Error::Config(format!("lda: {e}")))?;
        let scan = ScanConfig {
            barcode: self.matching.barcode.into(),
            audio: self.matching.audio.into(),
            audio_window_secs: self.matching.audio_window_secs,
        };
        if let Some(secs) = scan.audio_window_secs {
            if !(secs > 0.0 && secs.is_finite()) {
                return fail(format!("audio_window_secs must be positive, got {secs}"));
            }
        }
        for (name, c) in [("barcode", scan.barcode), ("audio", scan.audio)] {
            c.validate()
                .map_err(|e| Error::Config(format!("matching.{name}: {e}")))?;
        }
        Ok(Resolved {
            manifest: self.manifest.clone(),
            out,
            seed,
            modalities: self.modalities,
            topics: self.topics,
            repurpose: self.repurpose,
            choose_k: ChooseKOptions {
                k_min: self.k_range.min,
                k_max: self.k_range.max,
                restarts: self.restarts,
                kmeans: KMeansOptions::default(),
            },
            mfcc,
            lda,
            barcode: self.barcode,
            scan,
            within_clusters: self.matching.within_clusters,
            stopwords: self.stopwords.clone(),
            similarity_rows: self.similarity_rows,
            scan_k: self.scan_k,
            envelope_bins: self.envelope_bins,
            exemplars: self.exemplars,
        })
    }
}
