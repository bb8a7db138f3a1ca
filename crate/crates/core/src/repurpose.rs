//! Repurposed-segment detection between video pairs.
//!
//! Each video is a sequence of fixed-width frames (barcode colors or MFCC
//! rows). Windows of `W` frames from A (stride `step_a`) are correlated with
//! every window of B; hits above the threshold are chained along consistent
//! diagonals into aligned segments.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cluster::Modality;
use crate::num::sqrt;
use crate::{Error, Result};

/// Row-major `len x dim` sequence of per-frame vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl FrameSequence {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flattened window of `w` frames starting at frame `start`.
    pub fn window(&self, start: usize, w: usize) -> &[f64] {
        &self.data[start * self.dim..(start + w) * self.dim]
    }
}

/// How a window is centered before correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// Subtract the mean of the whole flattened window (plain Pearson).
    Global,
    /// Subtract each channel's own mean over the window's frames. Removes the
    /// static per-channel profile (e.g. the average cepstral shape) so only
    /// temporal structure is compared.
    PerChannel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    pub window: usize,
    pub centering: Centering,
    pub step_a: usize,
    pub threshold: f64,
    pub diagonal_slack: usize,
    /// Minimum segment length in frames; `None` means `window`.
    pub min_len: Option<usize>,
}

impl MatchConfig {
    pub fn barcode_default() -> Self {
        Self {
            window: 64,
            centering: Centering::Global,
            step_a: 8,
            threshold: 0.98,
            diagonal_slack: 2,
            min_len: None,
        }
    }

    /// Audio defaults with the window set to `window_frames` MFCC frames
    /// (two seconds at the clip's hop, see [`audio_window_frames`]).
    pub fn audio_default(window_frames: usize) -> Self {
        Self {
            window: window_frames,
            centering: Centering::PerChannel,
            step_a: 8,
            threshold: 0.95,
            diagonal_slack: 2,
            min_len: None,
        }
    }

    pub fn min_len(&self) -> usize {
        self.min_len.unwrap_or(self.window)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 4 {
            return Err(Error::InvalidInput(format!(
                "match window must be at least 4, got {}",
                self.window
            )));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        if self.step_a == 0 {
            return Err(Error::InvalidInput("step_a must be at least 1".into()));
        }
        Ok(())
    }
}

/// MFCC frames spanning `seconds` of audio at `sample_rate / hop` frames per
/// second, rounded to nearest.
pub fn audio_window_frames(seconds: f64, sample_rate: u32, hop: usize) -> usize {
    libm::round(seconds * sample_rate as f64 / hop as f64) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSegment {
    pub a_id: String,
    pub b_id: String,
    pub a_start: usize,
    pub a_end: usize,
    pub b_start: usize,
    pub b_end: usize,
    pub mean_score: f64,
    pub modality: Modality,
}

impl MatchSegment {
    pub fn len(&self) -> usize {
        self.a_end - self.a_start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offset(&self) -> isize {
        self.b_start as isize - self.a_start as isize
    }
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Pearson correlation of two equal-length vectors. A constant vector has no
/// correlation; the pair then scores 1 if the vectors are element-wise equal
/// within `1e-9` and 0 otherwise.
pub fn window_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::EmptyInput("window"));
    }
    if is_constant(u) || is_constant(v) {
        let equal = u.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-9);
        return Ok(if equal { 1.0 } else { 0.0 });
    }
    let mu = crate::num::mean(u);
    let mv = crate::num::mean(v);
    let (mut uv, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (x, y) = (a - mu, b - mv);
        uv += x * y;
        uu += x * x;
        vv += y * y;
    }
    Ok((uv / (sqrt(uu) * sqrt(vv))).clamp(-1.0, 1.0))
}

/// Centered copy of a flattened window of `dim`-wide frames plus its norm, or
/// `None` when centering leaves nothing (constant window, or every channel
/// constant under [`Centering::PerChannel`]).
fn centered(w: &[f64], dim: usize, centering: Centering) -> Option<(Vec<f64>, f64)> {
    let c: Vec<f64> = match centering {
        Centering::Global => {
            if is_constant(w) {
                return None;
            }
            let m = crate::num::mean(w);
            w.iter().map(|x| x - m).collect()
        }
        Centering::PerChannel => {
            let frames = w.len() / dim;
            let channel = |ch: usize| (0..frames).map(move |t| w[t * dim + ch]);
            if (0..dim).all(|ch| channel(ch).all(|x| x == w[ch])) {
                return None;
            }
            let means: Vec<f64> = (0..dim)
                .map(|ch| channel(ch).sum::<f64>() / frames as f64)
                .collect();
            w.iter()
                .enumerate()
                .map(|(i, x)| x - means[i % dim])
                .collect()
        }
    };
    let n = crate::num::norm(&c);
    Some((c, n))
}

/// [`window_similarity`] generalized to a centering mode; `u` and `v` are
/// flattened windows of `dim`-wide frames. With [`Centering::Global`] this is
/// exactly [`window_similarity`].
pub fn window_similarity_with(
    u: &[f64],
    v: &[f64],
    dim: usize,
    centering: Centering,
) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    if u.is_empty() || dim == 0 || !u.len().is_multiple_of(dim) {
        return Err(Error::InvalidInput(format!(
            "window of {} values is not a whole number of {dim}-wide frames",
            u.len()
        )));
    }
    match (centered(u, dim, centering), centered(v, dim, centering)) {
        (Some((cu, nu)), Some((cv, nv))) => {
            Ok((crate::num::dot(&cu, &cv) / (nu * nv)).clamp(-1.0, 1.0))
        }
        _ => {
            let equal = u.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-9);
            Ok(if equal { 1.0 } else { 0.0 })
        }
    }
}

#[derive(Debug)]
struct Group {
    anchor: isize,
    a_lo: usize,
    a_hi: usize,
    b_lo: usize,
    b_hi: usize,
    score_sum: f64,
    count: usize,
    /// offset -> (hits, summed score)
    offsets: BTreeMap<isize, (usize, f64)>,
}

impl Group {
    fn accepts(&self, i: usize, j: usize, w: usize, slack: usize) -> bool {
        let o = j as isize - i as isize;
        (o - self.anchor).unsigned_abs() <= slack
            && i <= self.a_hi + 1
            && i + w >= self.a_lo
            && j <= self.b_hi + 1
            && j + w >= self.b_lo
    }

    fn add(&mut self, i: usize, j: usize, w: usize, s: f64) {
        self.a_lo = self.a_lo.min(i);
        self.a_hi = self.a_hi.max(i + w - 1);
        self.b_lo = self.b_lo.min(j);
        self.b_hi = self.b_hi.max(j + w - 1);
        self.score_sum += s;
        self.count += 1;
        let e = self
            .offsets
            .entry(j as isize - i as isize)
            .or_insert((0, 0.0));
        e.0 += 1;
        e.1 += s;
    }

    fn touches(&self, other: &Group, slack: usize) -> bool {
        let (o1, o2) = (self.representative_offset(), other.representative_offset());
        (o1 - o2).unsigned_abs() <= slack
            && self.a_lo <= other.a_hi + 1
            && other.a_lo <= self.a_hi + 1
            && self.b_lo <= other.b_hi + 1
            && other.b_lo <= self.b_hi + 1
    }

    fn overlaps(&self, other: &Group) -> bool {
        self.a_lo <= other.a_hi
            && other.a_lo <= self.a_hi
            && self.b_lo <= other.b_hi
            && other.b_lo <= self.b_hi
    }

    fn absorb(&mut self, other: Group) {
        self.a_lo = self.a_lo.min(other.a_lo);
        self.a_hi = self.a_hi.max(other.a_hi);
        self.b_lo = self.b_lo.min(other.b_lo);
        self.b_hi = self.b_hi.max(other.b_hi);
        self.score_sum += other.score_sum;
        self.count += other.count;
        for (o, (n, s)) in other.offsets {
            let e = self.offsets.entry(o).or_insert((0, 0.0));
            e.0 += n;
            e.1 += s;
        }
    }

    /// Most frequent offset; ties by larger summed score, then smaller
    /// magnitude, then smaller value.
    fn representative_offset(&self) -> isize {
        let mut best: Option<(isize, usize, f64)> = None;
        for (&o, &(n, s)) in &self.offsets {
            let better = match best {
                None => true,
                Some((bo, bn, bs)) => {
                    n > bn
                        || (n == bn && s > bs)
                        || (n == bn && s == bs && o.unsigned_abs() < bo.unsigned_abs())
                }
            };
            if better {
                best = Some((o, n, s));
            }
        }
        best.map(|b| b.0).unwrap_or(self.anchor)
    }
}

/// Aligned segments shared by `a` and `b`, sorted by `(a_start, b_start)`.
pub fn find_matches(
    a_id: &str,
    a: &FrameSequence,
    b_id: &str,
    b: &FrameSequence,
    config: &MatchConfig,
    modality: Modality,
) -> Result<Vec<MatchSegment>> {
    config.validate()?;
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let w = config.window;
    for s in [a, b] {
        if s.len() < w {
            return Err(Error::SequenceTooShort {
                len: s.len(),
                window: w,
            });
        }
    }

    let nb_windows = b.len() - w + 1;
    let dim = a.dim;
    let b_centered: Vec<Option<f64>> = (0..nb_windows)
        .map(|j| centered(b.window(j, w), dim, config.centering).map(|(_, n)| n))
        .collect();

    // Strided starts, plus the final window so the tail of A is covered.
    let last = a.len() - w;
    let mut starts: Vec<usize> = (0..=last).step_by(config.step_a).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }

    let mut groups: Vec<Group> = Vec::new();
    for i in starts {
        let ua = a.window(i, w);
        let ca = centered(ua, dim, config.centering);
        for j in 0..nb_windows {
            let vb = b.window(j, w);
            // Centered A against raw B equals the fully centered dot product,
            // since the centered A window sums to zero over each centering group.
            let s = match (&ca, b_centered[j]) {
                (Some((cu, nu)), Some(nv)) => {
                    (crate::num::dot(cu, vb) / (nu * nv)).clamp(-1.0, 1.0)
                }
                _ => window_similarity_with(ua, vb, dim, config.centering)?,
            };
            if s < config.threshold {
                continue;
            }
            match groups
                .iter_mut()
                .find(|g| g.accepts(i, j, w, config.diagonal_slack))
            {
                Some(g) => g.add(i, j, w, s),
                None => {
                    let mut g = Group {
                        anchor: j as isize - i as isize,
                        a_lo: i,
                        a_hi: i,
                        b_lo: j,
                        b_hi: j,
                        score_sum: 0.0,
                        count: 0,
                        offsets: BTreeMap::new(),
                    };
                    g.add(i, j, w, s);
                    groups.push(g);
                }
            }
        }
    }

    // Hits first seen at a drifting offset can open a second group on the
    // same diagonal; fold such neighbours together.
    let mut merged = true;
    while merged {
        merged = false;
        'outer: for x in 0..groups.len() {
            for y in x + 1..groups.len() {
                if groups[x].touches(&groups[y], config.diagonal_slack) {
                    let g = groups.remove(y);
                    groups[x].absorb(g);
                    merged = true;
                    break 'outer;
                }
            }
        }
    }

    // Groups overlapping in both A and B align the same material two ways
    // (slowly varying content correlates at small lags); keep the one with
    // the most hits.
    groups.sort_by(|x, y| {
        y.count
            .cmp(&x.count)
            .then(y.score_sum.total_cmp(&x.score_sum))
            .then(x.a_lo.cmp(&y.a_lo))
            .then(x.anchor.cmp(&y.anchor))
    });
    let mut kept: Vec<Group> = Vec::new();
    for g in groups {
        if !kept.iter().any(|k| k.overlaps(&g)) {
            kept.push(g);
        }
    }
    let groups = kept;

    let nb = b.len() as isize;
    let mut segments: Vec<MatchSegment> = groups
        .iter()
        .filter_map(|g| {
            let off = g.representative_offset();
            let mut a_start = g.a_lo as isize;
            let mut a_end = g.a_hi as isize;
            if a_start + off < 0 {
                a_start = -off;
            }
            if a_end + off > nb - 1 {
                a_end = nb - 1 - off;
            }
            if a_end < a_start || ((a_end - a_start + 1) as usize) < config.min_len() {
                return None;
            }
            Some(MatchSegment {
                a_id: a_id.into(),
                b_id: b_id.into(),
                a_start: a_start as usize,
                a_end: a_end as usize,
                b_start: (a_start + off) as usize,
                b_end: (a_end + off) as usize,
                mean_score: (g.score_sum / g.count as f64).clamp(-1.0, 1.0),
                modality,
            })
        })
        .collect();
    segments.sort_by_key(|s| (s.a_start, s.b_start));
    Ok(segments)
}

/// Per-video signatures available to the corpus scan.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSignatures {
    pub id: String,
    pub barcode: Option<FrameSequence>,
    pub audio: Option<FrameSequence>,
    /// MFCC frames per second (`sample_rate / hop`) of `audio`.
    pub audio_frame_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub barcode: MatchConfig,
    pub audio: MatchConfig,
    /// When set, the audio window for each pair is this many seconds at the
    /// slower of the two MFCC frame rates, overriding `audio.window`.
    pub audio_window_secs: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            barcode: MatchConfig::barcode_default(),
            audio: MatchConfig::audio_default(86),
            audio_window_secs: Some(2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub a: String,
    pub b: String,
    pub multi_modal: bool,
    pub segments: Vec<MatchSegment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPair {
    pub a: String,
    pub b: String,
    pub modality: Modality,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RepurposeReport {
    pub pairs: Vec<PairReport>,
    pub skipped: Vec<SkippedPair>,
}

/// Scans every unordered pair accepted by `include` in both modalities.
///
/// Pairs are visited as `(a, b)` with `a < b` by id; only pairs with at least
/// one segment are reported, and pairs matched in both modalities are flagged
/// multi-modal.
pub fn scan_corpus<F>(
    videos: &[VideoSignatures],
    config: &ScanConfig,
    mut include: F,
) -> Result<RepurposeReport>
where
    F: FnMut(&str, &str) -> bool,
{
    if videos.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "repurpose scan needs at least 2 videos, got {}",
            videos.len()
        )));
    }
    let mut order: Vec<&VideoSignatures> = videos.iter().collect();
    order.sort_by(|x, y| x.id.cmp(&y.id));

    let mut report = RepurposeReport::default();
    for (ia, va) in order.iter().enumerate() {
        for vb in &order[ia + 1..] {
            if !include(&va.id, &vb.id) {
                continue;
            }
            let mut segments = Vec::new();
            let mut modalities = 0;
            if let (Some(sa), Some(sb)) = (&va.barcode, &vb.barcode) {
                match find_matches(&va.id, sa, &vb.id, sb, &config.barcode, Modality::Barcode) {
                    Ok(found) => {
                        modalities += usize::from(!found.is_empty());
                        segments.extend(found);
                    }
                    Err(e @ Error::SequenceTooShort { .. }) => report.skipped.push(SkippedPair {
                        a: va.id.clone(),
                        b: vb.id.clone(),
                        modality: Modality::Barcode,
                        reason: format!("{e}"),
                    }),
                    Err(e) => return Err(e),
                }
            }
            if let (Some(sa), Some(sb)) = (&va.audio, &vb.audio) {
                let mut cfg = config.audio;
                if let (Some(secs), Some(ra), Some(rb)) = (
                    config.audio_window_secs,
                    va.audio_frame_rate,
                    vb.audio_frame_rate,
                ) {
                    cfg.window = libm::round(secs * ra.min(rb)) as usize;
                }
                match find_matches(&va.id, sa, &vb.id, sb, &cfg, Modality::Audio) {
                    Ok(found) => {
                        modalities += usize::from(!found.is_empty());
                        segments.extend(found);
                    }
                    Err(e @ Error::SequenceTooShort { .. }) => report.skipped.push(SkippedPair {
                        a: va.id.clone(),
                        b: vb.id.clone(),
                        modality: Modality::Audio,
                        reason: format!("{e}"),
                    }),
                    Err(e) => return Err(e),
                }
            }
            if !segments.is_empty() {
                report.pairs.push(PairReport {
                    a: va.id.clone(),
                    b: vb.id.clone(),
                    multi_modal: modalities == 2,
                    segments,
                });
            }
        }
    }
    Ok(report)
}
