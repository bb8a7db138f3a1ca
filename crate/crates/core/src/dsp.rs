//! Audio signal chain: Hann window, power spectrum, HTK mel filterbank, log
//! compression and an orthonormal DCT-II, producing MFCC matrices. Also the
//! fixed-length MFCC summary used for clustering and the min/max waveform
//! envelope used for inspection.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::media::AudioClip;
use crate::num::{cos, ln, log10, normalize, powf, sin, sqrt};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub frame_size: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub fmin: f64,
    /// Upper filterbank edge in Hz; `None` means the Nyquist frequency.
    pub fmax: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame_size: 2048,
            hop: 512,
            n_mels: 40,
            n_mfcc: 13,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn fmax_for(&self, sample_rate: u32) -> f64 {
        self.fmax.unwrap_or(sample_rate as f64 / 2.0)
    }

    /// Checks everything that does not depend on the sample rate.
    pub fn validate_shape(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.frame_size < 2 {
            return fail(alloc::format!("frame_size {} < 2", self.frame_size));
        }
        if self.hop == 0 {
            return fail("hop must be at least 1".into());
        }
        if self.n_mfcc == 0 || self.n_mfcc > self.n_mels {
            return fail(alloc::format!(
                "need 0 < n_mfcc <= n_mels, got n_mfcc={} n_mels={}",
                self.n_mfcc,
                self.n_mels
            ));
        }
        if self.log_floor.is_nan() || self.log_floor <= 0.0 {
            return fail("log_floor must be positive".into());
        }
        Ok(())
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        self.validate_shape()?;
        let fmax = self.fmax_for(sample_rate);
        if !(self.fmin >= 0.0 && self.fmin < fmax) {
            return Err(Error::InvalidInput(alloc::format!(
                "need 0 <= fmin < fmax, got fmin={} fmax={fmax}",
                self.fmin
            )));
        }
        Ok(())
    }

    pub fn n_fft_bins(&self) -> usize {
        self.frame_size / 2 + 1
    }

    /// MFCC frames needed to span `seconds` of audio at this hop.
    pub fn frames_for_seconds(&self, seconds: f64, sample_rate: u32) -> usize {
        libm::round(seconds * sample_rate as f64 / self.hop as f64) as usize
    }
}

/// `T x n_mfcc` coefficient matrix, row-major, one row per analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccMatrix {
    pub video_id: String,
    pub n_frames: usize,
    pub n_coeffs: usize,
    pub data: Vec<f64>,
    pub config: MfccConfig,
}

impl MfccMatrix {
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_coeffs..(t + 1) * self.n_coeffs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_coeffs)
    }
}

/// Per-coefficient mean followed by per-coefficient population standard
/// deviation, scaled to unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioFeature {
    pub video_id: String,
    pub values: Vec<f64>,
}

pub fn hann_window(n: usize) -> Vec<f64> {
    assert!(n >= 2, "hann window needs at least 2 points");
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 - 0.5 * cos(2.0 * PI * i as f64 / denom))
        .collect()
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * log10(1.0 + f / 700.0)
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (powf(10.0, m / 2595.0) - 1.0)
}

/// Precomputed twiddles and bit-reversal for a power-of-two complex FFT.
#[derive(Debug, Clone)]
struct Radix2Plan {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    rev: Vec<usize>,
}

impl Radix2Plan {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let half = n / 2;
        let cos_t = (0..half)
            .map(|k| cos(2.0 * PI * k as f64 / n as f64))
            .collect();
        let sin_t = (0..half)
            .map(|k| sin(2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Self {
            n,
            cos: cos_t,
            sin: sin_t,
            rev,
        }
    }

    /// In-place forward transform with kernel `e^{-2 pi i k n / N}`.
    fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let wr = self.cos[k * stride];
                    let wi = -self.sin[k * stride];
                    let (a, b) = (start + k, start + k + half);
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            len <<= 1;
        }
    }
}

/// Power spectrum `|X[k]|^2` for `k = 0..=N/2` of a real frame.
///
/// Power-of-two lengths go through a radix-2 FFT; other lengths fall back to
/// the direct sum.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    n: usize,
    plan: Option<Radix2Plan>,
}

impl PowerSpectrum {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "spectrum needs at least 2 samples");
        let plan = n.is_power_of_two().then(|| Radix2Plan::new(n));
        Self { n, plan }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn compute(&self, frame: &[f64], out: &mut Vec<f64>) {
        assert_eq!(frame.len(), self.n);
        let bins = self.n / 2 + 1;
        out.clear();
        match &self.plan {
            Some(plan) => {
                let mut re = frame.to_vec();
                let mut im = vec![0.0; self.n];
                plan.forward(&mut re, &mut im);
                out.extend((0..bins).map(|k| re[k] * re[k] + im[k] * im[k]));
            }
            None => {
                let n = self.n;
                for k in 0..bins {
                    let (mut sr, mut si) = (0.0, 0.0);
                    for (j, &x) in frame.iter().enumerate() {
                        let phase = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                        sr += x * cos(phase);
                        si -= x * sin(phase);
                    }
                    out.push(sr * sr + si * si);
                }
            }
        }
    }
}

pub fn dft_power_spectrum(frame: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    PowerSpectrum::new(frame.len()).compute(frame, &mut out);
    out
}

/// Triangular HTK-style filterbank, `n_mels x n_fft_bins`, row-major, unit
/// peak and no area normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_mels: usize,
    pub n_bins: usize,
    pub weights: Vec<f64>,
    /// The `n_mels + 2` band edges in Hz.
    pub edges_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn filter(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n_bins..(i + 1) * self.n_bins]
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.edges_hz[1..=self.n_mels]
    }

    pub fn apply(&self, power: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.n_bins)
                .map(|w| crate::num::dot(w, power)),
        );
    }
}

pub fn mel_filterbank(
    config: &MfccConfig,
    sample_rate: u32,
    n_fft_bins: usize,
) -> Result<MelFilterbank> {
    config.validate(sample_rate)?;
    if n_fft_bins != config.n_fft_bins() {
        return Err(Error::DimensionMismatch {
            expected: config.n_fft_bins(),
            found: n_fft_bins,
        });
    }
    let n_mels = config.n_mels;
    let mel_lo = hz_to_mel(config.fmin);
    let mel_hi = hz_to_mel(config.fmax_for(sample_rate));
    let step = (mel_hi - mel_lo) / (n_mels + 1) as f64;
    let edges_hz: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + step * i as f64))
        .collect();
    let bin_hz = sample_rate as f64 / config.frame_size as f64;

    let mut weights = vec![0.0; n_mels * n_fft_bins];
    for i in 0..n_mels {
        let (lo, mid, hi) = (edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]);
        let row = &mut weights[i * n_fft_bins..(i + 1) * n_fft_bins];
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            *w = if f > lo && f <= mid {
                (f - lo) / (mid - lo)
            } else if f > mid && f < hi {
                (hi - f) / (hi - mid)
            } else {
                0.0
            };
        }
        if row.iter().all(|&w| w <= 0.0) {
            return Err(Error::EmptyMelFilter { index: i });
        }
    }
    Ok(MelFilterbank {
        n_mels,
        n_bins: n_fft_bins,
        weights,
        edges_hz,
    })
}

/// Orthonormal DCT-II basis restricted to the first `n_out` coefficients,
/// row-major `n_out x n_in`.
pub fn dct2_basis(n_in: usize, n_out: usize) -> Vec<f64> {
    let m = n_in as f64;
    let mut basis = Vec::with_capacity(n_in * n_out);
    for k in 0..n_out {
        let scale = if k == 0 { sqrt(1.0 / m) } else { sqrt(2.0 / m) };
        for j in 0..n_in {
            basis.push(scale * cos(PI * k as f64 * (2 * j + 1) as f64 / (2.0 * m)));
        }
    }
    basis
}

/// Reusable MFCC pipeline for one configuration.
///
/// Filterbanks depend on the sample rate and are memoized per rate; a given
/// rate always maps to the same matrix.
#[derive(Debug, Clone)]
pub struct MfccExtractor {
    config: MfccConfig,
    window: Vec<f64>,
    spectrum: PowerSpectrum,
    dct: Vec<f64>,
    filterbanks: BTreeMap<u32, MelFilterbank>,
}

impl MfccExtractor {
    pub fn new(config: MfccConfig) -> Result<Self> {
        config.validate_shape()?;
        Ok(Self {
            window: hann_window(config.frame_size),
            spectrum: PowerSpectrum::new(config.frame_size),
            dct: dct2_basis(config.n_mels, config.n_mfcc),
            filterbanks: BTreeMap::new(),
            config,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.config
    }

    pub fn filterbank(&mut self, sample_rate: u32) -> Result<&MelFilterbank> {
        if !self.filterbanks.contains_key(&sample_rate) {
            let fb = mel_filterbank(&self.config, sample_rate, self.config.n_fft_bins())?;
            self.filterbanks.insert(sample_rate, fb);
        }
        Ok(&self.filterbanks[&sample_rate])
    }

    pub fn extract(&mut self, clip: &AudioClip, video_id: &str) -> Result<MfccMatrix> {
        let cfg = self.config.clone();
        cfg.validate(clip.sample_rate())?;
        let samples = clip.samples();
        if samples.len() < cfg.frame_size {
            return Err(Error::ClipTooShort {
                samples: samples.len(),
                frame_size: cfg.frame_size,
            });
        }
        self.filterbank(clip.sample_rate())?;
        let fb = &self.filterbanks[&clip.sample_rate()];

        let n_frames = (samples.len() - cfg.frame_size) / cfg.hop + 1;
        let mut data = Vec::with_capacity(n_frames * cfg.n_mfcc);
        let mut windowed = vec![0.0; cfg.frame_size];
        let mut power = Vec::with_capacity(cfg.n_fft_bins());
        let mut energies = Vec::with_capacity(cfg.n_mels);
        for t in 0..n_frames {
            let start = t * cfg.hop;
            let frame = &samples[start..start + cfg.frame_size];
            for ((w, &x), &h) in windowed.iter_mut().zip(frame).zip(&self.window) {
                *w = x * h;
            }
            self.spectrum.compute(&windowed, &mut power);
            fb.apply(&power, &mut energies);
            for e in energies.iter_mut() {
                *e = ln(if *e > cfg.log_floor {
                    *e
                } else {
                    cfg.log_floor
                });
            }
            data.extend(
                self.dct
                    .chunks_exact(cfg.n_mels)
                    .map(|basis| crate::num::dot(basis, &energies)),
            );
        }
        Ok(MfccMatrix {
            video_id: video_id.into(),
            n_frames,
            n_coeffs: cfg.n_mfcc,
            data,
            config: cfg,
        })
    }
}

pub fn mfcc(clip: &AudioClip, config: &MfccConfig, video_id: &str) -> Result<MfccMatrix> {
    MfccExtractor::new(config.clone())?.extract(clip, video_id)
}

pub fn summarize_mfcc(m: &MfccMatrix) -> Result<AudioFeature> {
    if m.n_frames == 0 {
        return Err(Error::EmptyInput("mfcc frames"));
    }
    let c = m.n_coeffs;
    let t = m.n_frames as f64;
    let mut means = vec![0.0; c];
    for row in m.rows() {
        for (acc, v) in means.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in means.iter_mut() {
        *v /= t;
    }
    let mut vars = vec![0.0; c];
    for row in m.rows() {
        for ((acc, v), mu) in vars.iter_mut().zip(row).zip(&means) {
            let d = v - mu;
            *acc += d * d;
        }
    }
    let mut values = means;
    values.extend(vars.iter().map(|v| sqrt(v / t)));
    if normalize(&mut values) == 0.0 {
        return Err(Error::DegenerateFeature {
            id: m.video_id.clone(),
        });
    }
    Ok(AudioFeature {
        video_id: m.video_id.clone(),
        values,
    })
}

/// Partitions the clip into at most `bins` contiguous ranges of
/// `ceil(len / bins)` samples (the last may be shorter) and returns each
/// range's `(min, max)` amplitude.
pub fn waveform_envelope(clip: &AudioClip, bins: usize) -> Result<Vec<(f64, f64)>> {
    if bins == 0 {
        return Err(Error::InvalidInput(
            "envelope needs at least one bin".into(),
        ));
    }
    let samples = clip.samples();
    let chunk = samples.len().div_ceil(bins);
    Ok(samples
        .chunks(chunk)
        .map(|c| {
            c.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                    (lo.min(s), hi.max(s))
                })
        })
        .collect())
}
