//! Straight-line reference implementations used as test oracles.
//!
//! Nothing here calls into the code paths it is used to check: the DFT is the
//! O(N^2) sum, the MFCC pipeline evaluates every formula inline, K-means
//! optimality comes from enumerating partitions, and so on.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use mediabar_core::rng::SplitMix64;

/// `|X[k]|^2` for every `k` in `0..N`, by the direct sum.
pub fn naive_full_power(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (j, &v) in x.iter().enumerate() {
                let ang = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            re * re + im * im
        })
        .collect()
}

pub fn naive_half_power(x: &[f64]) -> Vec<f64> {
    let mut p = naive_full_power(x);
    p.truncate(x.len() / 2 + 1);
    p
}

pub struct RefMfccParams {
    pub frame_size: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub log_floor: f64,
}

/// MFCC by direct evaluation: symmetric Hann, naive DFT, HTK triangles,
/// natural log with a floor, orthonormal DCT-II.
pub fn reference_mfcc(samples: &[f64], sample_rate: f64, p: &RefMfccParams) -> Vec<Vec<f64>> {
    let n = p.frame_size;
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let (m_lo, m_hi) = (mel(p.fmin), mel(p.fmax));
    let edges: Vec<f64> = (0..p.n_mels + 2)
        .map(|i| hz(m_lo + (m_hi - m_lo) * i as f64 / (p.n_mels + 1) as f64))
        .collect();
    let tri = |i: usize, f: f64| -> f64 {
        let (a, b, c) = (edges[i], edges[i + 1], edges[i + 2]);
        if f > a && f <= b {
            (f - a) / (b - a)
        } else if f > b && f < c {
            (c - f) / (c - b)
        } else {
            0.0
        }
    };
    let mut out = Vec::new();
    let mut start = 0;
    while start + n <= samples.len() {
        let frame: Vec<f64> = (0..n)
            .map(|j| {
                let w = 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos();
                samples[start + j] * w
            })
            .collect();
        let power = naive_half_power(&frame);
        let log_e: Vec<f64> = (0..p.n_mels)
            .map(|i| {
                let e: f64 = power
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| pk * tri(i, k as f64 * sample_rate / n as f64))
                    .sum();
                e.max(p.log_floor).ln()
            })
            .collect();
        let m = p.n_mels as f64;
        let coeffs: Vec<f64> = (0..p.n_mfcc)
            .map(|k| {
                let s = if k == 0 {
                    (1.0 / m).sqrt()
                } else {
                    (2.0 / m).sqrt()
                };
                s * log_e
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (2 * j + 1) as f64 / (2.0 * m)).cos())
                    .sum::<f64>()
            })
            .collect();
        out.push(coeffs);
        start += p.hop;
    }
    out
}

/// Minimum WCSS over every partition of `points` into exactly `k` non-empty
/// groups, by enumerating label vectors.
pub fn exhaustive_wcss(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    loop {
        let used: BTreeSet<usize> = labels.iter().copied().collect();
        if used.len() == k {
            let mut w = 0.0;
            for c in 0..k {
                let members: Vec<&Vec<f64>> = (0..n)
                    .filter(|&i| labels[i] == c)
                    .map(|i| &points[i])
                    .collect();
                let mut mean = vec![0.0; d];
                for m in &members {
                    for j in 0..d {
                        mean[j] += m[j] / members.len() as f64;
                    }
                }
                for m in &members {
                    w += (0..d).map(|j| (m[j] - mean[j]).powi(2)).sum::<f64>();
                }
            }
            best = best.min(w);
        }
        // Next label vector in base k.
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Silhouette by the textbook formula, one point at a time.
pub fn silhouette_direct(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let clusters: BTreeSet<usize> = labels.iter().copied().collect();
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let same: Vec<usize> = (0..n)
            .filter(|&j| j != i && labels[j] == labels[i])
            .collect();
        if same.is_empty() {
            continue;
        }
        let a = same
            .iter()
            .map(|&j| dist(&points[i], &points[j]))
            .sum::<f64>()
            / same.len() as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| {
                let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                other
                    .iter()
                    .map(|&j| dist(&points[i], &points[j]))
                    .sum::<f64>()
                    / other.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

/// UMass coherence by scanning every document for every pair.
pub fn umass_scan(words: &[String], docs: &[Vec<String>]) -> f64 {
    let contains = |d: &Vec<String>, w: &String| d.iter().any(|t| t == w);
    let mut c = 0.0;
    for i in 1..words.len() {
        for j in 0..i {
            let dj = docs.iter().filter(|d| contains(d, &words[j])).count();
            let dij = docs
                .iter()
                .filter(|d| contains(d, &words[i]) && contains(d, &words[j]))
                .count();
            // Same log routine as the library, so agreement can be exact.
            c += libm::log((dij + 1) as f64 / dj as f64);
        }
    }
    c
}

/// Pearson correlation computed from the raw sums.
pub fn pearson(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let cov: f64 = u.iter().zip(v).map(|(a, b)| (a - mu) * (b - mv)).sum();
    let su: f64 = u.iter().map(|a| (a - mu).powi(2)).sum::<f64>().sqrt();
    let sv: f64 = v.iter().map(|b| (b - mv).powi(2)).sum::<f64>().sqrt();
    cov / (su * sv)
}

/// Every `(i, j)` window pair of two row-major sequences with correlation at
/// or above `tau`, A starts restricted to multiples of `step` (plus the last).
pub fn brute_force_hits(
    a: &[f64],
    b: &[f64],
    dim: usize,
    w: usize,
    step: usize,
    tau: f64,
) -> Vec<(usize, usize, f64)> {
    let (na, nb) = (a.len() / dim, b.len() / dim);
    let mut starts: Vec<usize> = (0..=na - w).step_by(step).collect();
    if *starts.last().unwrap() != na - w {
        starts.push(na - w);
    }
    let mut hits = Vec::new();
    for i in starts {
        for j in 0..=nb - w {
            let s = pearson(&a[i * dim..(i + w) * dim], &b[j * dim..(j + w) * dim]);
            if s >= tau {
                hits.push((i, j, s));
            }
        }
    }
    hits
}

/// Isotropic Gaussian blobs: `per_blob` points around each center.
pub fn blobs(centers: &[Vec<f64>], sigma: f64, per_blob: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    let mut pts = Vec::new();
    for c in centers {
        for _ in 0..per_blob {
            pts.push(c.iter().map(|x| x + sigma * rng.next_gaussian()).collect());
        }
    }
    pts
}

/// Synthetic audio: back-to-back tone, loud-noise and near-silent segments of
/// 0.2 to 0.6 s with random pitch, level and phase, in `[-1, 1]`.
pub fn segment_audio(rng: &mut SplitMix64, len: usize, sample_rate: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let seg = ((0.2 + 0.4 * rng.next_f64()) * sample_rate) as usize;
        let kind = rng.below(3);
        let f = 100.0 + 3000.0 * rng.next_f64();
        let amp = 0.05 + 0.5 * rng.next_f64();
        let phase = rng.next_f64() * 2.0 * PI;
        for n in 0..seg {
            let t = n as f64 / sample_rate;
            out.push(match kind {
                0 => amp * (2.0 * PI * f * t + phase).sin(),
                1 => amp * (rng.next_f64() * 2.0 - 1.0),
                _ => 0.01 * (rng.next_f64() * 2.0 - 1.0),
            });
        }
    }
    out.truncate(len);
    out
}
