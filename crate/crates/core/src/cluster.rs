//! Seeded K-means (K-means++ init, Lloyd iterations), silhouette and elbow
//! scoring, and K selection over a range of candidate cluster counts.
//!
//! All random draws go through [`SplitMix64`] and select row indices only, so
//! a run is fully determined by the data and the seed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::num::{dist, sq_dist};
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Modality {
    Text,
    Barcode,
    Audio,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Text, Modality::Barcode, Modality::Audio];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Barcode => "barcode",
            Modality::Audio => "audio",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

/// `N x D` matrix of per-video vectors for one modality, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    dim: usize,
    rows: Vec<f64>,
    modality: Modality,
}

impl FeatureMatrix {
    pub fn new(ids: Vec<String>, dim: usize, rows: Vec<f64>, modality: Modality) -> Result<Self> {
        if ids.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "feature matrix needs at least 2 rows, got {}",
                ids.len()
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidInput(
                "feature dimension must be positive".into(),
            ));
        }
        if rows.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: ids.len() * dim,
                found: rows.len(),
            });
        }
        if let Some(p) = rows.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: p / dim,
                col: p % dim,
            });
        }
        Ok(Self {
            ids,
            dim,
            rows,
            modality,
        })
    }

    /// Builds a matrix from `(id, vector)` pairs, checking that every vector
    /// has the same length.
    pub fn from_rows<I, V>(rows: I, modality: Modality) -> Result<Self>
    where
        I: IntoIterator<Item = (String, V)>,
        V: AsRef<[f64]>,
    {
        let mut ids = Vec::new();
        let mut flat = Vec::new();
        let mut dim = None;
        for (id, v) in rows {
            let v = v.as_ref();
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    })
                }
                _ => {}
            }
            ids.push(id);
            flat.extend_from_slice(v);
        }
        Self::new(ids, dim.unwrap_or(0), flat, modality)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iters: 300,
            rel_tol: 1e-6,
        }
    }
}

/// A fitted partition. `assignments[i]` is the cluster of feature row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// `k x D`, row-major.
    pub centers: Vec<f64>,
    pub wcss: f64,
    pub silhouette: f64,
    pub seed: u64,
    pub iterations: usize,
    /// WCSS after every assign+update step, in order.
    pub wcss_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn center(&self, c: usize) -> &[f64] {
        let d = self.centers.len() / self.k;
        &self.centers[c * d..(c + 1) * d]
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == c)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

// Monotonicity slack for floating-point reassociation in the WCSS sum.
const MONOTONE_SLACK: f64 = 1e-12;

struct Lloyd<'a> {
    x: &'a FeatureMatrix,
    k: usize,
    opts: KMeansOptions,
}

struct LloydResult {
    assignments: Vec<usize>,
    centers: Vec<f64>,
    wcss: f64,
    trace: Vec<f64>,
    iterations: usize,
}

impl Lloyd<'_> {
    fn assign(&self, centers: &[f64], out: &mut [usize]) {
        let d = self.x.dim();
        for (i, a) in out.iter_mut().enumerate() {
            let row = self.x.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..self.k {
                let dd = sq_dist(row, &centers[c * d..(c + 1) * d]);
                if dd < best_d {
                    best_d = dd;
                    best = c;
                }
            }
            *a = best;
        }
    }

    /// Gives every empty cluster the point farthest from its current center
    /// (lowest row index on ties), drawn only from clusters that keep at
    /// least one member.
    fn repair_empty(&self, centers: &[f64], assignments: &mut [usize]) {
        let d = self.x.dim();
        let mut sizes = vec![0usize; self.k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        for empty in 0..self.k {
            if sizes[empty] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = f64::NEG_INFINITY;
            for (i, &a) in assignments.iter().enumerate() {
                if sizes[a] < 2 {
                    continue;
                }
                let dd = sq_dist(self.x.row(i), &centers[a * d..(a + 1) * d]);
                if dd > far_d {
                    far_d = dd;
                    far = Some(i);
                }
            }
            let i = far.expect("k <= N guarantees a donor cluster");
            sizes[assignments[i]] -= 1;
            assignments[i] = empty;
            sizes[empty] = 1;
        }
    }

    fn update(&self, assignments: &[usize], centers: &mut [f64]) {
        let d = self.x.dim();
        let mut counts = vec![0usize; self.k];
        centers.iter_mut().for_each(|c| *c = 0.0);
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            for (c, v) in centers[a * d..(a + 1) * d].iter_mut().zip(self.x.row(i)) {
                *c += v;
            }
        }
        for c in 0..self.k {
            let n = counts[c] as f64;
            centers[c * d..(c + 1) * d].iter_mut().for_each(|v| *v /= n);
        }
    }

    fn wcss(&self, assignments: &[usize], centers: &[f64]) -> f64 {
        let d = self.x.dim();
        assignments
            .iter()
            .enumerate()
            .map(|(i, &a)| sq_dist(self.x.row(i), &centers[a * d..(a + 1) * d]))
            .sum()
    }

    fn step(&self, centers: &mut [f64], assignments: &mut [usize]) -> f64 {
        self.assign(centers, assignments);
        self.repair_empty(centers, assignments);
        self.update(assignments, centers);
        self.wcss(assignments, centers)
    }

    fn run(&self, init: Vec<f64>) -> LloydResult {
        let n = self.x.n_rows();
        let mut centers = init;
        let mut assignments = vec![0usize; n];
        let mut wcss = self.step(&mut centers, &mut assignments);
        let mut trace = vec![wcss];
        let mut iterations = 1;
        while iterations < self.opts.max_iters {
            let mut next_centers = centers.clone();
            let mut next_assign = assignments.clone();
            let next = self.step(&mut next_centers, &mut next_assign);
            iterations += 1;
            assert!(
                next <= wcss + MONOTONE_SLACK * wcss.max(1.0),
                "Lloyd iteration increased WCSS from {wcss} to {next}"
            );
            trace.push(next);
            let gain = (wcss - next) / wcss.max(f64::MIN_POSITIVE);
            centers = next_centers;
            assignments = next_assign;
            wcss = next;
            if gain < self.opts.rel_tol {
                break;
            }
        }
        LloydResult {
            assignments,
            centers,
            wcss,
            trace,
            iterations,
        }
    }
}

/// K-means++ seeding: the first center is a uniform row, each further center
/// a row drawn with probability proportional to its squared distance to the
/// nearest chosen center. Returns the chosen row indices.
pub fn kmeans_pp_indices(features: &FeatureMatrix, k: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let n = features.n_rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.below(n));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(features.row(i), features.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let next = match rng.weighted_index(&nearest) {
            Some(i) => i,
            // Every row coincides with a chosen center.
            None => (0..n).find(|i| !chosen.contains(i)).unwrap_or(0),
        };
        chosen.push(next);
        for i in 0..n {
            let d = sq_dist(features.row(i), features.row(next));
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }
    chosen
}

fn check_k(features: &FeatureMatrix, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if k > features.n_rows() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the number of rows ({})",
            features.n_rows()
        )));
    }
    Ok(())
}

fn finish(features: &FeatureMatrix, k: usize, seed: u64, r: LloydResult) -> Result<ClusterModel> {
    let silhouette = silhouette_score(features, &r.assignments)?;
    Ok(ClusterModel {
        k,
        assignments: r.assignments,
        centers: r.centers,
        wcss: r.wcss,
        silhouette,
        seed,
        iterations: r.iterations,
        wcss_trace: r.trace,
    })
}

pub fn kmeans(
    features: &FeatureMatrix,
    k: usize,
    seed: u64,
    opts: KMeansOptions,
) -> Result<ClusterModel> {
    check_k(features, k)?;
    let mut rng = SplitMix64::new(seed);
    let init_idx = kmeans_pp_indices(features, k, &mut rng);
    let init: Vec<f64> = init_idx
        .iter()
        .flat_map(|&i| features.row(i).iter().copied())
        .collect();
    let r = Lloyd {
        x: features,
        k,
        opts,
    }
    .run(init);
    finish(features, k, seed, r)
}

/// Runs Lloyd iterations from explicit initial centers (`k x D`).
pub fn kmeans_from_centers(
    features: &FeatureMatrix,
    init: Vec<f64>,
    seed: u64,
    opts: KMeansOptions,
) -> Result<ClusterModel> {
    let d = features.dim();
    if init.is_empty() || !init.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: init.len(),
        });
    }
    let k = init.len() / d;
    check_k(features, k)?;
    let r = Lloyd {
        x: features,
        k,
        opts,
    }
    .run(init);
    finish(features, k, seed, r)
}

/// Mean silhouette over all points, Euclidean distance.
///
/// Singleton clusters contribute `s(i) = 0`, as do points with `a = b = 0`.
pub fn silhouette_score(features: &FeatureMatrix, assignments: &[usize]) -> Result<f64> {
    let n = features.n_rows();
    if assignments.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: assignments.len(),
        });
    }
    let mut label_index = BTreeMap::new();
    for &a in assignments {
        let next = label_index.len();
        label_index.entry(a).or_insert(next);
    }
    let n_clusters = label_index.len();
    if n_clusters < 2 {
        return Err(Error::InvalidInput(
            "silhouette needs at least two clusters".into(),
        ));
    }
    let labels: Vec<usize> = assignments.iter().map(|a| label_index[a]).collect();
    let mut sizes = vec![0usize; n_clusters];
    for &l in &labels {
        sizes[l] += 1;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; n_clusters];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                sums[labels[j]] += dist(features.row(i), features.row(j));
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..n_clusters)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok((total / n as f64).clamp(-1.0, 1.0))
}

// Distances closer than this count as ties when locating the elbow.
const ELBOW_TIE: f64 = 1e-12;

/// Knee of a WCSS curve: the interior candidate farthest from the chord
/// joining the first and last points, with both axes scaled to `[0, 1]`.
/// Ties go to the smaller `k`.
pub fn elbow_k(candidates: &[(usize, f64)]) -> Result<usize> {
    if candidates.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "elbow needs at least 3 candidates, got {}",
            candidates.len()
        )));
    }
    if candidates.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidInput(
            "candidate k values must be strictly increasing".into(),
        ));
    }
    let k_lo = candidates[0].0 as f64;
    let k_span = candidates[candidates.len() - 1].0 as f64 - k_lo;
    let w_min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let w_max = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let w_span = w_max - w_min;
    let scaled: Vec<(f64, f64)> = candidates
        .iter()
        .map(|&(k, w)| {
            let y = if w_span > 0.0 {
                (w - w_min) / w_span
            } else {
                0.0
            };
            ((k as f64 - k_lo) / k_span, y)
        })
        .collect();
    let (x0, y0) = scaled[0];
    let (x1, y1) = scaled[scaled.len() - 1];
    let (dx, dy) = (x1 - x0, y1 - y0);
    let chord = crate::num::sqrt(dx * dx + dy * dy);
    let mut best = candidates[1].0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, &(x, y)) in scaled.iter().enumerate().take(scaled.len() - 1).skip(1) {
        let d = (dy * (x - x0) - dx * (y - y0)).abs() / chord;
        if d > best_d + ELBOW_TIE {
            best_d = d;
            best = candidates[i].0;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KCandidate {
    pub k: usize,
    pub wcss: f64,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub candidates: Vec<KCandidate>,
    pub chosen_k: usize,
    pub elbow_k: Option<usize>,
    pub rule: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChooseKOptions {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub kmeans: KMeansOptions,
}

impl Default for ChooseKOptions {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 10,
            restarts: 8,
            kmeans: KMeansOptions::default(),
        }
    }
}

/// Best-of-restarts K-means for one `k`. Restart `i` uses seed `seed + i`;
/// when `previous` (the kept model for `k - 1`) is given, splitting it at its
/// worst-fit point is tried as one more candidate, which keeps the kept WCSS
/// non-increasing in `k`.
pub fn best_of_restarts(
    features: &FeatureMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    previous: Option<&ClusterModel>,
    opts: KMeansOptions,
) -> Result<ClusterModel> {
    let mut best: Option<ClusterModel> = None;
    let mut consider = |m: ClusterModel| {
        if best.as_ref().is_none_or(|b| m.wcss < b.wcss) {
            best = Some(m);
        }
    };
    for r in 0..restarts.max(1) {
        consider(kmeans(features, k, seed.wrapping_add(r as u64), opts)?);
    }
    if let Some(prev) = previous.filter(|p| p.k + 1 == k) {
        let worst = (0..features.n_rows())
            .map(|i| {
                (
                    i,
                    sq_dist(features.row(i), prev.center(prev.assignments[i])),
                )
            })
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, d)| if d > acc.1 { (i, d) } else { acc },
            );
        let mut init = prev.centers.clone();
        init.extend_from_slice(features.row(worst.0));
        consider(kmeans_from_centers(features, init, prev.seed, opts)?);
    }
    Ok(best.expect("at least one restart"))
}

pub fn choose_k(
    features: &FeatureMatrix,
    seed: u64,
    opts: ChooseKOptions,
) -> Result<(KSelection, ClusterModel)> {
    if opts.k_min < 2 || opts.k_max < opts.k_min {
        return Err(Error::InvalidInput(format!(
            "invalid k range [{}..{}]",
            opts.k_min, opts.k_max
        )));
    }
    if opts.k_max > features.n_rows() {
        return Err(Error::InvalidInput(format!(
            "k range upper bound {} exceeds the number of rows ({})",
            opts.k_max,
            features.n_rows()
        )));
    }
    let mut models: Vec<ClusterModel> = Vec::new();
    for k in opts.k_min..=opts.k_max {
        let m = best_of_restarts(features, k, seed, opts.restarts, models.last(), opts.kmeans)?;
        models.push(m);
    }
    let candidates: Vec<KCandidate> = models
        .iter()
        .map(|m| KCandidate {
            k: m.k,
            wcss: m.wcss,
            silhouette: m.silhouette,
        })
        .collect();
    let mut chosen = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.silhouette > candidates[chosen].silhouette {
            chosen = i;
        }
    }
    let chosen_k = candidates[chosen].k;
    let curve: Vec<(usize, f64)> = candidates.iter().map(|c| (c.k, c.wcss)).collect();
    let elbow = elbow_k(&curve).ok();
    let rule = match elbow {
        Some(e) if e == chosen_k => format!(
            "chosen_k = {chosen_k} by maximum silhouette (ties to smaller k); elbow agrees at k = {e}"
        ),
        Some(e) => format!(
            "chosen_k = {chosen_k} by maximum silhouette (ties to smaller k); elbow suggests k = {e} (advisory, disagrees)"
        ),
        None => format!(
            "chosen_k = {chosen_k} by maximum silhouette (ties to smaller k); elbow unavailable (fewer than 3 candidates)"
        ),
    };
    let model = models.swap_remove(chosen);
    Ok((
        KSelection {
            candidates,
            chosen_k,
            elbow_k: elbow,
            rule,
        },
        model,
    ))
}

/// Members of cluster `c` ordered by distance to its center (then row index),
/// truncated to `count`.
pub fn exemplars(
    features: &FeatureMatrix,
    model: &ClusterModel,
    c: usize,
    count: usize,
) -> Vec<usize> {
    let mut members: Vec<(f64, usize)> = model
        .members(c)
        .into_iter()
        .map(|i| (sq_dist(features.row(i), model.center(c)), i))
        .collect();
    members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    members.into_iter().take(count).map(|(_, i)| i).collect()
}
