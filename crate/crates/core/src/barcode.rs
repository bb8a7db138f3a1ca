//! Color barcodes: one mean RGB triple per frame, stacked in temporal order.

use alloc::string::String;
use alloc::vec::Vec;

use crate::media::FrameImage;
use crate::{Error, Result};

/// Height of a rendered barcode strip, in pixels.
pub const DEFAULT_RENDER_HEIGHT: usize = 224;
/// Number of resampled time points in a [`BarcodeFeature`].
pub const DEFAULT_FEATURE_LEN: usize = 256;

/// Mean color of one frame, channels as reals in `[0, 255]`.
pub type MeanRgb = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    pub video_id: String,
    pub colors: Vec<MeanRgb>,
}

/// Fixed-length barcode vector: `3 * L` values in `[0, 1]`, interleaved
/// `r, g, b` per resampled time point.
#[derive(Debug, Clone, PartialEq)]
pub struct BarcodeFeature {
    pub video_id: String,
    pub values: Vec<f64>,
}

pub fn frame_mean_rgb(frame: &FrameImage) -> MeanRgb {
    let mut sums = [0u64; 3];
    for px in frame.pixels() {
        for c in 0..3 {
            sums[c] += px[c] as u64;
        }
    }
    let n = frame.pixels().len() as f64;
    [sums[0] as f64 / n, sums[1] as f64 / n, sums[2] as f64 / n]
}

pub fn build_barcode(frames: &[FrameImage], video_id: &str) -> Result<Barcode> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("frame sequence"));
    }
    Ok(Barcode {
        video_id: video_id.into(),
        colors: frames.iter().map(frame_mean_rgb).collect(),
    })
}

impl Barcode {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    /// Mean over all frames of this video.
    pub fn mean_color(&self) -> MeanRgb {
        let mut acc = [0.0; 3];
        for c in &self.colors {
            for ch in 0..3 {
                acc[ch] += c[ch];
            }
        }
        let n = self.colors.len() as f64;
        [acc[0] / n, acc[1] / n, acc[2] / n]
    }

    /// Colors flattened row-major (`n x 3`), for segment matching.
    pub fn flat(&self) -> Vec<f64> {
        self.colors.iter().flat_map(|c| c.iter().copied()).collect()
    }
}

/// Rounds a real channel value half-up and clamps it to a byte.
#[inline]
pub fn quantize_channel(v: f64) -> u8 {
    let r = libm::floor(v + 0.5);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

pub fn quantize(c: &MeanRgb) -> [u8; 3] {
    [
        quantize_channel(c[0]),
        quantize_channel(c[1]),
        quantize_channel(c[2]),
    ]
}

/// Renders the barcode as an image `len` columns wide and `height_px` tall;
/// column `j` is frame `j`'s rounded color.
pub fn render_barcode(barcode: &Barcode, height_px: usize) -> Result<FrameImage> {
    if height_px == 0 {
        return Err(Error::InvalidInput(
            "render height must be at least 1".into(),
        ));
    }
    if barcode.is_empty() {
        return Err(Error::EmptyInput("barcode colors"));
    }
    let row: Vec<[u8; 3]> = barcode.colors.iter().map(quantize).collect();
    let mut pixels = Vec::with_capacity(row.len() * height_px);
    for _ in 0..height_px {
        pixels.extend_from_slice(&row);
    }
    FrameImage::new(row.len(), height_px, pixels)
}

/// Resamples each channel to `len` points by linear interpolation at
/// `t_i = i (n - 1) / (len - 1)` and scales to `[0, 1]`.
pub fn barcode_feature(barcode: &Barcode, len: usize) -> Result<BarcodeFeature> {
    if len < 2 {
        return Err(Error::InvalidInput(alloc::format!(
            "feature length must be at least 2, got {len}"
        )));
    }
    let n = barcode.colors.len();
    if n == 0 {
        return Err(Error::EmptyInput("barcode colors"));
    }
    let mut values = Vec::with_capacity(3 * len);
    for i in 0..len {
        let color = if n == 1 {
            barcode.colors[0]
        } else {
            let t = (i * (n - 1)) as f64 / (len - 1) as f64;
            let lo = (libm::floor(t) as usize).min(n - 1);
            let frac = t - lo as f64;
            if lo + 1 >= n || frac == 0.0 {
                barcode.colors[lo]
            } else {
                let a = barcode.colors[lo];
                let b = barcode.colors[lo + 1];
                [
                    a[0] + frac * (b[0] - a[0]),
                    a[1] + frac * (b[1] - a[1]),
                    a[2] + frac * (b[2] - a[2]),
                ]
            }
        };
        values.extend(color.iter().map(|c| c / 255.0));
    }
    Ok(BarcodeFeature {
        video_id: barcode.video_id.clone(),
        values,
    })
}

/// Swatch color of a cluster: the unweighted mean of each member's own mean
/// color, so long videos do not dominate.
pub fn cluster_avg_color(members: &[&Barcode]) -> Result<MeanRgb> {
    if members.is_empty() {
        return Err(Error::EmptyInput("cluster"));
    }
    let mut acc = [0.0; 3];
    for b in members {
        if b.is_empty() {
            return Err(Error::EmptyInput("barcode colors"));
        }
        let m = b.mean_color();
        for ch in 0..3 {
            acc[ch] += m[ch];
        }
    }
    let k = members.len() as f64;
    Ok([acc[0] / k, acc[1] / k, acc[2] / k])
}
