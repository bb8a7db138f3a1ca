//! Deterministic synthetic corpus with known structure: 12 videos in three
//! color groups, two audio groups and two text themes, plus one planted
//! repurposed pair sharing both frames and audio.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use mediabar_core::rng::SplitMix64;
use mediabar_core::{FrameImage, Rgb};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::formats::canonical_json;
use crate::ppm::encode_ppm;
use crate::wav::{encode_wav, quantize_pcm16, Pcm16};

pub const VIDEOS: usize = 12;
pub const FRAME_SIZE: usize = 32;
pub const SAMPLE_RATE: u32 = 22050;
pub const AUDIO_SECS: usize = 5;
pub const FPS: f64 = 25.0;

const PALETTES: [[f64; 3]; 3] = [
    [200.0, 60.0, 50.0],
    [50.0, 180.0, 70.0],
    [60.0, 70.0, 200.0],
];
/// Half-width of the per-scene color jitter around a group's palette.
const SCENE_JITTER: f64 = 45.0;
const PIXEL_NOISE: i32 = 6;

const THEMES: [&[&str]; 2] = [
    &[
        "navy",
        "vessel",
        "island",
        "reef",
        "patrol",
        "coast",
        "harbor",
        "fleet",
        "maritime",
        "sovereignty",
        "ocean",
        "ship",
        "captain",
        "dispute",
        "territorial",
        "waters",
        "fishing",
        "sailors",
        "lighthouse",
        "anchor",
    ],
    &[
        "recipe",
        "kitchen",
        "garlic",
        "noodle",
        "spice",
        "flavor",
        "simmer",
        "broth",
        "vegetable",
        "dessert",
        "bake",
        "oven",
        "chef",
        "ingredient",
        "sauce",
        "pepper",
        "butter",
        "roast",
        "dumpling",
        "ginger",
    ],
];
/// Shared filler, including stop-words the tokenizer should remove.
const FILLER: &[&str] = &[
    "the", "and", "video", "today", "people", "with", "this", "watch",
];

/// The planted copy: `frames` frames from `source` starting at
/// `source_frame` replace the target's frames from `target_frame`, and
/// `samples` audio samples from `source_sample` replace the target's from
/// `target_sample`. Sample offsets are multiples of the default MFCC hop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    pub source: String,
    pub target: String,
    pub source_frame: usize,
    pub target_frame: usize,
    pub frames: usize,
    pub source_sample: usize,
    pub target_sample: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub manifest: PathBuf,
    pub color_group: BTreeMap<String, usize>,
    pub audio_group: BTreeMap<String, usize>,
    pub text_theme: BTreeMap<String, usize>,
    pub plant: Plant,
}

pub fn video_id(i: usize) -> String {
    format!("v{i:02}")
}

fn jitter(rng: &mut SplitMix64, half: f64) -> f64 {
    (rng.next_f64() * 2.0 - 1.0) * half
}

fn frames_for(i: usize, rng: &mut SplitMix64) -> Vec<FrameImage> {
    let n = 240 + rng.below(51);
    let base = PALETTES[i / 4];
    let mut frames = Vec::with_capacity(n);
    while frames.len() < n {
        let scene: [f64; 3] = core::array::from_fn(|c| base[c] + jitter(rng, SCENE_JITTER));
        let len = 6 + rng.below(15);
        for _ in 0..len.min(n - frames.len()) {
            let pixels: Vec<Rgb> = (0..FRAME_SIZE * FRAME_SIZE)
                .map(|_| {
                    core::array::from_fn(|c| {
                        let noise = rng.below(2 * PIXEL_NOISE as usize + 1) as i32 - PIXEL_NOISE;
                        (scene[c].round() as i32 + noise).clamp(0, 255) as u8
                    })
                })
                .collect();
            frames.push(FrameImage::new(FRAME_SIZE, FRAME_SIZE, pixels).expect("pixel count"));
        }
    }
    frames
}

/// Group 0: low tones with harmonics and pauses. Group 1: noise bursts and
/// high tones. Segments last 0.08 to 0.25 s.
fn audio_for(group: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let sr = SAMPLE_RATE as f64;
    let len = AUDIO_SECS * SAMPLE_RATE as usize;
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let seg = ((0.08 + 0.17 * rng.next_f64()) * sr) as usize;
        let kind = rng.below(3);
        let amp = 0.1 + 0.4 * rng.next_f64();
        let phase = rng.next_f64() * 2.0 * PI;
        let f = match group {
            0 => 150.0 + 550.0 * rng.next_f64(),
            _ => 2000.0 + 3000.0 * rng.next_f64(),
        };
        for n in 0..seg {
            let t = n as f64 / sr;
            let tone = (2.0 * PI * f * t + phase).sin();
            let v = match (group, kind) {
                (0, 0) | (0, 1) => amp * (0.7 * tone + 0.3 * (4.0 * PI * f * t + phase).sin()),
                (0, _) => 0.01 * (rng.next_f64() * 2.0 - 1.0),
                (_, 0) => amp * tone,
                (_, _) => amp * (rng.next_f64() * 2.0 - 1.0),
            };
            out.push(v);
        }
    }
    out.truncate(len);
    out
}

fn words(rng: &mut SplitMix64, theme: usize, n: usize) -> String {
    let vocab = THEMES[theme];
    (0..n)
        .map(|_| {
            if rng.below(4) == 0 {
                FILLER[rng.below(FILLER.len())]
            } else {
                vocab[rng.below(vocab.len())]
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the corpus and `manifest.json` under `dir`. The same seed always
/// produces the same bytes.
pub fn write_fixture(dir: &Path, seed: u64) -> Result<Fixture> {
    let mut rng = SplitMix64::new(seed);
    let mut frames: Vec<Vec<FrameImage>> = Vec::new();
    let mut audio: Vec<Vec<f64>> = Vec::new();
    for i in 0..VIDEOS {
        frames.push(frames_for(i, &mut rng));
        audio.push(audio_for(i % 2, &mut rng));
    }

    // Same audio group, different color groups.
    let hop = 512;
    let plant = Plant {
        source: video_id(1),
        target: video_id(5),
        source_frame: 40,
        target_frame: 150,
        frames: 90,
        source_sample: 20 * hop,
        target_sample: 60 * hop,
        samples: 3 * SAMPLE_RATE as usize,
    };
    let copied: Vec<FrameImage> =
        frames[1][plant.source_frame..plant.source_frame + plant.frames].to_vec();
    frames[5].splice(
        plant.target_frame..plant.target_frame + plant.frames,
        copied,
    );
    let clip: Vec<f64> =
        audio[1][plant.source_sample..plant.source_sample + plant.samples].to_vec();
    audio[5][plant.target_sample..plant.target_sample + plant.samples].copy_from_slice(&clip);

    let mut entries = Vec::new();
    let mut fixture = Fixture {
        manifest: dir.join("manifest.json"),
        color_group: BTreeMap::new(),
        audio_group: BTreeMap::new(),
        text_theme: BTreeMap::new(),
        plant,
    };
    for i in 0..VIDEOS {
        let id = video_id(i);
        let theme = (i / 2) % 2;
        fixture.color_group.insert(id.clone(), i / 4);
        fixture.audio_group.insert(id.clone(), i % 2);
        fixture.text_theme.insert(id.clone(), theme);

        let (frames_path, format) = if i % 2 == 0 {
            let raw: Vec<u8> = frames[i].iter().flat_map(|f| f.to_rgb_bytes()).collect();
            let rel = format!("{id}/frames.rgb");
            write(&dir.join(&rel), &raw)?;
            (rel, "rgb24_raw")
        } else {
            let rel = format!("{id}/frames");
            for (n, f) in frames[i].iter().enumerate() {
                write(&dir.join(&rel).join(format!("{n:04}.ppm")), &encode_ppm(f))?;
            }
            (rel, "ppm_dir")
        };
        let pcm = Pcm16 {
            channels: 1,
            sample_rate: SAMPLE_RATE,
            samples: quantize_pcm16(&audio[i]),
        };
        write(&dir.join(format!("{id}/audio.wav")), &encode_wav(&pcm))?;
        let transcript = words(&mut rng, theme, 120);
        write(
            &dir.join(format!("{id}/transcript.txt")),
            transcript.as_bytes(),
        )?;

        entries.push(json!({
            "id": id,
            "frames": {
                "path": frames_path,
                "format": format,
                "width": FRAME_SIZE,
                "height": FRAME_SIZE,
                "frame_count": frames[i].len(),
                "fps": FPS,
            },
            "audio": {"path": format!("{id}/audio.wav"), "format": "wav_pcm16"},
            "title": words(&mut rng, theme, 4),
            "description": words(&mut rng, theme, 12),
            "transcript_path": format!("{id}/transcript.txt"),
        }));
    }
    let manifest: Value = json!({"corpus_id": format!("synthetic-{seed}"), "videos": entries});
    write(&fixture.manifest, canonical_json(&manifest).as_bytes())?;
    Ok(fixture)
}
