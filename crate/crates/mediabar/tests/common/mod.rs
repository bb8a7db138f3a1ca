//! Small on-disk corpora and a handle on the built binary.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mediabar::ppm::encode_ppm;
use mediabar::wav::{encode_wav, quantize_pcm16, Pcm16};
use mediabar_core::rng::SplitMix64;
use mediabar_core::FrameImage;
use serde_json::{json, Value};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn mediabar<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_mediabar"))
        .args(args)
        .output()
        .expect("spawn mediabar");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// `cmd --manifest M --out O --seed S` plus `extra`.
pub fn run_cmd(cmd: &str, manifest: &Path, out: &Path, seed: u64, extra: &[&str]) -> Run {
    let mut args: Vec<String> = vec![
        cmd.into(),
        "--manifest".into(),
        manifest.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--seed".into(),
        seed.to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    mediabar(&args)
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
        .unwrap()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Store {
    Raw,
    PpmDir,
}

pub struct Video {
    pub id: String,
    pub frames: Vec<FrameImage>,
    pub store: Store,
    pub audio: Option<Vec<f64>>,
    pub sample_rate: u32,
    pub transcript: String,
}

/// A video whose frames are noisy scenes around `base` and whose audio is a
/// tone at `freq` with a slow tremolo.
pub fn video(id: &str, base: [u8; 3], freq: f64, words: &str, seed: u64) -> Video {
    let mut rng = SplitMix64::new(seed);
    let n = 40 + rng.below(10);
    let frames = (0..n)
        .map(|_| {
            let pixels = (0..64)
                .map(|_| core::array::from_fn(|c| base[c].saturating_add(rng.below(20) as u8)))
                .collect();
            FrameImage::new(8, 8, pixels).unwrap()
        })
        .collect();
    let sr = 22050u32;
    let audio = (0..sr as usize * 3)
        .map(|i| {
            let t = i as f64 / sr as f64;
            0.4 * (1.0 + 0.5 * (2.0 * PI * 1.5 * t).sin()) / 1.5 * (2.0 * PI * freq * t).sin()
                + 0.02 * (rng.next_f64() - 0.5)
        })
        .collect();
    Video {
        id: id.into(),
        frames,
        store: if seed.is_multiple_of(2) {
            Store::Raw
        } else {
            Store::PpmDir
        },
        audio: Some(audio),
        sample_rate: sr,
        transcript: words.into(),
    }
}

/// Four videos, two visual/audio/text groups.
pub fn four_videos() -> Vec<Video> {
    vec![
        video(
            "red1",
            [200, 30, 30],
            220.0,
            "harbor vessel anchor ocean fleet harbor",
            1,
        ),
        video(
            "red2",
            [205, 35, 25],
            230.0,
            "vessel harbor ocean captain anchor fleet",
            2,
        ),
        video(
            "blue1",
            [30, 40, 210],
            3000.0,
            "garlic kitchen recipe oven sauce garlic",
            3,
        ),
        video(
            "blue2",
            [25, 45, 200],
            3100.0,
            "recipe garlic sauce kitchen butter oven",
            4,
        ),
    ]
}

/// Writes every video's inputs under `dir` and returns the manifest path.
/// A video with `audio: None` still gets a manifest entry pointing at a
/// file that does not exist.
pub fn write_corpus(dir: &Path, videos: &[Video]) -> PathBuf {
    let mut entries = Vec::new();
    for v in videos {
        let vdir = dir.join(&v.id);
        fs::create_dir_all(&vdir).unwrap();
        let (w, h) = (v.frames[0].width(), v.frames[0].height());
        let (path, format) = match v.store {
            Store::Raw => {
                let raw: Vec<u8> = v.frames.iter().flat_map(|f| f.to_rgb_bytes()).collect();
                fs::write(vdir.join("frames.rgb"), raw).unwrap();
                (format!("{}/frames.rgb", v.id), "rgb24_raw")
            }
            Store::PpmDir => {
                fs::create_dir_all(vdir.join("frames")).unwrap();
                for (i, f) in v.frames.iter().enumerate() {
                    fs::write(
                        vdir.join("frames").join(format!("{i:03}.ppm")),
                        encode_ppm(f),
                    )
                    .unwrap();
                }
                (format!("{}/frames", v.id), "ppm_dir")
            }
        };
        if let Some(samples) = &v.audio {
            let pcm = Pcm16 {
                channels: 1,
                sample_rate: v.sample_rate,
                samples: quantize_pcm16(samples),
            };
            fs::write(vdir.join("audio.wav"), encode_wav(&pcm)).unwrap();
        }
        fs::write(vdir.join("transcript.txt"), &v.transcript).unwrap();
        entries.push(json!({
            "id": v.id,
            "frames": {"path": path, "format": format, "width": w, "height": h,
                       "frame_count": v.frames.len(), "fps": 25.0},
            "audio": {"path": format!("{}/audio.wav", v.id), "format": "wav_pcm16"},
            "title": format!("{} video", v.id),
            "description": "",
            "transcript_path": format!("{}/transcript.txt", v.id),
        }));
    }
    let manifest = dir.join("manifest.json");
    let doc = json!({"corpus_id": "test", "videos": entries});
    fs::write(&manifest, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    manifest
}

pub fn files_under(dir: &Path) -> Vec<String> {
    mediabar::pipeline::list_tree(dir).unwrap()
}
