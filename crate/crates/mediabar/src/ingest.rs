//! Corpus manifest and input decoding.
//!
//! Relative paths in a manifest are resolved against the manifest's own
//! directory, so a corpus directory can be moved as a unit.

use std::fs;
use std::path::{Path, PathBuf};

use mediabar_core::{AudioClip, FrameImage};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::{ppm, wav};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    PpmDir,
    Rgb24Raw,
}

impl FrameFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameFormat::PpmDir => "ppm_dir",
            FrameFormat::Rgb24Raw => "rgb24_raw",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSource {
    pub path: PathBuf,
    pub format: FrameFormat,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub fps: f64,
}

/// Always 16-bit PCM WAV.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSource {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoEntry {
    pub id: String,
    pub frames: FrameSource,
    pub audio: AudioSource,
    pub title: String,
    pub description: String,
    pub transcript_path: PathBuf,
    pub embedding_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub corpus_id: String,
    pub videos: Vec<VideoEntry>,
}

impl Manifest {
    pub fn video(&self, id: &str) -> Option<&VideoEntry> {
        self.videos.iter().find(|v| v.id == id)
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(&doc, base)
}

/// Validates a manifest document; relative paths are joined onto `base`.
pub fn parse_manifest(doc: &Value, base: &Path) -> Result<Manifest> {
    let corpus = "<corpus>";
    let top = doc
        .as_object()
        .ok_or_else(|| schema(corpus, "<root>", "expected an object"))?;
    let corpus_id = str_field(top, corpus, "corpus_id")?.to_string();
    let list = top
        .get("videos")
        .ok_or_else(|| schema(corpus, "videos", "missing"))?
        .as_array()
        .ok_or_else(|| schema(corpus, "videos", "expected an array"))?;

    let mut videos: Vec<VideoEntry> = Vec::with_capacity(list.len());
    for (i, v) in list.iter().enumerate() {
        let entry = parse_entry(v, i, base)?;
        if videos.iter().any(|e| e.id == entry.id) {
            return Err(schema(&entry.id, "id", "duplicate video id"));
        }
        videos.push(entry);
    }
    Ok(Manifest { corpus_id, videos })
}

fn parse_entry(v: &Value, index: usize, base: &Path) -> Result<VideoEntry> {
    let placeholder = format!("#{index}");
    let obj = v
        .as_object()
        .ok_or_else(|| schema(&placeholder, "<entry>", "expected an object"))?;
    let id = str_field(obj, &placeholder, "id")?;
    check_id(id)?;

    let frames = obj_field(obj, id, "frames")?;
    let format = match str_field(frames, id, "frames.format")? {
        "ppm_dir" => FrameFormat::PpmDir,
        "rgb24_raw" => FrameFormat::Rgb24Raw,
        other => {
            return Err(schema(
                id,
                "frames.format",
                format!("expected \"ppm_dir\" or \"rgb24_raw\", got {other:?}"),
            ))
        }
    };
    let fps = frames
        .get("fps")
        .ok_or_else(|| schema(id, "frames.fps", "missing"))?
        .as_f64()
        .ok_or_else(|| schema(id, "frames.fps", "expected a number"))?;
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(schema(
            id,
            "frames.fps",
            format!("must be positive, got {fps}"),
        ));
    }
    let frames = FrameSource {
        path: path_field(frames, id, "frames.path", base)?,
        format,
        width: positive_field(frames, id, "frames.width")?,
        height: positive_field(frames, id, "frames.height")?,
        frame_count: positive_field(frames, id, "frames.frame_count")?,
        fps,
    };

    let audio = obj_field(obj, id, "audio")?;
    let audio_format = str_field(audio, id, "audio.format")?;
    if audio_format != "wav_pcm16" {
        return Err(schema(
            id,
            "audio.format",
            format!("expected \"wav_pcm16\", got {audio_format:?}"),
        ));
    }
    let audio = AudioSource {
        path: path_field(audio, id, "audio.path", base)?,
    };

    let embedding_path = match obj.get("embedding_path") {
        None | Some(Value::Null) => None,
        Some(_) => Some(path_field(obj, id, "embedding_path", base)?),
    };
    Ok(VideoEntry {
        id: id.to_string(),
        frames,
        audio,
        title: str_field(obj, id, "title")?.to_string(),
        description: str_field(obj, id, "description")?.to_string(),
        transcript_path: path_field(obj, id, "transcript_path", base)?,
        embedding_path,
    })
}

/// Ids name output files, so they must be usable as a single path component.
fn check_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(schema(id, "id", "must be non-empty"));
    }
    if id == "." || id == ".." || id.chars().any(|c| c == '/' || c == '\\' || c.is_control()) {
        return Err(schema(
            id,
            "id",
            "must be usable as a file name (no path separators or control characters)",
        ));
    }
    Ok(())
}

fn schema(id: &str, field: &'static str, reason: impl Into<String>) -> Error {
    Error::Schema {
        id: id.to_string(),
        field,
        reason: reason.into(),
    }
}

/// Field names are given in dotted form; only the last segment is looked up
/// in `obj`.
fn lookup<'a>(obj: &'a Map<String, Value>, id: &str, field: &'static str) -> Result<&'a Value> {
    let key = field.rsplit('.').next().unwrap_or(field);
    obj.get(key).ok_or_else(|| schema(id, field, "missing"))
}

fn str_field<'a>(obj: &'a Map<String, Value>, id: &str, field: &'static str) -> Result<&'a str> {
    lookup(obj, id, field)?
        .as_str()
        .ok_or_else(|| schema(id, field, "expected a string"))
}

fn obj_field<'a>(
    obj: &'a Map<String, Value>,
    id: &str,
    field: &'static str,
) -> Result<&'a Map<String, Value>> {
    lookup(obj, id, field)?
        .as_object()
        .ok_or_else(|| schema(id, field, "expected an object"))
}

fn positive_field(obj: &Map<String, Value>, id: &str, field: &'static str) -> Result<usize> {
    let v = lookup(obj, id, field)?;
    match v.as_u64() {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(schema(
            id,
            field,
            format!("must be a positive integer, got {v}"),
        )),
    }
}

fn path_field(
    obj: &Map<String, Value>,
    id: &str,
    field: &'static str,
    base: &Path,
) -> Result<PathBuf> {
    let p = str_field(obj, id, field)?;
    if p.is_empty() {
        return Err(schema(id, field, "path must be non-empty"));
    }
    Ok(base.join(p))
}

/// Decodes all `frame_count` frames of a source in temporal order.
pub fn read_frames(source: &FrameSource) -> Result<Vec<FrameImage>> {
    match source.format {
        FrameFormat::Rgb24Raw => read_raw(source),
        FrameFormat::PpmDir => read_ppm_dir(source),
    }
}

fn read_raw(source: &FrameSource) -> Result<Vec<FrameImage>> {
    let bytes = fs::read(&source.path).map_err(|e| Error::io(&source.path, e))?;
    let frame_bytes = source.width * source.height * 3;
    let expected = frame_bytes * source.frame_count;
    if bytes.len() < expected {
        return Err(Error::ShortFile {
            path: source.path.clone(),
            expected,
            found: bytes.len(),
            unit: "bytes",
        });
    }
    if bytes.len() > expected {
        return Err(Error::format(
            &source.path,
            format!(
                "{} bytes beyond the declared {} frames of {}x{}",
                bytes.len() - expected,
                source.frame_count,
                source.width,
                source.height
            ),
        ));
    }
    bytes
        .chunks_exact(frame_bytes)
        .map(|chunk| {
            Ok(FrameImage::from_rgb_bytes(
                source.width,
                source.height,
                chunk,
            )?)
        })
        .collect()
}

/// `.ppm` files of a directory, sorted by file name.
pub fn list_ppm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_file = entry
            .file_type()
            .map_err(|e| Error::io(&path, e))?
            .is_file();
        if is_file && path.extension().is_some_and(|x| x == "ppm") {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn read_ppm_dir(source: &FrameSource) -> Result<Vec<FrameImage>> {
    let files = list_ppm_files(&source.path)?;
    if files.len() != source.frame_count {
        if files.len() < source.frame_count {
            return Err(Error::ShortFile {
                path: source.path.clone(),
                expected: source.frame_count,
                found: files.len(),
                unit: "frame files",
            });
        }
        return Err(Error::format(
            &source.path,
            format!(
                "{} frame files but frame_count is {}",
                files.len(),
                source.frame_count
            ),
        ));
    }
    files
        .iter()
        .map(|f| {
            let bytes = fs::read(f).map_err(|e| Error::io(f, e))?;
            let img = ppm::parse_ppm(&bytes).map_err(|reason| Error::format(f, reason))?;
            if img.width() != source.width || img.height() != source.height {
                return Err(Error::format(
                    f,
                    format!(
                        "frame is {}x{}, manifest declares {}x{}",
                        img.width(),
                        img.height(),
                        source.width,
                        source.height
                    ),
                ));
            }
            Ok(img)
        })
        .collect()
}

pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pcm = wav::parse_wav(&bytes).map_err(|reason| Error::format(path, reason))?;
    let samples = mediabar_core::media::downmix_pcm16(&pcm.samples, pcm.channels as usize);
    Ok(AudioClip::new(samples, pcm.sample_rate)?)
}

/// The transcript verbatim and, when the entry names one, its embedding.
pub fn read_text_sidecars(entry: &VideoEntry) -> Result<(String, Option<Vec<f64>>)> {
    let p = &entry.transcript_path;
    let raw = fs::read(p).map_err(|e| Error::io(p, e))?;
    let transcript = String::from_utf8(raw)
        .map_err(|e| Error::format(p, format!("transcript is not UTF-8: {e}")))?;
    let embedding = match &entry.embedding_path {
        None => None,
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(parse_embedding(&text).map_err(|reason| Error::format(p, reason))?)
        }
    };
    Ok((transcript, embedding))
}

/// One line of comma-separated decimal reals.
pub fn parse_embedding(text: &str) -> Result<Vec<f64>, String> {
    let line = text.trim();
    if line.is_empty() {
        return Err("embedding file is empty".into());
    }
    if line.lines().count() > 1 {
        return Err("embedding must be a single line".into());
    }
    line.split(',')
        .enumerate()
        .map(|(i, field)| {
            let field = field.trim();
            match field.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(format!(
                    "value {i} ({field:?}) is not a finite decimal real"
                )),
            }
        })
        .collect()
}

/// All embeddings in a corpus must share one length.
pub fn check_embedding_lengths<'a, I>(embeddings: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
{
    let mut first: Option<(&str, usize)> = None;
    for (id, v) in embeddings {
        match first {
            None => first = Some((id, v.len())),
            Some((first_id, first_len)) if v.len() != first_len => {
                return Err(Error::EmbeddingLength {
                    first_id: first_id.to_string(),
                    first_len,
                    id: id.to_string(),
                    len: v.len(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}
