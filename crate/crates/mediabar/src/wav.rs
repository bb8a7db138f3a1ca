//! RIFF/WAVE, PCM format code 1, 16-bit little-endian, one or two channels.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pcm16 {
    pub channels: u16,
    pub sample_rate: u32,
    /// Interleaved by channel.
    pub samples: Vec<i16>,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

pub fn parse_wav(bytes: &[u8]) -> Result<Pcm16, String> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err("not a RIFF/WAVE file".into());
    }
    let mut fmt: Option<(u16, u32)> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + 16 > bytes.len() {
                    return Err("truncated fmt chunk".into());
                }
                let code = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if code != 1 {
                    return Err(format!("format code {code} is not PCM (1)"));
                }
                if bits != 16 {
                    return Err(format!("{bits}-bit samples; only 16-bit PCM is accepted"));
                }
                if !(1..=2).contains(&channels) {
                    return Err(format!(
                        "{channels} channels; only mono or stereo is accepted"
                    ));
                }
                if rate == 0 {
                    return Err("sample rate is 0".into());
                }
                fmt = Some((channels, rate));
            }
            b"data" => {
                let (channels, sample_rate) = fmt.ok_or("data chunk before fmt chunk")?;
                let available = bytes.len() - body;
                if size > available {
                    return Err(format!(
                        "truncated data chunk: header declares {size} bytes, {available} present"
                    ));
                }
                let frame = 2 * channels as usize;
                if !size.is_multiple_of(frame) {
                    return Err(format!(
                        "truncated data chunk: {size} bytes is not a whole number of {frame}-byte frames"
                    ));
                }
                if size == 0 {
                    return Err("data chunk is empty".into());
                }
                let samples = bytes[body..body + size]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]))
                    .collect();
                return Ok(Pcm16 {
                    channels,
                    sample_rate,
                    samples,
                });
            }
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body + size + (size & 1);
    }
    Err(if fmt.is_none() {
        "missing fmt chunk"
    } else {
        "missing data chunk"
    }
    .into())
}

pub fn encode_wav(pcm: &Pcm16) -> Vec<u8> {
    let data_len = pcm.samples.len() * 2;
    let block_align = pcm.channels as u32 * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&pcm.channels.to_le_bytes());
    out.extend_from_slice(&pcm.sample_rate.to_le_bytes());
    out.extend_from_slice(&(pcm.sample_rate * block_align).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for s in &pcm.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

/// Quantizes `[-1, 1]` samples to 16-bit PCM, rounding to nearest.
pub fn quantize_pcm16(samples: &[f64]) -> Vec<i16> {
    samples
        .iter()
        .map(|&x| (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16)
        .collect()
}
