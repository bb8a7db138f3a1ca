//! Binary P6 PPM with maxval 255.

use mediabar_core::FrameImage;

pub fn encode_ppm(img: &FrameImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(&img.to_rgb_bytes());
    out
}

/// Header is `P6`, width, height and maxval separated by whitespace, then
/// exactly one whitespace byte before the payload. Comments are not accepted.
pub fn parse_ppm(bytes: &[u8]) -> Result<FrameImage, String> {
    if !bytes.starts_with(b"P6") {
        return Err("not a binary P6 PPM".into());
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (n, slot) in fields.iter_mut().enumerate() {
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos == start {
            return Err("malformed PPM header".into());
        }
        let digits = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == digits {
            return Err("malformed PPM header".into());
        }
        let text = std::str::from_utf8(&bytes[digits..pos]).unwrap_or_default();
        *slot = text
            .parse()
            .map_err(|_| format!("PPM header field {n} out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("malformed PPM header".into()),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!("PPM maxval is {maxval}, only 255 is accepted"));
    }
    if width == 0 || height == 0 {
        return Err("PPM has a zero dimension".into());
    }
    let need = width * height * 3;
    let payload = &bytes[pos..];
    if payload.len() < need {
        return Err(format!(
            "PPM payload has {} bytes, {width}x{height} needs {need}",
            payload.len()
        ));
    }
    FrameImage::from_rgb_bytes(width, height, &payload[..need]).map_err(|e| e.to_string())
}
