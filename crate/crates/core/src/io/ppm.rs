//! Binary PPM (P6) frames, normalized to `[0, 1]` reals on load.

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

/// Read the next whitespace-delimited token, skipping `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    while *pos < bytes.len() {
        let b = bytes[*pos];
        if b == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if *pos > start {
        Some(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    } else {
        None
    }
}

/// Load a P6 image into a 3-channel tensor with intensities in `[0, 1]`.
pub fn read_ppm(path: &Path) -> Result<Tensor> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let mut pos = 0usize;
    let magic = next_token(&bytes, &mut pos)
        .ok_or_else(|| Error::format(path, 1, "missing PPM magic"))?;
    if magic != "P6" {
        return Err(Error::format(path, 1, format!("expected P6, got {magic}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let tok = next_token(&bytes, &mut pos)
            .ok_or_else(|| Error::format(path, 1, "truncated PPM header"))?;
        *d = tok
            .parse()
            .map_err(|_| Error::format(path, 1, format!("bad header token {tok}")))?;
    }
    let (width, height, maxval) = (dims[0], dims[1], dims[2]);
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(path, 1, format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from pixel data.
    pos += 1;
    let need = width * height * 3;
    if bytes.len() < pos + need {
        return Err(Error::format(
            path,
            1,
            format!("pixel data truncated: need {need} bytes"),
        ));
    }
    let raw = &bytes[pos..pos + need];
    let scale = maxval as f32;
    let mut data = vec![0.0f32; need];
    let plane = width * height;
    for (i, px) in raw.chunks_exact(3).enumerate() {
        data[i] = px[0] as f32 / scale;
        data[plane + i] = px[1] as f32 / scale;
        data[2 * plane + i] = px[2] as f32 / scale;
    }
    Tensor::from_vec(3, height, width, data)
}

/// Quantize a 3-channel `[0, 1]` tensor to interleaved RGB bytes.
pub fn tensor_to_rgb_bytes(t: &Tensor) -> Vec<u8> {
    assert_eq!(t.channels(), 3, "RGB export needs 3 channels");
    let plane = t.height() * t.width();
    let mut out = Vec::with_capacity(plane * 3);
    for i in 0..plane {
        for c in 0..3 {
            let v = (t.data()[c * plane + i] * 255.0).round().clamp(0.0, 255.0);
            out.push(v as u8);
        }
    }
    out
}

/// Write interleaved RGB bytes as a maxval-255 P6 file.
pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    if rgb.len() != width * height * 3 {
        return Err(Error::Argument(format!(
            "ppm buffer length {} != {}x{}x3",
            rgb.len(),
            width,
            height
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(format!("P6\n{width} {height}\n255\n").as_bytes())
        .and_then(|_| w.write_all(rgb))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
