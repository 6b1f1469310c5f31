//! Binary PFM images: "PF\n<w> <h>\n-1.0\n", little-endian 32-bit floats,
//! bottom-to-top scanlines, RGB interleaved. Round trips are bit-exact for
//! every finite value including negatives and denormals.

use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PfmError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed pfm: {0}")]
    Malformed(String),
}

/// 32-bit float RGB buffer with row 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    pub data: Vec<[f32; 3]>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        ImageBuffer { width, height, data: vec![[0.0; 3]; (width * height) as usize] }
    }

    pub fn from_f64(width: u32, height: u32, data: &[[f64; 3]]) -> Self {
        ImageBuffer {
            width,
            height,
            data: data.iter().map(|p| [p[0] as f32, p[1] as f32, p[2] as f32]).collect(),
        }
    }
}

pub fn write_pfm(img: &ImageBuffer, path: &Path) -> Result<(), PfmError> {
    let mut out = Vec::with_capacity(64 + img.data.len() * 12);
    write!(out, "PF\n{} {}\n-1.0\n", img.width, img.height)?;
    // bottom-to-top scanlines
    for row in (0..img.height).rev() {
        for col in 0..img.width {
            let p = img.data[(row * img.width + col) as usize];
            for c in p {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<ImageBuffer, PfmError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut token = || -> Result<String, PfmError> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(PfmError::Malformed("unexpected end of header".into()));
        }
        let t = String::from_utf8_lossy(&bytes[start..pos]).into_owned();
        pos += 1; // single whitespace after each token
        Ok(t)
    };
    let magic = token()?;
    if magic != "PF" {
        return Err(PfmError::Malformed(format!("bad magic {magic:?}")));
    }
    let width: u32 = token()?.parse().map_err(|_| PfmError::Malformed("bad width".into()))?;
    let height: u32 = token()?.parse().map_err(|_| PfmError::Malformed("bad height".into()))?;
    let scale: f32 = token()?.parse().map_err(|_| PfmError::Malformed("bad scale".into()))?;
    if scale >= 0.0 {
        return Err(PfmError::Malformed("big-endian pfm not supported".into()));
    }
    let need = (width * height) as usize * 12;
    if bytes.len() < pos + need {
        return Err(PfmError::Malformed("truncated pixel data".into()));
    }
    let mut img = ImageBuffer::new(width, height);
    let mut off = pos;
    for row in (0..height).rev() {
        for col in 0..width {
            let mut p = [0f32; 3];
            for c in &mut p {
                *c = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
                off += 4;
            }
            img.data[(row * width + col) as usize] = p;
        }
    }
    Ok(img)
}
