//! Binary PGM (P5) reading and writing.
//!
//! The scene directory contract is bit-exact, so the codec is pinned here:
//! header `P5\n<width> <height>\n<maxval>\n`, then raw samples. 8-bit images
//! use maxval 255, depth images use maxval 65535 with big-endian samples.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::raster::{DepthImage, GrayImage};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

fn io_err(path: &Path, source: io::Error) -> PgmError {
    PgmError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> PgmError {
    PgmError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn encode_depth(img: &DepthImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.width, img.height).into_bytes();
    out.reserve(img.data.len() * 2);
    for &d in &img.data {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out
}

pub fn write_gray(path: &Path, img: &GrayImage) -> Result<(), PgmError> {
    fs::write(path, encode_gray(img)).map_err(|e| io_err(path, e))
}

pub fn write_depth(path: &Path, img: &DepthImage) -> Result<(), PgmError> {
    fs::write(path, encode_depth(img)).map_err(|e| io_err(path, e))
}

/// Parses the P5 header, returning `(width, height, maxval, data_offset)`.
fn parse_header(path: &Path, bytes: &[u8]) -> Result<(u32, u32, u32, usize), PgmError> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(format_err(path, "not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // Skip whitespace and comment lines.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(format_err(path, "truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(format_err(path, "malformed header field"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = text
            .parse()
            .map_err(|_| format_err(path, format!("bad header value {text:?}")))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(format_err(path, "missing raster separator")),
    }
    Ok((fields[0], fields[1], fields[2], pos))
}

pub fn read_gray(path: &Path) -> Result<GrayImage, PgmError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let (w, h, maxval, offset) = parse_header(path, &bytes)?;
    if maxval != 255 {
        return Err(format_err(
            path,
            format!("expected maxval 255, got {maxval}"),
        ));
    }
    let expected = (w as usize) * (h as usize);
    let data = &bytes[offset..];
    if data.len() != expected {
        return Err(format_err(
            path,
            format!("raster size {} != {}x{}", data.len(), w, h),
        ));
    }
    Ok(GrayImage {
        width: w,
        height: h,
        data: data.to_vec(),
    })
}

pub fn read_depth(path: &Path) -> Result<DepthImage, PgmError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let (w, h, maxval, offset) = parse_header(path, &bytes)?;
    if maxval != 65535 {
        return Err(format_err(
            path,
            format!("expected maxval 65535, got {maxval}"),
        ));
    }
    let expected = (w as usize) * (h as usize) * 2;
    let raw = &bytes[offset..];
    if raw.len() != expected {
        return Err(format_err(
            path,
            format!("raster size {} != 2*{}x{}", raw.len(), w, h),
        ));
    }
    let data = raw
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok(DepthImage {
        width: w,
        height: h,
        data,
    })
}
