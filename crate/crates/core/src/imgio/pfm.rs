//! Portable float map, grayscale variant only.
//!
//! Layout: `Pf\n<w> <h>\n<scale>\n` followed by `w·h` float32 samples stored
//! bottom row first. A negative scale means little-endian samples.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::DisparityMap;

pub fn read_pfm(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let bytes = fs::read(path)?;
    decode_pfm(&bytes)
}

pub fn decode_pfm(bytes: &[u8]) -> Result<DisparityMap> {
    let mut pos = 0usize;
    let mut tokens: Vec<&str> = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PFM header".into()));
        }
        let tok = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| Error::Format("non-ASCII PFM header".into()))?;
        tokens.push(tok);
        if tokens.len() == 1 && tok != "Pf" {
            return Err(Error::Format(if tok == "PF" {
                "color PFM cannot be read as a disparity map".into()
            } else {
                format!("bad PFM magic {tok:?}")
            }));
        }
    }
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Format("missing separator after PFM header".into()));
    }
    pos += 1;

    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PFM dimension {s:?}")))
    };
    let width = parse_dim(tokens[1])?;
    let height = parse_dim(tokens[2])?;
    let scale: f64 = tokens[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad PFM scale {:?}", tokens[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Format(format!("bad PFM scale {scale}")));
    }
    let little_endian = scale < 0.0;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("PFM dimensions overflow".into()))?;
    let payload = &bytes[pos..];
    if payload.len() < n * 4 {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            format!("PFM payload has {} bytes, expected {}", payload.len(), n * 4),
        )));
    }

    let mut values = vec![0f32; n];
    for (i, chunk) in payload[..n * 4].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (col, file_row) = (i % width, i / width);
        values[(height - 1 - file_row) * width + col] = v;
    }
    DisparityMap::from_values(width, height, values)
}

/// Writes a little-endian grayscale PFM; invalid pixels are stored as `+inf`.
pub fn write_pfm(map: &DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    f.write_all(&encode_pfm(map))?;
    f.flush()?;
    Ok(())
}

pub fn encode_pfm(map: &DisparityMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&map.raw(x, y).to_le_bytes());
        }
    }
    out
}
