//! Binary PGM (P5, maxval 255) for label maps and masks.
//!
//! Label maps store the category index as the pixel value. Masks store 255 for
//! object pixels and 0 elsewhere; on read any non-zero value counts as object.

use std::fs;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::tensor::{BinaryMask, CategoryTable, LabelMap};

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Parses a P5 image, returning `(width, height, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), FormatError> {
    if bytes.len() < 2 {
        return Err(FormatError::PgmHeader("file too short".into()));
    }
    match &bytes[..2] {
        b"P5" => {}
        [b'P', d] if d.is_ascii_digit() => {
            return Err(FormatError::UnsupportedPnm(
                String::from_utf8_lossy(&bytes[..2]).into_owned(),
            ))
        }
        _ => {
            return Err(FormatError::BadMagic {
                expected: "P5".into(),
                found: String::from_utf8_lossy(&bytes[..2]).into_owned(),
            })
        }
    }

    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // whitespace and comments between header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(FormatError::PgmHeader(format!(
                "expected a number at byte {start}"
            )));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| FormatError::PgmHeader("header number too large".into()))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(FormatError::PgmHeader(
            "missing whitespace after maxval".into(),
        ));
    }
    pos += 1;

    let [width, height, maxval] = fields.map(|v| v as usize);
    if maxval != 255 {
        return Err(FormatError::BadMaxval(maxval as u32));
    }
    if width == 0 || height == 0 {
        return Err(FormatError::PgmHeader(format!(
            "empty image {width}x{height}"
        )));
    }
    let expected = width.checked_mul(height).ok_or(FormatError::DimOverflow {
        height: height as u32,
        width: width as u32,
        channels: 1,
    })?;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(FormatError::Truncated {
            expected: (pos + expected) as u64,
            actual: bytes.len() as u64,
        });
    }
    if raster.len() > expected {
        return Err(FormatError::TrailingBytes((raster.len() - expected) as u64));
    }
    Ok((width, height, raster.to_vec()))
}

pub fn write_labelmap(path: impl AsRef<Path>, map: &LabelMap) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(map.width(), map.height(), map.labels()))
        .map_err(|e| Error::io(path, e))
}

/// Reads a label map; with a category table every label is range-checked.
pub fn read_labelmap(
    path: impl AsRef<Path>,
    categories: Option<&CategoryTable>,
) -> Result<LabelMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let load = || -> Result<LabelMap> {
        let (w, h, px) = decode_pgm(&bytes)?;
        let map = LabelMap::new(h, w, px)?;
        if let Some(c) = categories {
            map.check_categories(c)?;
        }
        Ok(map)
    };
    load().map_err(|e| e.in_file(path))
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let px: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    fs::write(path, encode_pgm(mask.width(), mask.height(), &px)).map_err(|e| Error::io(path, e))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let load = || -> Result<BinaryMask> {
        let (w, h, px) = decode_pgm(&bytes)?;
        BinaryMask::new(h, w, px.into_iter().map(|v| v != 0).collect())
    };
    load().map_err(|e| e.in_file(path))
}

/// Reads just the dimensions `(width, height)` of a PGM file.
pub fn read_pgm_dims(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, _) = decode_pgm(&bytes).map_err(|e| Error::from(e).in_file(path))?;
    Ok((w, h))
}
