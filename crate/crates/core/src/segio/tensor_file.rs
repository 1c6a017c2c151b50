//! `SGT1` score-tensor container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SGT1"
//! 4       1     kind: 0 = logits, 1 = probabilities
//! 5       4     height   (u32 LE)
//! 9       4     width    (u32 LE)
//! 13      4     channels (u32 LE)
//! 17      4·HWC payload: f32 LE, row-major, channel fastest
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::fusion::{ScoreFrame, ScoreKind};
use crate::tensor::{LogitMap, ProbMap, ScoreTensor, Shape};

pub const TENSOR_MAGIC: &[u8; 4] = b"SGT1";
pub const TENSOR_HEADER_LEN: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorFileHeader {
    pub kind: ScoreKind,
    pub height: u32,
    pub width: u32,
    pub channels: u32,
}

impl TensorFileHeader {
    pub fn shape(&self) -> Shape {
        Shape::new(
            self.height as usize,
            self.width as usize,
            self.channels as usize,
        )
    }

    /// Payload length in bytes, if addressable.
    pub fn payload_len(&self) -> Result<usize, FormatError> {
        let overflow = FormatError::DimOverflow {
            height: self.height,
            width: self.width,
            channels: self.channels,
        };
        u64::from(self.height)
            .checked_mul(u64::from(self.width))
            .and_then(|v| v.checked_mul(u64::from(self.channels)))
            .and_then(|v| v.checked_mul(4))
            .and_then(|v| usize::try_from(v).ok())
            .ok_or(overflow)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() >= 4 && &bytes[..4] != TENSOR_MAGIC {
            return Err(FormatError::BadMagic {
                expected: "SGT1".into(),
                found: String::from_utf8_lossy(&bytes[..4]).into_owned(),
            });
        }
        if bytes.len() < TENSOR_HEADER_LEN {
            return Err(FormatError::Truncated {
                expected: TENSOR_HEADER_LEN as u64,
                actual: bytes.len() as u64,
            });
        }
        let kind = match bytes[4] {
            0 => ScoreKind::Logits,
            1 => ScoreKind::Probabilities,
            k => return Err(FormatError::UnknownKind(k)),
        };
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        Ok(Self {
            kind,
            height: u32_at(5),
            width: u32_at(9),
            channels: u32_at(13),
        })
    }
}

fn dim(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidShape(format!("dimension {v} exceeds u32")))
}

pub fn encode_tensor(frame: &ScoreFrame) -> Result<Vec<u8>> {
    let (kind, shape, values) = match frame {
        ScoreFrame::Logits(l) => (0u8, l.shape(), l.values()),
        ScoreFrame::Probabilities(p) => (1u8, p.shape(), p.values()),
    };
    let mut out = Vec::with_capacity(TENSOR_HEADER_LEN + values.len() * 4);
    out.extend_from_slice(TENSOR_MAGIC);
    out.push(kind);
    for d in [shape.height, shape.width, shape.channels] {
        out.extend_from_slice(&dim(d)?.to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<ScoreFrame> {
    let header = TensorFileHeader::parse(bytes)?;
    let payload_len = header.payload_len()?;
    let payload = &bytes[TENSOR_HEADER_LEN..];
    if payload.len() < payload_len {
        return Err(FormatError::Truncated {
            expected: (TENSOR_HEADER_LEN + payload_len) as u64,
            actual: bytes.len() as u64,
        }
        .into());
    }
    if payload.len() > payload_len {
        return Err(FormatError::TrailingBytes((payload.len() - payload_len) as u64).into());
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let s = header.shape();
    Ok(match header.kind {
        ScoreKind::Logits => LogitMap::new(s.height, s.width, s.channels, values)?.into(),
        ScoreKind::Probabilities => ProbMap::new(s.height, s.width, s.channels, values)?.into(),
    })
}

pub fn write_tensor(path: impl AsRef<Path>, frame: &ScoreFrame) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_tensor(frame).map_err(|e| e.in_file(path))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<ScoreFrame> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes).map_err(|e| e.in_file(path))
}

/// Reads only the fixed-size header.
pub fn read_tensor_header(path: impl AsRef<Path>) -> Result<TensorFileHeader> {
    use std::io::Read;
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(TENSOR_HEADER_LEN);
    fs::File::open(path)
        .and_then(|f| f.take(TENSOR_HEADER_LEN as u64).read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    TensorFileHeader::parse(&buf).map_err(|e| Error::from(e).in_file(path))
}
