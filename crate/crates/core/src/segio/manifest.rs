//! Sequence manifest: category table plus ordered frame list.
//!
//! ```text
//! # comment
//! category 0 background 0
//! category 1 object 1
//! frame frame_00000.sgt mask_00000.pgm
//! frame frame_00001.sgt
//! ```
//!
//! The last field of a `category` line is the target flag. Relative paths are
//! resolved against the manifest's own directory. Paths may not contain
//! whitespace.

use std::fs;
use std::path::{Path, PathBuf};

use super::pgm::read_pgm_dims;
use super::tensor_file::read_tensor_header;
use crate::error::{Error, FormatError, Result};
use crate::tensor::{Category, CategoryTable, Shape};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestFrame {
    pub tensor: PathBuf,
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub categories: CategoryTable,
    pub frames: Vec<ManifestFrame>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

fn fail(line: usize, reason: impl Into<String>) -> Error {
    FormatError::Manifest {
        line,
        reason: reason.into(),
    }
    .into()
}

fn path_field(p: &Path) -> Result<String> {
    let s = p
        .to_str()
        .ok_or_else(|| Error::InvalidShape(format!("non UTF-8 path {}", p.display())))?;
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(FormatError::Manifest {
            line: 0,
            reason: format!("path `{s}` is empty or contains whitespace"),
        }
        .into());
    }
    Ok(s.to_string())
}

impl SequenceManifest {
    pub fn new(
        categories: CategoryTable,
        frames: Vec<ManifestFrame>,
        base_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            categories,
            frames,
            base_dir: base_dir.into(),
        }
    }

    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut categories = Vec::new();
        let mut frames = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields.as_slice() {
                [] => {}
                ["category", idx, name, flag] => {
                    if !frames.is_empty() {
                        return Err(fail(line, "category line after the first frame line"));
                    }
                    let index = idx
                        .parse()
                        .map_err(|_| fail(line, format!("bad category index `{idx}`")))?;
                    let is_target = match *flag {
                        "0" => false,
                        "1" => true,
                        _ => {
                            return Err(fail(
                                line,
                                format!("target flag must be 0 or 1, got `{flag}`"),
                            ))
                        }
                    };
                    categories.push(Category::new(index, *name, is_target));
                }
                ["frame", tensor] => frames.push(ManifestFrame {
                    tensor: tensor.into(),
                    mask: None,
                }),
                ["frame", tensor, mask] => frames.push(ManifestFrame {
                    tensor: tensor.into(),
                    mask: Some(mask.into()),
                }),
                [kw, ..] => {
                    return Err(fail(line, format!("malformed `{kw}` line")));
                }
            }
        }
        if categories.is_empty() {
            return Err(fail(0, "no category lines"));
        }
        if frames.is_empty() {
            return Err(fail(0, "no frame lines"));
        }
        Ok(Self {
            categories: CategoryTable::new(categories)?,
            frames,
            base_dir: base_dir.into(),
        })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        for c in self.categories.entries() {
            out.push_str(&format!(
                "category {} {} {}\n",
                c.index,
                c.name,
                u8::from(c.is_target)
            ));
        }
        for f in &self.frames {
            out.push_str("frame ");
            out.push_str(&path_field(&f.tensor)?);
            if let Some(m) = &f.mask {
                out.push(' ');
                out.push_str(&path_field(m)?);
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| e.in_file(path))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()?).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn tensor_paths(&self) -> Vec<PathBuf> {
        self.frames
            .iter()
            .map(|f| self.resolve(&f.tensor))
            .collect()
    }

    /// Mask paths if every frame has one, `None` if no frame does.
    pub fn mask_paths(&self) -> Result<Option<Vec<PathBuf>>> {
        let with = self.frames.iter().filter(|f| f.mask.is_some()).count();
        if with == 0 {
            return Ok(None);
        }
        if with != self.frames.len() {
            return Err(Error::LengthMismatch {
                predictions: self.frames.len(),
                truths: with,
            });
        }
        Ok(Some(
            self.frames
                .iter()
                .map(|f| self.resolve(f.mask.as_ref().unwrap()))
                .collect(),
        ))
    }

    /// Checks that every referenced file exists and all share one shape.
    ///
    /// Only headers are read. Returns the common tensor shape.
    pub fn verify(&self) -> Result<Shape> {
        let mut shape: Option<Shape> = None;
        for (frame, f) in self.frames.iter().enumerate() {
            let actual = read_tensor_header(self.resolve(&f.tensor))?.shape();
            match shape {
                Some(expected) if expected != actual => {
                    return Err(Error::ShapeDrift {
                        frame,
                        expected,
                        actual,
                    })
                }
                Some(_) => {}
                None => shape = Some(actual),
            }
        }
        let shape = shape.expect("parse guarantees at least one frame");
        if shape.channels != self.categories.len() {
            return Err(Error::ChannelMismatch {
                channels: shape.channels,
                categories: self.categories.len(),
            });
        }
        if let Some(masks) = self.mask_paths()? {
            for (frame, m) in masks.iter().enumerate() {
                let (w, h) = read_pgm_dims(m)?;
                let actual = Shape::new(h, w, 1);
                let expected = Shape::new(shape.height, shape.width, 1);
                if actual != expected {
                    return Err(Error::ShapeDrift {
                        frame,
                        expected,
                        actual,
                    });
                }
            }
        }
        Ok(shape)
    }
}
