//! Dense per-pixel maps and the softmax/argmax primitives.
//!
//! All score maps are stored row-major with the channel index fastest, so the
//! scores of pixel `(row, col)` occupy `values[(row * width + col) * channels..][..channels]`.
//! Channel `c` always corresponds to category index `c` of the [`CategoryTable`].

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Maximum deviation of a probability pixel's channel sum from 1.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// Largest category count representable in an 8-bit label map.
pub const MAX_CATEGORIES: usize = 256;

/// Height, width and channel count of a map. Label maps and masks use `channels == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Shape {
    pub const fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
        }
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn len(&self) -> usize {
        self.pixels() * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_scores(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidShape(format!(
                "{self}: height and width must be at least 1"
            )));
        }
        if self.channels < 2 {
            return Err(Error::InvalidShape(format!(
                "{self}: at least 2 channels are required"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

/// Anything that has a fixed per-frame shape.
pub trait Frame {
    fn shape(&self) -> Shape;
}

/// Read access shared by every H×W×C score tensor.
pub trait ScoreTensor {
    fn shape(&self) -> Shape;
    fn values(&self) -> &[f32];

    fn pixel(&self, row: usize, col: usize) -> &[f32] {
        let s = ScoreTensor::shape(self);
        let start = (row * s.width + col) * s.channels;
        &self.values()[start..start + s.channels]
    }
}

fn check_len(shape: Shape, len: usize) -> Result<()> {
    if shape.len() != len {
        return Err(Error::InvalidShape(format!(
            "{shape} requires {} values, got {len}",
            shape.len()
        )));
    }
    Ok(())
}

fn position(shape: Shape, flat: usize) -> (usize, usize, usize) {
    let pixel = flat / shape.channels;
    (
        pixel / shape.width,
        pixel % shape.width,
        flat % shape.channels,
    )
}

/// Raw per-pixel class scores as exported by a segmentation network.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMap {
    shape: Shape,
    values: Vec<f32>,
}

impl LogitMap {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f32>) -> Result<Self> {
        let shape = Shape::new(height, width, channels);
        shape.check_scores()?;
        check_len(shape, values.len())?;
        if let Some(flat) = values.iter().position(|v| !v.is_finite()) {
            let (row, col, channel) = position(shape, flat);
            return Err(Error::NonFinite { row, col, channel });
        }
        Ok(Self { shape, values })
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}

impl ScoreTensor for LogitMap {
    fn shape(&self) -> Shape {
        self.shape
    }
    fn values(&self) -> &[f32] {
        &self.values
    }
}

impl Frame for LogitMap {
    fn shape(&self) -> Shape {
        self.shape
    }
}

/// Softmax-normalized scores: every value in `[0, 1]`, every pixel summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    shape: Shape,
    values: Vec<f32>,
}

impl ProbMap {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f32>) -> Result<Self> {
        let shape = Shape::new(height, width, channels);
        shape.check_scores()?;
        check_len(shape, values.len())?;
        for (p, pixel) in values.chunks_exact(channels).enumerate() {
            let (row, col) = (p / width, p % width);
            if let Some(v) = pixel.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidProbability {
                    row,
                    col,
                    reason: format!("value {v} outside [0, 1]"),
                });
            }
            let sum: f64 = pixel.iter().map(|&v| f64::from(v)).sum();
            if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                return Err(Error::InvalidProbability {
                    row,
                    col,
                    reason: format!("channel sum {sum} is not 1"),
                });
            }
        }
        Ok(Self { shape, values })
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}

impl ScoreTensor for ProbMap {
    fn shape(&self) -> Shape {
        self.shape
    }
    fn values(&self) -> &[f32] {
        &self.values
    }
}

impl Frame for ProbMap {
    fn shape(&self) -> Shape {
        self.shape
    }
}

/// One category index per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape(format!(
                "{height}x{width} label map: height and width must be at least 1"
            )));
        }
        check_len(Shape::new(height, width, 1), labels.len())?;
        Ok(Self {
            height,
            width,
            labels,
        })
    }

    pub fn filled(height: usize, width: usize, label: u8) -> Result<Self> {
        Self::new(height, width, vec![label; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, label: u8) {
        self.labels[row * self.width + col] = label;
    }

    pub fn count(&self, category: u8) -> usize {
        self.labels.iter().filter(|&&l| l == category).count()
    }

    /// Checks every label against the category count.
    pub fn check_categories(&self, categories: &CategoryTable) -> Result<()> {
        let n = categories.len();
        match self.labels.iter().position(|&l| usize::from(l) >= n) {
            Some(i) => Err(Error::LabelOutOfRange {
                row: i / self.width,
                col: i % self.width,
                label: self.labels[i],
                categories: n,
            }),
            None => Ok(()),
        }
    }

    pub fn into_labels(self) -> Vec<u8> {
        self.labels
    }
}

impl Frame for LabelMap {
    fn shape(&self) -> Shape {
        Shape::new(self.height, self.width, 1)
    }
}

/// Per-pixel ground-truth membership for a single object or category.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape(format!(
                "{height}x{width} mask: height and width must be at least 1"
            )));
        }
        check_len(Shape::new(height, width, 1), bits.len())?;
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn from_labels(labels: &LabelMap, category: u8) -> Self {
        Self {
            height: labels.height,
            width: labels.width,
            bits: labels.labels.iter().map(|&l| l == category).collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl Frame for BinaryMask {
    fn shape(&self) -> Shape {
        Shape::new(self.height, self.width, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub index: usize,
    pub name: String,
    pub is_target: bool,
}

impl Category {
    pub fn new(index: usize, name: impl Into<String>, is_target: bool) -> Self {
        Self {
            index,
            name: name.into(),
            is_target,
        }
    }
}

/// The category set of a model, in tie-priority order.
///
/// Indices must be exactly `0..len()` in some order; the position of an entry in
/// the list is its tie priority (earlier wins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryTable {
    entries: Vec<Category>,
    // category index -> position in `entries`
    priority: Vec<usize>,
}

impl CategoryTable {
    pub fn new(entries: Vec<Category>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidCategories(
                "at least one category is required".into(),
            ));
        }
        if entries.len() > MAX_CATEGORIES {
            return Err(Error::InvalidCategories(format!(
                "{} categories exceed the 8-bit label limit of {MAX_CATEGORIES}",
                entries.len()
            )));
        }
        let mut priority = vec![usize::MAX; entries.len()];
        let mut names = HashSet::new();
        for (pos, entry) in entries.iter().enumerate() {
            if entry.index >= entries.len() || priority[entry.index] != usize::MAX {
                return Err(Error::InvalidCategories(format!(
                    "indices must be unique and contiguous from 0; offending index {}",
                    entry.index
                )));
            }
            if entry.name.is_empty() || entry.name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidCategories(format!(
                    "category {} has an empty or whitespace-containing name",
                    entry.index
                )));
            }
            if !names.insert(entry.name.as_str()) {
                return Err(Error::InvalidCategories(format!(
                    "duplicate category name `{}`",
                    entry.name
                )));
            }
            priority[entry.index] = pos;
        }
        Ok(Self { entries, priority })
    }

    /// Categories named `class_0..class_{n-1}`, none targeted.
    pub fn anonymous(count: usize) -> Result<Self> {
        Self::new(
            (0..count)
                .map(|i| Category::new(i, format!("class_{i}"), false))
                .collect(),
        )
    }

    /// The 19 Cityscapes training categories with person, rider, car and bicycle targeted.
    pub fn cityscapes() -> Self {
        const NAMES: [&str; 19] = [
            "road",
            "sidewalk",
            "building",
            "wall",
            "fence",
            "pole",
            "traffic_light",
            "traffic_sign",
            "vegetation",
            "terrain",
            "sky",
            "person",
            "rider",
            "car",
            "truck",
            "bus",
            "train",
            "motorcycle",
            "bicycle",
        ];
        const TARGETS: [&str; 4] = ["person", "rider", "car", "bicycle"];
        Self::new(
            NAMES
                .iter()
                .enumerate()
                .map(|(i, n)| Category::new(i, *n, TARGETS.contains(n)))
                .collect(),
        )
        .expect("static table is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Category] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&Category> {
        self.priority.get(index).map(|&pos| &self.entries[pos])
    }

    /// Position of a category in the tie-priority order; lower wins.
    pub fn priority(&self, index: usize) -> usize {
        self.priority[index]
    }

    /// Resolves a category by name, falling back to a decimal index.
    pub fn resolve(&self, key: &str) -> Result<usize> {
        if let Some(c) = self.entries.iter().find(|c| c.name == key) {
            return Ok(c.index);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.len() => Ok(i),
            Ok(i) => Err(Error::CategoryOutOfRange {
                category: i,
                categories: self.len(),
            }),
            Err(_) => Err(Error::UnknownCategory(key.to_string())),
        }
    }

    /// Target flags indexed by category index.
    pub fn target_flags(&self) -> Vec<bool> {
        (0..self.len())
            .map(|i| self.entries[self.priority[i]].is_target)
            .collect()
    }

    /// Returns a copy with exactly the given categories flagged as targets.
    pub fn with_targets(&self, targets: &[usize]) -> Result<Self> {
        let mut entries = self.entries.clone();
        for t in targets {
            if *t >= self.len() {
                return Err(Error::CategoryOutOfRange {
                    category: *t,
                    categories: self.len(),
                });
            }
        }
        for e in &mut entries {
            e.is_target = targets.contains(&e.index);
        }
        Self::new(entries)
    }
}

/// Per-pixel softmax over the channel axis.
///
/// Uses per-pixel max subtraction; exponentials and the normalizing sum are
/// evaluated in `f64` and the result rounded to `f32`.
pub fn softmax_pixelwise(logits: &LogitMap) -> ProbMap {
    let shape = logits.shape;
    let c = shape.channels;
    let mut out = vec![0.0f32; shape.len()];
    out.par_chunks_mut(c)
        .zip(logits.values.par_chunks(c))
        .for_each(|(dst, src)| softmax_into(src, dst));
    ProbMap { shape, values: out }
}

fn softmax_into(src: &[f32], dst: &mut [f32]) {
    let max = f64::from(src.iter().copied().fold(f32::NEG_INFINITY, f32::max));
    let sum: f64 = src.iter().map(|&x| (f64::from(x) - max).exp()).sum();
    for (d, &x) in dst.iter_mut().zip(src) {
        *d = ((f64::from(x) - max).exp() / sum) as f32;
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Reduces a score tensor to a label map, one category per pixel.
pub fn argmax_labels<S: ScoreTensor + ?Sized>(
    scores: &S,
    categories: &CategoryTable,
) -> Result<LabelMap> {
    let shape = scores.shape();
    if shape.channels != categories.len() {
        return Err(Error::ChannelMismatch {
            channels: shape.channels,
            categories: categories.len(),
        });
    }
    let labels = scores
        .values()
        .par_chunks(shape.channels)
        .map(|px| argmax(px) as u8)
        .collect();
    Ok(LabelMap {
        height: shape.height,
        width: shape.width,
        labels,
    })
}
