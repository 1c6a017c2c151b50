//! Temporal fusion of a short history of frames.
//!
//! Two strategies are provided on top of a [`FrameBuffer`] holding the most
//! recent frames, newest first:
//!
//! * [`fuse_image_buffer`] overlays the target labels of past label maps onto
//!   the present one.
//! * [`fuse_attention`] sums the target-channel probabilities of past frames with
//!   per-age weights, zeroes sums below a threshold, and takes the argmax.
//!
//! [`Pipeline`] drives either strategy (or the per-frame baseline) over a stream.

mod attention;
mod buffer;
mod image_buffer;
mod pipeline;

use std::fmt;
use std::str::FromStr;

pub use attention::{fuse_attention, AugmentedScoreMap};
pub use buffer::FrameBuffer;
pub use image_buffer::fuse_image_buffer;
pub use pipeline::{run_pipeline, Pipeline, ScoreFrame, ScoreKind};

use crate::error::{ConfigError, Result};
use crate::tensor::CategoryTable;

pub const DEFAULT_BUFFER_SIZE: usize = 4;
pub const DEFAULT_WEIGHTS: [f64; 4] = [4.0, 3.0, 2.0, 1.0];
pub const DEFAULT_THRESHOLD: f64 = 1.0;

/// Parameters shared by both fusion strategies.
///
/// `weights[n]` applies to the frame `n` steps in the past (`0` = present).
/// When `targets` is `None` the target flags of the [`CategoryTable`] are used.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionConfig {
    buffer_size: usize,
    weights: Vec<f64>,
    threshold: f64,
    targets: Option<Vec<String>>,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            buffer_size: DEFAULT_BUFFER_SIZE,
            weights: DEFAULT_WEIGHTS.to_vec(),
            threshold: DEFAULT_THRESHOLD,
            targets: None,
        }
    }
}

impl FusionConfig {
    pub fn new(buffer_size: usize, weights: Vec<f64>, threshold: f64) -> Result<Self, ConfigError> {
        let cfg = Self {
            buffer_size,
            weights,
            threshold,
            targets: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides the target categories by name (or decimal index).
    pub fn with_targets<I, S>(mut self, targets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.targets = Some(targets.into_iter().map(Into::into).collect());
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.buffer_size == 0 {
            return Err(ConfigError::ZeroBufferSize);
        }
        if self.weights.len() != self.buffer_size {
            return Err(ConfigError::WeightsLength {
                buffer_size: self.buffer_size,
                weights: self.weights.len(),
            });
        }
        for (index, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(ConfigError::NonFiniteWeight { index });
            }
            if w < 0.0 {
                return Err(ConfigError::NegativeWeight { index, value: w });
            }
        }
        if !self.weights.iter().any(|&w| w > 0.0) {
            return Err(ConfigError::NoPositiveWeight);
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(ConfigError::NegativeThreshold(self.threshold));
        }
        Ok(())
    }

    pub fn buffer_size(&self) -> usize {
        self.buffer_size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn targets(&self) -> Option<&[String]> {
        self.targets.as_deref()
    }

    /// Per-category target flags, indexed by category index.
    pub fn target_flags(&self, categories: &CategoryTable) -> Result<Vec<bool>> {
        match &self.targets {
            None => Ok(categories.target_flags()),
            Some(names) => {
                let mut flags = vec![false; categories.len()];
                for name in names {
                    flags[categories.resolve(name)?] = true;
                }
                Ok(flags)
            }
        }
    }
}

/// Which per-frame post-processing a pipeline applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Baseline,
    ImageBuffer,
    Attention,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Baseline, Method::ImageBuffer, Method::Attention];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::ImageBuffer => "image_buffer",
            Method::Attention => "attention",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ConfigError::UnknownMethod(s.to_string()))
    }
}
