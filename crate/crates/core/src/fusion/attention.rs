use rayon::prelude::*;

use super::{FrameBuffer, FusionConfig};
use crate::error::{Error, Result};
use crate::tensor::{argmax, CategoryTable, LabelMap, ProbMap, ScoreTensor, Shape};

/// Fused per-pixel scores before the final argmax.
///
/// Target channels hold thresholded weighted sums over the buffer and lie in
/// `[0, sum(weights)]`; other channels hold the present frame's probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedScoreMap {
    shape: Shape,
    values: Vec<f32>,
}

impl AugmentedScoreMap {
    pub fn into_values(self) -> Vec<f32> {
        self.values
    }
}

impl ScoreTensor for AugmentedScoreMap {
    fn shape(&self) -> Shape {
        self.shape
    }
    fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Weighted temporal sum of target-channel probabilities, thresholded, then argmax.
///
/// For a target channel `c` with `fill` buffered frames,
/// `aug_c = sum_{n < fill} weights[n] * p_c(t - n)`, replaced by 0 when below
/// the threshold. Sums accumulate in `f64` in age order and the comparison
/// against the threshold happens before rounding to `f32`.
pub fn fuse_attention(
    buffer: &FrameBuffer<ProbMap>,
    config: &FusionConfig,
    categories: &CategoryTable,
) -> Result<(AugmentedScoreMap, LabelMap)> {
    let present = buffer.present().ok_or(Error::EmptyBuffer)?;
    let shape = present.shape();
    if shape.channels != categories.len() {
        return Err(Error::ChannelMismatch {
            channels: shape.channels,
            categories: categories.len(),
        });
    }
    let targets = config.target_flags(categories)?;
    let threshold = config.threshold();
    let frames: Vec<&[f32]> = buffer.iter().map(ProbMap::values).collect();
    let weights = &config.weights()[..frames.len()];
    let c = shape.channels;

    let mut aug = vec![0.0f32; shape.len()];
    let labels: Vec<u8> = aug
        .par_chunks_mut(c)
        .enumerate()
        .map(|(p, out)| {
            let base = p * c;
            for (ch, slot) in out.iter_mut().enumerate() {
                *slot = if targets[ch] {
                    let sum: f64 = frames
                        .iter()
                        .zip(weights)
                        .map(|(f, &w)| w * f64::from(f[base + ch]))
                        .sum();
                    if sum < threshold {
                        0.0
                    } else {
                        sum as f32
                    }
                } else {
                    frames[0][base + ch]
                };
            }
            argmax(out) as u8
        })
        .collect();

    let labels = LabelMap::new(shape.height, shape.width, labels)?;
    Ok((AugmentedScoreMap { shape, values: aug }, labels))
}
