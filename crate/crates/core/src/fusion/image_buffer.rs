use rayon::prelude::*;

use super::{FrameBuffer, FusionConfig};
use crate::error::{Error, Result};
use crate::tensor::{CategoryTable, LabelMap};

/// Overlays buffered target labels onto the present label map.
///
/// A pixel the present frame assigns to a non-target category takes the
/// target label of the most recent buffered frame that has one there.
/// Pixels with no target label anywhere in the buffer keep their present label.
pub fn fuse_image_buffer(
    buffer: &FrameBuffer<LabelMap>,
    config: &FusionConfig,
    categories: &CategoryTable,
) -> Result<LabelMap> {
    let present = buffer.present().ok_or(Error::EmptyBuffer)?;
    for frame in buffer.iter() {
        frame.check_categories(categories)?;
    }
    let targets = config.target_flags(categories)?;
    let history: Vec<&[u8]> = buffer.iter().skip(1).map(LabelMap::labels).collect();

    // Each frame holds a single label per pixel, so two competing target labels
    // always come from different ages and recency alone decides.
    let fused: Vec<u8> = present
        .labels()
        .par_iter()
        .enumerate()
        .map(|(i, &label)| {
            if targets[usize::from(label)] {
                return label;
            }
            history
                .iter()
                .map(|frame| frame[i])
                .find(|&l| targets[usize::from(l)])
                .unwrap_or(label)
        })
        .collect();
    LabelMap::new(present.height(), present.width(), fused)
}
