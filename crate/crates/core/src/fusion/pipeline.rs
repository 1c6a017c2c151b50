use std::fmt;

use super::{fuse_attention, fuse_image_buffer, FrameBuffer, FusionConfig, Method};
use crate::error::{Error, Result};
use crate::tensor::{
    argmax_labels, softmax_pixelwise, CategoryTable, Frame, LabelMap, LogitMap, ProbMap, Shape,
};

/// Whether a frame carries raw logits or already-normalized probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    Logits,
    Probabilities,
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::Logits => "logits",
            ScoreKind::Probabilities => "probabilities",
        })
    }
}

/// One input frame. Probability frames bypass the softmax.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreFrame {
    Logits(LogitMap),
    Probabilities(ProbMap),
}

impl ScoreFrame {
    pub fn kind(&self) -> ScoreKind {
        match self {
            ScoreFrame::Logits(_) => ScoreKind::Logits,
            ScoreFrame::Probabilities(_) => ScoreKind::Probabilities,
        }
    }

    pub fn labels(&self, categories: &CategoryTable) -> Result<LabelMap> {
        match self {
            ScoreFrame::Logits(l) => argmax_labels(l, categories),
            ScoreFrame::Probabilities(p) => argmax_labels(p, categories),
        }
    }

    pub fn probabilities(&self) -> ProbMap {
        match self {
            ScoreFrame::Logits(l) => softmax_pixelwise(l),
            ScoreFrame::Probabilities(p) => p.clone(),
        }
    }
}

impl Frame for ScoreFrame {
    fn shape(&self) -> Shape {
        match self {
            ScoreFrame::Logits(l) => Frame::shape(l),
            ScoreFrame::Probabilities(p) => Frame::shape(p),
        }
    }
}

impl From<LogitMap> for ScoreFrame {
    fn from(l: LogitMap) -> Self {
        ScoreFrame::Logits(l)
    }
}

impl From<ProbMap> for ScoreFrame {
    fn from(p: ProbMap) -> Self {
        ScoreFrame::Probabilities(p)
    }
}

#[derive(Debug)]
enum History {
    None,
    Labels(FrameBuffer<LabelMap>),
    Probabilities(FrameBuffer<ProbMap>),
}

/// Streaming post-processor: one label map out per frame in.
///
/// The image buffer stores the baseline label maps of past frames, not
/// previously fused outputs.
#[derive(Debug)]
pub struct Pipeline {
    method: Method,
    config: FusionConfig,
    categories: CategoryTable,
    history: History,
    shape: Option<Shape>,
    frames_seen: usize,
    input_kind: Option<ScoreKind>,
}

impl Pipeline {
    pub fn new(method: Method, config: FusionConfig, categories: CategoryTable) -> Result<Self> {
        config.validate()?;
        // surface unknown target names before the first frame
        config.target_flags(&categories)?;
        let n = config.buffer_size();
        let history = match method {
            Method::Baseline => History::None,
            Method::ImageBuffer => History::Labels(FrameBuffer::new(n)?),
            Method::Attention => History::Probabilities(FrameBuffer::new(n)?),
        };
        Ok(Self {
            method,
            config,
            categories,
            history,
            shape: None,
            frames_seen: 0,
            input_kind: None,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn config(&self) -> &FusionConfig {
        &self.config
    }

    pub fn categories(&self) -> &CategoryTable {
        &self.categories
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    /// Kind of the first frame pushed, once one has been.
    pub fn input_kind(&self) -> Option<ScoreKind> {
        self.input_kind
    }

    pub fn push(&mut self, frame: &ScoreFrame) -> Result<LabelMap> {
        let actual = frame.shape();
        match self.shape {
            Some(expected) if expected != actual => {
                return Err(Error::ShapeDrift {
                    frame: self.frames_seen,
                    expected,
                    actual,
                });
            }
            Some(_) => {}
            None => {
                if actual.channels != self.categories.len() {
                    return Err(Error::ChannelMismatch {
                        channels: actual.channels,
                        categories: self.categories.len(),
                    });
                }
                self.shape = Some(actual);
                self.input_kind = Some(frame.kind());
            }
        }

        let out = match &mut self.history {
            History::None => frame.labels(&self.categories)?,
            History::Labels(buf) => {
                buf.push(frame.labels(&self.categories)?)?;
                fuse_image_buffer(buf, &self.config, &self.categories)?
            }
            History::Probabilities(buf) => {
                buf.push(frame.probabilities())?;
                fuse_attention(buf, &self.config, &self.categories)?.1
            }
        };
        self.frames_seen += 1;
        Ok(out)
    }
}

/// Runs a whole sequence through a fresh [`Pipeline`].
pub fn run_pipeline(
    frames: &[ScoreFrame],
    method: Method,
    config: &FusionConfig,
    categories: &CategoryTable,
) -> Result<Vec<LabelMap>> {
    if frames.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut pipeline = Pipeline::new(method, config.clone(), categories.clone())?;
    frames.iter().map(|f| pipeline.push(f)).collect()
}
