//! Temporal post-processing for per-frame semantic segmentation.
//!
//! Frames arrive as H×W×C score maps. The baseline labels each pixel by
//! argmax. Two fusion methods smooth the labels of target categories over a
//! short window of recent frames:
//!
//! * [`fusion::fuse_image_buffer`] unions target labels across the last N
//!   baseline label maps;
//! * [`fusion::fuse_attention`] takes a thresholded weighted sum of the last N
//!   probability maps.
//!
//! [`metrics`] measures how much the target area and IoU jump from frame to
//! frame, [`synth`] builds reproducible test sequences and [`segio`] reads and
//! writes everything on disk.

pub mod error;
pub mod fusion;
pub mod metrics;
pub mod segio;
pub mod synth;
pub mod tensor;

pub use error::{ConfigError, Error, FormatError, Result};
pub use fusion::{
    fuse_attention, fuse_image_buffer, run_pipeline, AugmentedScoreMap, FrameBuffer, FusionConfig,
    Method, Pipeline, ScoreFrame, ScoreKind,
};
pub use metrics::{
    area_series, compare_methods, iou, iou_series, population_std, ComparisonTable, MetricKind,
    NamedReport, SeriesReport,
};
pub use tensor::{
    argmax_labels, softmax_pixelwise, BinaryMask, Category, CategoryTable, Frame, LabelMap,
    LogitMap, ProbMap, ScoreTensor, Shape,
};
