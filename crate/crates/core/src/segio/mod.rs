//! On-disk formats. All multi-byte values are little-endian; output bytes
//! depend only on the data, never on the host.

pub mod config;
pub mod manifest;
pub mod metrics_csv;
pub mod pgm;
pub mod tensor_file;

pub use config::{
    parse_config, parse_fusion_config, parse_synth_config, read_fusion_settings, read_synth_config,
    ConfigKind, FusionSettings, ParsedConfig,
};
pub use manifest::{ManifestFrame, SequenceManifest};
pub use metrics_csv::{
    decode_metrics_csv, encode_metrics_csv, read_metrics_csv, write_metrics_csv, MetricsTable,
};
pub use pgm::{read_labelmap, read_mask, write_labelmap, write_mask};
pub use tensor_file::{
    decode_tensor, encode_tensor, read_tensor, read_tensor_header, write_tensor, TensorFileHeader,
};
