//! Subcommand implementations for the `tempseg` binary.
//!
//! Each command returns a [`CliError`] whose [`CliError::exit_code`] is the
//! process exit status: 0 ok, 2 config, 3 I/O, 4 shape, 5 alignment.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use tempseg_core::fusion::Pipeline;
use tempseg_core::metrics::{area_series, iou_series, mask_area_series};
use tempseg_core::segio::config::fusion_config_to_text;
use tempseg_core::segio::{
    read_fusion_settings, read_labelmap, read_mask, read_synth_config, read_tensor, write_labelmap,
    write_mask, write_metrics_csv, write_tensor, FusionSettings, ManifestFrame, SequenceManifest,
};
use tempseg_core::synth::{generate, SynthConfig};
use tempseg_core::{
    compare_methods, ComparisonTable, Error as CoreError, FusionConfig, LabelMap, Method,
    MetricKind, NamedReport, SeriesReport,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_SHAPE: u8 = 4;
pub const EXIT_ALIGNMENT: u8 = 5;

pub const MANIFEST_NAME: &str = "manifest.txt";
pub const RUN_INFO_NAME: &str = "run_info.txt";
/// Eval also writes the ground-truth area series under this name.
pub const GROUND_TRUTH_NAME: &str = "ground_truth";

pub fn tensor_file_name(frame: usize) -> String {
    format!("frame_{frame:05}.sgt")
}

pub fn mask_file_name(frame: usize) -> String {
    format!("mask_{frame:05}.pgm")
}

pub fn label_file_name(frame: usize) -> String {
    format!("frame_{frame:05}.pgm")
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Missing(String),
    #[error("{0}")]
    Alignment(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Missing(_) => EXIT_IO,
            CliError::Alignment(_) => EXIT_ALIGNMENT,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    use CoreError::*;
    match e.root() {
        Config(_) | UnknownCategory(_) | InvalidCategories(_) | CategoryOutOfRange { .. } => {
            EXIT_CONFIG
        }
        ShapeMismatch { .. } | ShapeDrift { .. } | ChannelMismatch { .. } | InvalidShape(_) => {
            EXIT_SHAPE
        }
        LengthMismatch { .. } | EmptySequence => EXIT_ALIGNMENT,
        // unreadable, malformed or out-of-contract file contents
        _ => EXIT_IO,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(CoreError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Writes the synthetic sequence described by `config` into `out_dir`.
///
/// Returns the manifest path.
pub fn cmd_synth(config: &SynthConfig, out_dir: &Path) -> CliResult<PathBuf> {
    let seq = generate(config)?;
    create_dir(out_dir)?;
    let mut frames = Vec::with_capacity(seq.frames.len());
    for (i, (frame, mask)) in seq.frames.into_iter().zip(&seq.masks).enumerate() {
        let (t, m) = (tensor_file_name(i), mask_file_name(i));
        write_tensor(out_dir.join(&t), &frame.into())?;
        write_mask(out_dir.join(&m), mask)?;
        frames.push(ManifestFrame {
            tensor: t.into(),
            mask: Some(m.into()),
        });
    }
    let manifest = SequenceManifest::new(seq.categories, frames, out_dir);
    let path = out_dir.join(MANIFEST_NAME);
    manifest.write(&path)?;
    Ok(path)
}

/// Loads a synth config file, or the defaults when `path` is `None`.
pub fn load_synth_config(path: Option<&Path>, seed: Option<u64>) -> CliResult<SynthConfig> {
    let mut c = match path {
        Some(p) => read_synth_config(p)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        c.seed = s;
    }
    c.validate().map_err(CoreError::from)?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
}

impl FromStr for ReportFormat {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(CliError::Config(format!(
                "unknown report format `{s}` (expected csv)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("csv")
    }
}

/// One fusion run: which sequence, which method, which parameters, where to.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub manifest: PathBuf,
    pub method: Method,
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub report_format: ReportFormat,
    /// Command-line values; these win over the config file.
    pub overrides: FusionSettings,
}

impl ExperimentSpec {
    pub fn new(manifest: impl Into<PathBuf>, method: Method, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            method,
            config: None,
            out_dir: out_dir.into(),
            report_format: ReportFormat::Csv,
            overrides: FusionSettings::default(),
        }
    }

    /// Resolves flag > file > default.
    pub fn fusion_config(&self) -> CliResult<FusionConfig> {
        let file = match &self.config {
            Some(p) => read_fusion_settings(p)?,
            None => FusionSettings::default(),
        };
        Ok(self
            .overrides
            .clone()
            .or(file)
            .resolve()
            .map_err(CoreError::from)?)
    }
}

/// Runs one fusion method over a manifest and writes `frame_%05d.pgm` per frame.
///
/// Returns the number of frames written.
pub fn cmd_fuse(spec: &ExperimentSpec) -> CliResult<usize> {
    let config = spec.fusion_config()?;
    let manifest = SequenceManifest::read(&spec.manifest)?;
    manifest.verify()?;
    let mut pipeline = Pipeline::new(spec.method, config.clone(), manifest.categories.clone())?;
    create_dir(&spec.out_dir)?;
    for (i, path) in manifest.tensor_paths().iter().enumerate() {
        let frame = read_tensor(path)?;
        let labels = pipeline.push(&frame)?;
        write_labelmap(spec.out_dir.join(label_file_name(i)), &labels)?;
    }
    let info = format!(
        "method = {}\ninput = {}\nframes = {}\n{}",
        spec.method,
        pipeline.input_kind().expect("at least one frame"),
        pipeline.frames_seen(),
        fusion_config_to_text(&config)
    );
    let info_path = spec.out_dir.join(RUN_INFO_NAME);
    fs::write(&info_path, info).map_err(|e| io_err(&info_path, e))?;
    Ok(pipeline.frames_seen())
}

/// A named directory of fused label maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    pub name: String,
    pub dir: PathBuf,
}

impl FromStr for PredictionSet {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s.split_once('=') {
            Some((name, dir)) if !name.is_empty() && !dir.is_empty() => {
                if name.contains(['/', '\\']) || name.starts_with('.') {
                    return Err(CliError::Config(format!("bad prediction name `{name}`")));
                }
                Ok(PredictionSet {
                    name: name.to_string(),
                    dir: dir.into(),
                })
            }
            _ => Err(CliError::Config(format!("expected NAME=DIR, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub table: ComparisonTable,
    pub csv_paths: Vec<PathBuf>,
}

fn load_predictions(set: &PredictionSet, frames: usize) -> CliResult<Vec<LabelMap>> {
    let listing = fs::read_dir(&set.dir).map_err(|e| io_err(&set.dir, e))?;
    let mut found = 0;
    for entry in listing {
        let entry = entry.map_err(|e| io_err(&set.dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("frame_") && name.ends_with(".pgm") {
            found += 1;
        }
    }
    if found != frames {
        return Err(CliError::Alignment(format!(
            "`{}` has {found} label maps but the manifest lists {frames} frames",
            set.name
        )));
    }
    (0..frames)
        .map(|i| {
            let p = set.dir.join(label_file_name(i));
            if !p.exists() {
                return Err(CliError::Missing(format!(
                    "`{}` is missing {}",
                    set.name,
                    p.display()
                )));
            }
            Ok(read_labelmap(&p, None)?)
        })
        .collect()
}

/// Scores each prediction set against the manifest and writes `<name>.csv`.
///
/// `category` is a name or index; `None` picks the first target category.
pub fn cmd_eval(
    manifest_path: &Path,
    predictions: &[PredictionSet],
    category: Option<&str>,
    out_dir: &Path,
) -> CliResult<EvalOutput> {
    if predictions.is_empty() {
        return Err(CliError::Config("no prediction sets given".into()));
    }
    let mut seen = BTreeSet::new();
    for p in predictions {
        if p.name == GROUND_TRUTH_NAME {
            return Err(CliError::Config(format!(
                "`{GROUND_TRUTH_NAME}` is a reserved name"
            )));
        }
        if !seen.insert(&p.name) {
            return Err(CliError::Config(format!(
                "duplicate prediction name `{}`",
                p.name
            )));
        }
    }
    let manifest = SequenceManifest::read(manifest_path)?;
    let cats = &manifest.categories;
    let category = match category {
        Some(c) => cats.resolve(c)?,
        None => cats
            .entries()
            .iter()
            .find(|c| c.is_target)
            .map(|c| c.index)
            .ok_or_else(|| CliError::Config("manifest has no target category".into()))?,
    };
    let masks = match manifest.mask_paths() {
        Ok(Some(paths)) => Some(paths.iter().map(read_mask).collect::<Result<Vec<_>, _>>()?),
        Ok(None) => None,
        Err(_) => {
            return Err(CliError::Alignment(
                "manifest gives ground-truth masks for only some frames".into(),
            ))
        }
    };

    create_dir(out_dir)?;
    let mut reports = Vec::new();
    let mut csv_paths = Vec::new();
    for set in predictions {
        let preds = load_predictions(set, manifest.len())?;
        for p in &preds {
            p.check_categories(cats)?;
        }
        let area = area_series(&preds, category, cats)?;
        let iou: Option<SeriesReport> = match &masks {
            Some(m) => Some(iou_series(&preds, m, category)?),
            None => None,
        };
        let path = out_dir.join(format!("{}.csv", set.name));
        write_metrics_csv(&path, &area, iou.as_ref())?;
        csv_paths.push(path);
        reports.push(NamedReport::new(&set.name, MetricKind::Area, area));
        if let Some(iou) = iou {
            reports.push(NamedReport::new(&set.name, MetricKind::Iou, iou));
        }
    }
    if let Some(m) = &masks {
        let truth = mask_area_series(m)?;
        let path = out_dir.join(format!("{GROUND_TRUTH_NAME}.csv"));
        write_metrics_csv(&path, &truth, None)?;
        csv_paths.push(path);
    }
    Ok(EvalOutput {
        table: compare_methods(&reports),
        csv_paths,
    })
}

/// Sizes the global rayon pool from `TEMPSEG_THREADS` (unset or 0 = automatic).
pub fn configure_threads(value: Option<&str>) -> CliResult<()> {
    let n = match value.map(str::trim) {
        None | Some("") => 0,
        Some(v) => v.parse::<usize>().map_err(|_| {
            CliError::Config(format!("TEMPSEG_THREADS must be an integer, got `{v}`"))
        })?,
    };
    if n > 0 {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}
