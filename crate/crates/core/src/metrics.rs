//! Temporal-consistency metrics: area over time (AOT), IoU over time (IOU-OT),
//! frame-to-frame variation and its standard deviation.
//!
//! Conventions: diffs are signed (`per_frame[i + 1] - per_frame[i]`), the
//! variation STD is the population standard deviation (divisor = number of
//! diffs), and the IoU of two empty sets is 1.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{BinaryMask, CategoryTable, Frame, LabelMap};

/// A per-frame metric series with its frame-to-frame variation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    pub per_frame: Vec<f64>,
    pub diffs: Vec<f64>,
    pub variation_std: f64,
}

impl SeriesReport {
    pub fn from_series(per_frame: Vec<f64>) -> Self {
        let diffs: Vec<f64> = per_frame.windows(2).map(|w| w[1] - w[0]).collect();
        let variation_std = population_std(&diffs);
        Self {
            per_frame,
            diffs,
            variation_std,
        }
    }

    pub fn len(&self) -> usize {
        self.per_frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_frame.is_empty()
    }
}

/// Standard deviation with divisor `n`; 0 for an empty slice.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt()
}

fn uniform_shape<T: Frame>(frames: &[T]) -> Result<()> {
    let Some(first) = frames.first() else {
        return Ok(());
    };
    let expected = first.shape();
    for (frame, f) in frames.iter().enumerate() {
        let actual = f.shape();
        if actual != expected {
            return Err(Error::ShapeDrift {
                frame,
                expected,
                actual,
            });
        }
    }
    Ok(())
}

fn check_category(category: usize, categories: usize) -> Result<u8> {
    if category >= categories {
        return Err(Error::CategoryOutOfRange {
            category,
            categories,
        });
    }
    Ok(category as u8)
}

/// Pixel count of `category` in every frame.
pub fn area_series(
    labels: &[LabelMap],
    category: usize,
    categories: &CategoryTable,
) -> Result<SeriesReport> {
    let c = check_category(category, categories.len())?;
    uniform_shape(labels)?;
    Ok(SeriesReport::from_series(
        labels.iter().map(|m| m.count(c) as f64).collect(),
    ))
}

/// Pixel count of every ground-truth mask.
pub fn mask_area_series(masks: &[BinaryMask]) -> Result<SeriesReport> {
    uniform_shape(masks)?;
    Ok(SeriesReport::from_series(
        masks.iter().map(|m| m.count() as f64).collect(),
    ))
}

/// Intersection over union of the pixels labelled `category` and the truth mask.
pub fn iou(pred: &LabelMap, truth: &BinaryMask, category: usize) -> Result<f64> {
    let (ps, ts) = (pred.shape(), truth.shape());
    if ps != ts {
        return Err(Error::ShapeMismatch {
            expected: ts,
            actual: ps,
        });
    }
    let Ok(c) = u8::try_from(category) else {
        // no pixel can carry this label
        return Ok(if truth.count() == 0 { 1.0 } else { 0.0 });
    };
    let (mut inter, mut union) = (0usize, 0usize);
    for (&l, &t) in pred.labels().iter().zip(truth.bits()) {
        let p = l == c;
        inter += usize::from(p && t);
        union += usize::from(p || t);
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Per-frame IoU against a ground-truth sequence.
pub fn iou_series(
    preds: &[LabelMap],
    truths: &[BinaryMask],
    category: usize,
) -> Result<SeriesReport> {
    if preds.len() != truths.len() {
        return Err(Error::LengthMismatch {
            predictions: preds.len(),
            truths: truths.len(),
        });
    }
    uniform_shape(preds)?;
    let values = preds
        .iter()
        .zip(truths)
        .map(|(p, t)| iou(p, t, category))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesReport::from_series(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Area,
    Iou,
}

impl MetricKind {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::Area => "AOT",
            MetricKind::Iou => "IOU-OT",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One method's report for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedReport {
    pub method: String,
    pub metric: MetricKind,
    pub report: SeriesReport,
}

impl NamedReport {
    pub fn new(method: impl Into<String>, metric: MetricKind, report: SeriesReport) -> Self {
        Self {
            method: method.into(),
            metric,
            report,
        }
    }
}

/// Variation STD per method (rows) and metric (columns), lowest per column flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    methods: Vec<String>,
    metrics: Vec<MetricKind>,
    // cells[row][col]
    cells: Vec<Vec<Option<f64>>>,
    best: Vec<Option<usize>>,
}

impl ComparisonTable {
    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn metrics(&self) -> &[MetricKind] {
        &self.metrics
    }

    pub fn value(&self, method: &str, metric: MetricKind) -> Option<f64> {
        let r = self.methods.iter().position(|m| m == method)?;
        let c = self.metrics.iter().position(|&k| k == metric)?;
        self.cells[r][c]
    }

    /// Method with the lowest variation STD for `metric`.
    pub fn best(&self, metric: MetricKind) -> Option<&str> {
        let c = self.metrics.iter().position(|&k| k == metric)?;
        self.best[c].map(|r| self.methods[r].as_str())
    }

    pub fn is_best(&self, method: &str, metric: MetricKind) -> bool {
        self.best(metric) == Some(method)
    }
}

/// Arranges variation STDs into a table without recomputing anything.
///
/// Methods keep their first-appearance order; metric columns are ordered
/// AOT then IOU-OT. Ties for the lowest value go to the method whose name
/// sorts first. A later report for the same (method, metric) pair replaces the
/// earlier one.
pub fn compare_methods(reports: &[NamedReport]) -> ComparisonTable {
    let mut methods: Vec<String> = Vec::new();
    let mut metrics: Vec<MetricKind> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        if !metrics.contains(&r.metric) {
            metrics.push(r.metric);
        }
    }
    metrics.sort();

    let mut cells = vec![vec![None; metrics.len()]; methods.len()];
    for r in reports {
        let row = methods.iter().position(|m| *m == r.method).unwrap();
        let col = metrics.iter().position(|&k| k == r.metric).unwrap();
        cells[row][col] = Some(r.report.variation_std);
    }

    let best = (0..metrics.len())
        .map(|col| {
            (0..methods.len())
                .filter_map(|row| cells[row][col].map(|v| (row, v)))
                .min_by(|(ra, a), (rb, b)| {
                    a.total_cmp(b).then_with(|| methods[*ra].cmp(&methods[*rb]))
                })
                .map(|(row, _)| row)
        })
        .collect();

    ComparisonTable {
        methods,
        metrics,
        cells,
        best,
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name_w = self
            .methods
            .iter()
            .map(String::len)
            .chain([6])
            .max()
            .unwrap_or(6);
        let headers: Vec<String> = self
            .metrics
            .iter()
            .map(|m| format!("{m} variation STD"))
            .collect();
        write!(f, "{:<name_w$}", "method")?;
        for h in &headers {
            write!(f, "  {h:>22}")?;
        }
        writeln!(f)?;
        for (row, method) in self.methods.iter().enumerate() {
            write!(f, "{method:<name_w$}")?;
            for col in 0..self.metrics.len() {
                let cell = match self.cells[row][col] {
                    Some(v) => {
                        let mark = if self.best[col] == Some(row) {
                            " *"
                        } else {
                            "  "
                        };
                        format!("{v:.6}{mark}")
                    }
                    None => "-  ".to_string(),
                };
                write!(f, "  {cell:>22}")?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "(* = lowest; population STD of signed frame-to-frame differences)"
        )
    }
}
