//! Per-frame metrics CSV.
//!
//! ```text
//! frame,area,area_diff,iou,iou_diff
//! 0,120,,1,
//! 1,118,-2,0.98,-0.020000000000000018
//! __std__,,<area variation std>,,<iou variation std>
//! ```
//!
//! Row `i` carries the difference `value[i] - value[i - 1]`, so row 0 has a
//! blank diff. Numbers use the shortest representation that parses back to
//! the same `f64`. The IoU columns are blank when no ground truth was given.

use std::fs;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::metrics::SeriesReport;

pub const METRICS_HEADER: [&str; 5] = ["frame", "area", "area_diff", "iou", "iou_diff"];
pub const STD_ROW: &str = "__std__";

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn encode_metrics_csv(area: &SeriesReport, iou: Option<&SeriesReport>) -> Result<Vec<u8>> {
    if let Some(iou) = iou {
        if iou.len() != area.len() {
            return Err(Error::LengthMismatch {
                predictions: area.len(),
                truths: iou.len(),
            });
        }
    }
    let csv_err = |e: csv::Error| Error::from(FormatError::Csv(e.to_string()));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for i in 0..area.len() {
        let diff = |r: &SeriesReport| (i > 0).then(|| r.diffs[i - 1]);
        w.write_record([
            i.to_string(),
            num(area.per_frame[i]),
            opt(diff(area)),
            opt(iou.map(|r| r.per_frame[i])),
            opt(iou.and_then(diff)),
        ])
        .map_err(csv_err)?;
    }
    w.write_record([
        STD_ROW.to_string(),
        String::new(),
        num(area.variation_std),
        String::new(),
        opt(iou.map(|r| r.variation_std)),
    ])
    .map_err(csv_err)?;
    w.into_inner()
        .map_err(|e| Error::from(FormatError::Csv(e.to_string())))
}

pub fn write_metrics_csv(
    path: impl AsRef<Path>,
    area: &SeriesReport,
    iou: Option<&SeriesReport>,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_metrics_csv(area, iou)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// What a metrics CSV holds: the area series and, if present, the IoU series.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub area: SeriesReport,
    pub iou: Option<SeriesReport>,
}

fn fail(line: usize, reason: impl Into<String>) -> Error {
    FormatError::Csv(format!("line {line}: {}", reason.into())).into()
}

pub fn decode_metrics_csv(bytes: &[u8]) -> Result<MetricsTable> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let header = r
        .headers()
        .map_err(|e| Error::from(FormatError::Csv(e.to_string())))?;
    if header.iter().ne(METRICS_HEADER) {
        return Err(FormatError::Csv(format!("unexpected header {header:?}")).into());
    }

    let mut cols: [Vec<Option<f64>>; 4] = Default::default();
    let mut stds: Option<(Option<f64>, Option<f64>)> = None;
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::from(FormatError::Csv(e.to_string())))?;
        if stds.is_some() {
            return Err(fail(line, "row after the summary row"));
        }
        let cell = |j: usize| -> Result<Option<f64>> {
            let s = rec.get(j).unwrap_or("");
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| fail(line, format!("bad number `{s}`")))
        };
        let first = rec.get(0).unwrap_or("");
        if first == STD_ROW {
            stds = Some((cell(2)?, cell(4)?));
            continue;
        }
        if first.parse::<usize>().ok() != Some(cols[0].len()) {
            return Err(fail(line, format!("expected frame {}", cols[0].len())));
        }
        for (j, col) in cols.iter_mut().enumerate() {
            col.push(cell(j + 1)?);
        }
    }
    let Some((area_std, iou_std)) = stds else {
        return Err(FormatError::Csv("missing summary row".into()).into());
    };

    let series =
        |values: &[Option<f64>], diffs: &[Option<f64>], std: Option<f64>| -> Result<SeriesReport> {
            let per_frame = values
                .iter()
                .map(|v| v.ok_or_else(|| Error::from(FormatError::Csv("blank value cell".into()))))
                .collect::<Result<Vec<_>>>()?;
            let diffs = diffs
                .iter()
                .skip(1)
                .map(|v| v.ok_or_else(|| Error::from(FormatError::Csv("blank diff cell".into()))))
                .collect::<Result<Vec<_>>>()?;
            Ok(SeriesReport {
                per_frame,
                diffs,
                variation_std: std
                    .ok_or_else(|| Error::from(FormatError::Csv("blank std".into())))?,
            })
        };
    let area = series(&cols[0], &cols[1], area_std)?;
    let iou = match iou_std {
        None if cols[2].iter().all(Option::is_none) => None,
        _ => Some(series(&cols[2], &cols[3], iou_std)?),
    };
    Ok(MetricsTable { area, iou })
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<MetricsTable> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_metrics_csv(&bytes).map_err(|e| e.in_file(path))
}
