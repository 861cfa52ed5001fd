//! On-disk formats.
//!
//! Binary matrix (`.bin`), all integers little-endian:
//!
//! ```text
//! offset 0   magic  b"XFSC"
//! offset 4   u32    version = 1
//! offset 8   u64    rows
//! offset 16  u64    cols
//! offset 24  f64 × rows·cols, row-major IEEE-754 binary64
//! ```
//!
//! CSV matrix: one row per line, comma-separated decimal floats, no header.
//! Lines starting with `#` and blank lines are skipped.
//!
//! Labels: one base-10 integer per line; `#` comments and blank lines are
//! skipped.
//!
//! Manifest: JSON listing the (source model, target data) pairs of an
//! experiment; relative paths are resolved against the manifest's directory.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{BinReport, CorrelationReport, MetricKind, RankingReport};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"XFSC";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

/// Row-major matrix as read from disk, before any domain validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl RawMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Bin,
}

impl MatrixFormat {
    /// `.bin` means binary; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => MatrixFormat::Bin,
            _ => MatrixFormat::Csv,
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "bin" => Ok(MatrixFormat::Bin),
            other => Err(format!("unknown matrix format `{other}`")),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn malformed(path: &Path, location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Malformed { path: path.to_path_buf(), location: location.into(), reason: reason.into() }
}

pub fn read_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<RawMatrix> {
    match format.unwrap_or_else(|| MatrixFormat::from_path(path)) {
        MatrixFormat::Csv => read_matrix_csv(path),
        MatrixFormat::Bin => read_matrix_bin(path),
    }
}

pub fn write_matrix(path: &Path, matrix: &RawMatrix, format: Option<MatrixFormat>) -> Result<()> {
    match format.unwrap_or_else(|| MatrixFormat::from_path(path)) {
        MatrixFormat::Csv => write_matrix_csv(path, matrix),
        MatrixFormat::Bin => write_matrix_bin(path, matrix),
    }
}

pub fn read_matrix_bin(path: &Path) -> Result<RawMatrix> {
    let mut bytes = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(io_err(path))?;
    decode_matrix_bin(path, &bytes)
}

pub fn decode_matrix_bin(path: &Path, bytes: &[u8]) -> Result<RawMatrix> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::UnsupportedVersion { path: path.to_path_buf(), detail: "bad magic bytes".into() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(malformed(path, format!("offset {}", bytes.len()), "truncated header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { path: path.to_path_buf(), detail: format!("version {version}") });
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    let declared = rows
        .checked_mul(cols)
        .filter(|&v| v.checked_mul(8).is_some())
        .ok_or_else(|| malformed(path, "offset 8", format!("dimensions {rows}×{cols} overflow")))?;
    let actual = payload.len() as u64 / 8;
    if !payload.len().is_multiple_of(8) {
        return Err(malformed(path, format!("offset {}", bytes.len()), "payload is not a whole number of f64 values"));
    }
    if declared != actual {
        return Err(Error::DimensionHeaderMismatch { path: path.to_path_buf(), declared, actual });
    }
    let values = payload.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    Ok(RawMatrix { rows: rows as usize, cols: cols as usize, values })
}

pub fn encode_matrix_bin(matrix: &RawMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * matrix.values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(matrix.rows as u64).to_le_bytes());
    out.extend_from_slice(&(matrix.cols as u64).to_le_bytes());
    for v in &matrix.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_matrix_bin(path: &Path, matrix: &RawMatrix) -> Result<()> {
    assert_eq!(matrix.values.len(), matrix.rows * matrix.cols, "matrix shape");
    fs::write(path, encode_matrix_bin(matrix)).map_err(io_err(path))
}

/// Content lines of a text file, with 1-based line numbers; skips blank lines
/// and `#` comments.
fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => malformed(path, format!("line {}", k + 1), "not valid UTF-8"),
            _ => Error::Io { path: path.to_path_buf(), source: e },
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((k + 1, trimmed.to_string()));
    }
    Ok(lines)
}

pub fn read_matrix_csv(path: &Path) -> Result<RawMatrix> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line_no, line) in content_lines(path)? {
        let before = values.len();
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field
                .parse()
                .map_err(|_| malformed(path, format!("line {line_no}"), format!("`{field}` is not a number")))?;
            values.push(v);
        }
        let arity = values.len() - before;
        match cols {
            None => cols = Some(arity),
            Some(c) if c != arity => {
                return Err(malformed(
                    path,
                    format!("line {line_no}"),
                    format!("row has {arity} values, expected {c}"),
                ));
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| malformed(path, "line 1", "no data rows"))?;
    Ok(RawMatrix { rows, cols, values })
}

/// Values are written with 17 significant digits, enough to round-trip.
pub fn write_matrix_csv(path: &Path, matrix: &RawMatrix) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for i in 0..matrix.rows {
        let line: Vec<String> = matrix.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    content_lines(path)?
        .into_iter()
        .map(|(line_no, line)| {
            line.parse::<i64>()
                .map_err(|_| malformed(path, format!("line {line_no}"), format!("`{line}` is not an integer")))
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for y in labels {
        writeln!(w, "{y}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub model_id: String,
    pub predictions_path: PathBuf,
    pub labels_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer_metric: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_kind: Option<MetricKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub version: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_names: Option<BTreeMap<usize, String>>,
}

impl ExperimentManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self { version: "1".into(), entries, label_names: None }
    }

    fn validate(&self, path: &Path) -> Result<()> {
        if self.version != "1" {
            return Err(Error::UnsupportedVersion {
                path: path.to_path_buf(),
                detail: format!("manifest version `{}`", self.version),
            });
        }
        let mut seen = HashSet::new();
        for (k, e) in self.entries.iter().enumerate() {
            let at = format!("entry {k}");
            if e.model_id.is_empty() {
                return Err(malformed(path, at, "empty model_id"));
            }
            if !seen.insert(e.model_id.as_str()) {
                return Err(malformed(path, at, format!("duplicate model_id `{}`", e.model_id)));
            }
            if e.predictions_path.as_os_str().is_empty() || e.labels_path.as_os_str().is_empty() {
                return Err(malformed(path, at, "empty path"));
            }
            if e.features_path.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
                return Err(malformed(path, at, "empty features_path"));
            }
            if let Some(v) = e.transfer_metric {
                if !(0.0..=1.0).contains(&v) {
                    return Err(malformed(path, at, format!("transfer_metric {v} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a manifest, resolving relative paths against its
/// directory.
pub fn read_manifest(path: &Path) -> Result<ExperimentManifest> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut manifest: ExperimentManifest =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    manifest.validate(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    for e in &mut manifest.entries {
        e.predictions_path = base.join(&e.predictions_path);
        e.labels_path = base.join(&e.labels_path);
        if let Some(f) = &mut e.features_path {
            *f = base.join(&*f);
        }
    }
    Ok(manifest)
}

pub fn write_manifest(path: &Path, manifest: &ExperimentManifest) -> Result<()> {
    let text =
        serde_json::to_string_pretty(manifest).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// Reports that flatten into a CSV table.
pub trait CsvReport {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

impl CsvReport for CorrelationReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["measure", "metric", "r", "p_value", "n", "fit_slope", "fit_intercept"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let metric = match self.metric_kind {
            MetricKind::Accuracy => "accuracy",
            MetricKind::F1 => "f1",
        };
        vec![vec![
            self.measure.to_string(),
            metric.to_string(),
            format!("{:.16e}", self.r),
            format!("{:.16e}", self.p_value),
            self.n.to_string(),
            format!("{:.16e}", self.fit_slope),
            format!("{:.16e}", self.fit_intercept),
        ]]
    }
}

impl CsvReport for RankingReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["rank", "model_id", "measure", "score", "tied"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.ranking
            .iter()
            .enumerate()
            .map(|(k, m)| {
                vec![
                    (k + 1).to_string(),
                    m.model_id.clone(),
                    self.measure.to_string(),
                    format!("{:.16e}", m.score),
                    m.tied.to_string(),
                ]
            })
            .collect()
    }
}

impl CsvReport for BinReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["level", "measure", "lower", "upper", "count", "mean_metric"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.levels
            .iter()
            .map(|l| {
                vec![
                    l.level.to_string(),
                    self.measure.to_string(),
                    format!("{:.16e}", l.lower),
                    format!("{:.16e}", l.upper),
                    l.count.to_string(),
                    l.mean_metric.map(|v| format!("{v:.16e}")).unwrap_or_default(),
                ]
            })
            .collect()
    }
}

pub fn write_report_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let text =
        serde_json::to_string_pretty(report).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_report_csv<T: CsvReport>(report: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", report.header().join(",")).map_err(io_err(path))?;
    for row in report.rows() {
        writeln!(w, "{}", row.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
