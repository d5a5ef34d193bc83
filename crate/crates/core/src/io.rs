//! Matrix files in, result documents out.
//!
//! Matrices are delimited text (CSV or TSV). Numbers are written with the
//! shortest representation that parses back to the same `f64`, so a
//! write/read cycle is lossless. Result documents are JSON with a fixed key
//! order and a `format_version` field.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::engine::{rank_features, PermutationTestResult, TestConfig};
use crate::error::{Result, SledError};
use crate::matrix::DataMatrix;

pub const RESULT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Csv,
    Tsv,
}

impl Delimiter {
    fn byte(self) -> u8 {
        match self {
            Delimiter::Csv => b',',
            Delimiter::Tsv => b'\t',
        }
    }

    /// TSV for `.tsv`/`.txt` extensions, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("txt") => Delimiter::Tsv,
            _ => Delimiter::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// One row per sample, one column per feature.
    #[default]
    SamplesByFeatures,
    /// One row per feature; transposed on load.
    FeaturesBySamples,
}

/// Where and how to read a sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub path: PathBuf,
    pub delimiter: Delimiter,
    pub has_header: bool,
    /// The first column holds labels rather than numbers.
    pub row_labels: bool,
    pub orientation: Orientation,
}

impl MatrixFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        Self {
            delimiter: Delimiter::from_path(&path),
            path,
            has_header: true,
            row_labels: false,
            orientation: Orientation::SamplesByFeatures,
        }
    }
}

/// Reads a numeric matrix.
///
/// Samples-by-features: the header (if any) names the features and row
/// labels are ignored. Features-by-samples: row labels (if any) name the
/// features, the header is ignored, and the matrix is transposed.
pub fn read_matrix(file: &MatrixFile) -> Result<DataMatrix> {
    let path = &file.path;
    let text = fs::read_to_string(path).map_err(|source| SledError::Io { path: path.clone(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(file.delimiter.byte())
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let skip = usize::from(file.row_labels);
    let mut header: Option<Vec<String>> = None;
    let mut labels = Vec::new();
    let mut cells = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;

    for record in reader.records() {
        let record = record.map_err(|e| SledError::Parse {
            path: path.clone(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        if file.has_header && header.is_none() {
            header = Some(fields.iter().skip(skip).map(|s| s.to_string()).collect());
            continue;
        }
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(SledError::RaggedRows { path: path.clone(), line, expected, found: fields.len() });
        }
        if file.row_labels {
            labels.push(fields[0].to_string());
        }
        for (column, cell) in fields.iter().enumerate().skip(skip) {
            let value: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                SledError::NonNumericCell { path: path.clone(), line, column: column + 1, cell: cell.to_string() }
            })?;
            cells.push(value);
        }
        rows += 1;
    }

    let cols = width.map_or(0, |w| w - skip);
    if rows == 0 || cols == 0 {
        return Err(SledError::Parse { path: path.clone(), line: 0, message: "no numeric data".into() });
    }
    if let Some(h) = &header {
        if h.len() != cols {
            return Err(SledError::RaggedRows {
                path: path.clone(),
                line: 1,
                expected: cols + skip,
                found: h.len() + skip,
            });
        }
    }

    let values = DMatrix::from_row_slice(rows, cols, &cells);
    let (values, names) = match file.orientation {
        Orientation::SamplesByFeatures => (values, header),
        Orientation::FeaturesBySamples => (values.transpose(), file.row_labels.then_some(labels)),
    };
    let data = DataMatrix::new(values)?;
    match names {
        Some(names) => data.with_feature_names(names).map_err(|e| SledError::Parse {
            path: path.clone(),
            line: 1,
            message: e.to_string(),
        }),
        None => Ok(data),
    }
}

/// Shortest decimal that round-trips through `f64::from_str`.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `values` as delimited text, with `names` as a header row when given.
pub fn write_matrix(path: &Path, values: &DMatrix<f64>, names: Option<&[String]>, delimiter: Delimiter) -> Result<()> {
    let sep = match delimiter {
        Delimiter::Csv => ",",
        Delimiter::Tsv => "\t",
    };
    let mut out = String::new();
    if let Some(names) = names {
        out.push_str(&names.join(sep));
        out.push('\n');
    }
    for i in 0..values.nrows() {
        let row: Vec<String> = values.row(i).iter().map(|&v| format_real(v)).collect();
        out.push_str(&row.join(sep));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| SledError::Io { path: path.to_path_buf(), source })
}

pub fn write_data_matrix(path: &Path, data: &DataMatrix, delimiter: Delimiter) -> Result<()> {
    write_matrix(path, data.values(), data.feature_names(), delimiter)
}

/// Dimensions of the two inputs and the effective budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub sqrt_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSection {
    pub statistic: f64,
    pub p_value: f64,
    pub negated: bool,
    pub permutations: usize,
    pub seed: u64,
    pub nonconverged: usize,
    pub leverage: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_stats: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures {
    pub cumulative_cut: f64,
    pub primary: Vec<String>,
    pub secondary: Vec<String>,
}

/// Execution details that do not affect any number in the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub threads: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format_version: u32,
    pub tool_version: String,
    pub rng: String,
    pub config: TestConfig,
    pub inputs: InputSummary,
    pub result: ResultSection,
    pub ranked_features: RankedFeatures,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Runtime>,
}

impl ResultDocument {
    /// Assembles a document; feature labels come from `x`.
    pub fn new(
        config: &TestConfig,
        x: &DataMatrix,
        y: &DataMatrix,
        result: &PermutationTestResult,
        cumulative_cut: f64,
    ) -> Result<Self> {
        let ranking = rank_features(&result.leverage, cumulative_cut);
        let label = |i: &usize| x.feature_label(*i);
        Ok(Self {
            format_version: RESULT_FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng: crate::rng::RNG_ID.to_string(),
            config: config.clone(),
            inputs: InputSummary { n: x.n(), m: y.n(), p: x.p(), sqrt_r: config.budget(x.p())?.sqrt_r() },
            result: ResultSection {
                statistic: result.statistic,
                p_value: result.p_value,
                negated: result.negated,
                permutations: result.permutations,
                seed: result.seed,
                nonconverged: result.nonconverged,
                leverage: result.leverage.clone(),
                null_stats: Some(result.null_stats.clone()),
            },
            ranked_features: RankedFeatures {
                cumulative_cut,
                primary: ranking.primary.iter().map(label).collect(),
                secondary: ranking.secondary.iter().map(label).collect(),
            },
            runtime: None,
        })
    }

    /// Pretty JSON. `null_stats` is dropped unless `include_null_stats`.
    pub fn to_json(&self, include_null_stats: bool) -> String {
        let mut doc = self.clone();
        if !include_null_stats {
            doc.result.null_stats = None;
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("result document serializes");
        s.push('\n');
        s
    }
}

pub fn write_result(doc: &ResultDocument, path: &Path, include_null_stats: bool) -> Result<()> {
    fs::write(path, doc.to_json(include_null_stats))
        .map_err(|source| SledError::Io { path: path.to_path_buf(), source })
}

pub fn read_result(path: &Path) -> Result<ResultDocument> {
    let text = fs::read_to_string(path).map_err(|source| SledError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| SledError::Json { path: path.to_path_buf(), source })
}

/// Restricts `x` and `y` to the features named in both, in `x`'s order.
pub fn align_by_name(x: &DataMatrix, y: &DataMatrix) -> Result<(DataMatrix, DataMatrix)> {
    let (Some(xn), Some(yn)) = (x.feature_names(), y.feature_names()) else {
        return Err(SledError::InvalidParameter("aligning by name needs headers in both inputs".into()));
    };
    let positions: std::collections::HashMap<&str, usize> =
        yn.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let (keep_x, keep_y): (Vec<usize>, Vec<usize>) =
        xn.iter().enumerate().filter_map(|(i, name)| positions.get(name.as_str()).map(|&j| (i, j))).unzip();
    if keep_x.is_empty() {
        return Err(SledError::InvalidParameter("inputs share no feature names".into()));
    }
    Ok((x.select_columns(&keep_x), y.select_columns(&keep_y)))
}
