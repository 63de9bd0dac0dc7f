//! Delimited-file loading, label sidecars, primitive type inference and
//! reproducible column sampling.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use once_cell::sync::Lazy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::category::PhiCategory;
use crate::datetime;
use crate::error::{Error, Result};

/// Default number of non-null values drawn per column.
pub const DEFAULT_K: usize = 1000;

/// Fraction of tokens that must agree before a type is assigned.
pub const TYPE_THRESHOLD: f64 = 0.95;

pub const DEFAULT_NULL_TOKENS: [&str; 4] = ["", "NA", "NULL", "NaN"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InferredType {
    Int,
    Float,
    String,
    Datetime,
}

impl InferredType {
    pub const ALL: [InferredType; 4] = [
        InferredType::Int,
        InferredType::Float,
        InferredType::String,
        InferredType::Datetime,
    ];

    pub fn is_numeric(self) -> bool {
        matches!(self, InferredType::Int | InferredType::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    /// `None` is a null cell.
    pub cells: Vec<Option<String>>,
    pub label: Option<u8>,
    pub category: Option<PhiCategory>,
}

impl Column {
    pub fn new(name: impl Into<String>, cells: Vec<Option<String>>) -> Self {
        Column {
            name: name.into(),
            cells,
            label: None,
            category: None,
        }
    }

    /// Build a column from raw tokens, mapping null tokens to null cells.
    pub fn from_tokens<S: AsRef<str>>(name: impl Into<String>, tokens: &[S]) -> Self {
        let nulls = NullTokens::default();
        let cells = tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                (!nulls.is_null(t)).then(|| t.to_string())
            })
            .collect();
        Column::new(name, cells)
    }

    pub fn null_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    pub fn non_null(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().filter_map(|c| c.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<Column>,
    pub row_count: usize,
}

impl Dataset {
    /// Assemble a dataset, checking that every column has the same length.
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let name = name.into();
        let row_count = columns.first().map_or(0, |c| c.cells.len());
        if let Some(bad) = columns.iter().find(|c| c.cells.len() != row_count) {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "column `{}` has {} cells, expected {row_count}",
                    bad.name,
                    bad.cells.len()
                ),
            });
        }
        Ok(Dataset {
            name,
            columns,
            row_count,
        })
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn has_labels(&self) -> bool {
        self.columns.iter().any(|c| c.label.is_some())
    }
}

/// Case-insensitive set of tokens read as null.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullTokens(Vec<String>);

impl NullTokens {
    pub fn new<S: AsRef<str>>(tokens: &[S]) -> Self {
        NullTokens(tokens.iter().map(|t| t.as_ref().to_lowercase()).collect())
    }

    pub fn is_null(&self, token: &str) -> bool {
        let t = token.trim();
        t.is_empty() || self.0.iter().any(|n| n.eq_ignore_ascii_case(t))
    }
}

impl Default for NullTokens {
    fn default() -> Self {
        NullTokens::new(&DEFAULT_NULL_TOKENS)
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub null_tokens: NullTokens,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            has_header: true,
            null_tokens: NullTokens::default(),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_dataset(name, BufReader::new(file), opts)
}

/// Parse a dataset from any reader; `load_dataset` is a thin wrapper.
pub fn read_dataset<R: std::io::Read>(
    name: impl Into<String>,
    reader: R,
    opts: &LoadOptions,
) -> Result<Dataset> {
    let name = name.into();
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyDataset(name)),
    };
    let width = first.len();
    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); width];
    let names: Vec<String> = if opts.has_header {
        first.iter().map(|s| s.trim().to_string()).collect()
    } else {
        push_row(&mut cells, &first, &opts.null_tokens);
        (0..width).map(|i| format!("col_{i}")).collect()
    };

    for rec in records {
        let rec = rec?;
        if rec.len() != width {
            let line = rec.position().map_or(0, |p| p.line());
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        push_row(&mut cells, &rec, &opts.null_tokens);
    }

    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(n, c)| Column::new(n, c))
        .collect();
    Dataset::new(name, columns)
}

fn push_row(cells: &mut [Vec<Option<String>>], rec: &csv::StringRecord, nulls: &NullTokens) {
    for (col, field) in cells.iter_mut().zip(rec.iter()) {
        col.push((!nulls.is_null(field)).then(|| field.to_string()));
    }
}

/// Write a dataset as comma-delimited text with a header; null cells are
/// written as empty fields.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(dataset.columns.iter().map(|c| c.name.as_str()))?;
    for row in 0..dataset.row_count {
        w.write_record(
            dataset
                .columns
                .iter()
                .map(|c| c.cells[row].as_deref().unwrap_or("")),
        )?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub column_name: String,
    pub label: u8,
    pub category: Option<PhiCategory>,
}

/// Read a `column_name,label[,category]` sidecar. A leading header row is
/// recognised by its first field being `column_name`.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.get(0) == Some("column_name") {
            continue;
        }
        if rec.len() < 2 || rec.len() > 3 {
            return Err(Error::Parse {
                line,
                message: "label rows need 2 or 3 fields".into(),
            });
        }
        let label = match rec[1].trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("label must be 0 or 1, got `{other}`"),
                })
            }
        };
        let category = match rec.get(2).map(str::trim) {
            None | Some("") => None,
            Some(c) => Some(c.parse().map_err(|message| Error::Parse { line, message })?),
        };
        if category.is_some() && label == 0 {
            return Err(Error::Parse {
                line,
                message: "a category implies label 1".into(),
            });
        }
        out.push(LabelRecord {
            column_name: rec[0].to_string(),
            label,
            category,
        });
    }
    Ok(out)
}

pub fn save_labels(records: &[LabelRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "column_name,label,category").map_err(io)?;
    for r in records {
        let cat = r.category.map(|c| c.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{}", csv_field(&r.column_name), r.label, cat).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Attach sidecar labels to the dataset's columns by name. Columns missing
/// from the sidecar keep `label = None`.
pub fn apply_labels(dataset: &mut Dataset, labels: &[LabelRecord]) {
    for rec in labels {
        if let Some(col) = dataset
            .columns
            .iter_mut()
            .find(|c| c.name == rec.column_name)
        {
            col.label = Some(rec.label);
            col.category = rec.category;
        }
    }
}

/// Sidecar path for a dataset file: `name.csv` -> `name.labels.csv`.
pub fn labels_path(path: &Path) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.labels.csv"))
}

fn is_dataset_file(path: &Path) -> bool {
    let name = path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default();
    let ext_ok = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("tsv"));
    ext_ok && !name.ends_with(".labels.csv")
}

/// Load one dataset file, or every dataset file of a directory in name
/// order. A `name.labels.csv` sidecar next to a file is applied when present.
pub fn load_datasets(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Vec<Dataset>> {
    let path = path.as_ref();
    let files: Vec<std::path::PathBuf> = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_dataset_file(p))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    files
        .iter()
        .map(|f| {
            let mut ds = load_dataset(f, opts)?;
            let sidecar = labels_path(f);
            if sidecar.is_file() {
                apply_labels(&mut ds, &load_labels(&sidecar)?);
            }
            Ok(ds)
        })
        .collect()
}

static INT_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"^[+-]?\d+$").unwrap());
static FLOAT_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$").unwrap());

pub fn is_int_token(token: &str) -> bool {
    INT_RE.is_match(token.trim())
}

pub fn is_float_token(token: &str) -> bool {
    FLOAT_RE.is_match(token.trim())
}

/// Parse a numeric token (integer or decimal/scientific).
pub fn parse_number(token: &str) -> Option<f64> {
    let t = token.trim();
    if is_float_token(t) {
        t.parse().ok()
    } else {
        None
    }
}

pub fn infer_type<S: AsRef<str>>(values: &[S]) -> InferredType {
    if values.is_empty() {
        return InferredType::String;
    }
    let need = TYPE_THRESHOLD * values.len() as f64;
    let count = |f: fn(&str) -> bool| values.iter().filter(|v| f(v.as_ref())).count() as f64;
    if count(is_int_token) >= need {
        InferredType::Int
    } else if count(is_float_token) >= need {
        InferredType::Float
    } else if count(datetime::is_datetime) >= need {
        InferredType::Datetime
    } else {
        InferredType::String
    }
}

/// Sampled non-null values of one column, in original row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSample {
    pub column_name: String,
    pub values: Vec<String>,
    pub inferred_type: InferredType,
    pub total_cells: usize,
    pub null_count: usize,
    pub seed: u64,
}

impl ColumnSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Uniform sample of `k` non-null cells without replacement. The chosen
/// rows are returned in ascending row order so order-sensitive features
/// still see the column's original ordering.
pub fn sample_column(column: &Column, k: usize, seed: u64) -> Result<ColumnSample> {
    let non_null: Vec<&str> = column.non_null().collect();
    if non_null.is_empty() {
        return Err(Error::EmptySample(column.name.clone()));
    }
    let k = k.max(1);
    let values: Vec<String> = if k >= non_null.len() {
        non_null.iter().map(|s| s.to_string()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, non_null.len(), k).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| non_null[i].to_string()).collect()
    };
    let inferred_type = infer_type(&values);
    Ok(ColumnSample {
        column_name: column.name.clone(),
        values,
        inferred_type,
        total_cells: column.cells.len(),
        null_count: column.cells.len() - non_null.len(),
        seed,
    })
}
