//! Dataset ingestion: sparse LibSVM text and label-first numeric CSV into a
//! dense [`RawMatrix`].

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::quantize::RawMatrix;

/// Supported input formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    /// `label idx:val idx:val ...`, indices 1-based, missing features zero.
    LibSvm,
    /// `label,f1,f2,...` with one row per line, no header.
    Csv,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "libsvm" => Ok(DatasetFormat::LibSvm),
            "csv" => Ok(DatasetFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown dataset format `{other}` (expected `libsvm` or `csv`)"
            ))),
        }
    }
}

/// Reads a dataset file. For LibSVM input, `declared_cols` fixes the
/// feature count (indices beyond it are an error); otherwise the largest
/// index seen wins. `#` starts a comment in either format.
pub fn ingest<P: AsRef<Path>>(
    path: P,
    format: DatasetFormat,
    declared_cols: Option<usize>,
) -> Result<RawMatrix> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = std::fs::File::open(path)?;
    match format {
        DatasetFormat::LibSvm => parse_libsvm(file, &name, declared_cols),
        DatasetFormat::Csv => parse_csv(file, &name),
    }
}

fn parse_err(source_name: &str, line: usize, msg: String) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg,
    }
}

/// Parses sparse LibSVM text into a dense matrix.
pub fn parse_libsvm<R: Read>(
    reader: R,
    source_name: &str,
    declared_cols: Option<usize>,
) -> Result<RawMatrix> {
    let mut labels = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let label_field = fields.next().expect("non-empty line has a first field");
        let label: f64 = label_field
            .parse()
            .map_err(|_| parse_err(source_name, line_no, format!("label `{label_field}` is not a number")))?;
        if !label.is_finite() {
            return Err(parse_err(source_name, line_no, format!("label `{label}` is not finite")));
        }

        let mut entries: Vec<(usize, f64)> = Vec::new();
        for pair in fields {
            let (index_str, value_str) = pair.split_once(':').ok_or_else(|| {
                parse_err(source_name, line_no, format!("expected `index:value`, got `{pair}`"))
            })?;
            let index: usize = index_str.parse().map_err(|_| {
                parse_err(source_name, line_no, format!("feature index `{index_str}` is not a number"))
            })?;
            if index == 0 {
                return Err(parse_err(
                    source_name,
                    line_no,
                    "feature index 0 (indices are 1-based)".to_string(),
                ));
            }
            if let Some(cols) = declared_cols {
                if index > cols {
                    return Err(parse_err(
                        source_name,
                        line_no,
                        format!("feature index {index} exceeds the declared {cols} columns"),
                    ));
                }
            }
            let value: f64 = value_str.parse().map_err(|_| {
                parse_err(source_name, line_no, format!("feature value `{value_str}` is not a number"))
            })?;
            if !value.is_finite() {
                return Err(parse_err(source_name, line_no, format!("feature value `{value}` is not finite")));
            }
            if entries.iter().any(|&(seen, _)| seen == index) {
                return Err(parse_err(source_name, line_no, format!("duplicate feature index {index}")));
            }
            max_index = max_index.max(index);
            entries.push((index, value));
        }
        labels.push(label);
        sparse_rows.push(entries);
    }

    let cols = declared_cols.unwrap_or(max_index);
    let rows = sparse_rows.len();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyDataset { rows, cols });
    }
    let mut values = vec![0.0f64; rows * cols];
    for (row, entries) in sparse_rows.into_iter().enumerate() {
        for (index, value) in entries {
            values[row * cols + (index - 1)] = value;
        }
    }
    RawMatrix::new(rows, cols, values, labels)
}

/// Parses label-first numeric CSV into a dense matrix.
pub fn parse_csv<R: Read>(reader: R, source_name: &str) -> Result<RawMatrix> {
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut cols: Option<usize> = None;

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(parse_err(
                source_name,
                line_no,
                "a row needs a label and at least one feature".to_string(),
            ));
        }
        let row_cols = fields.len() - 1;
        match cols {
            None => cols = Some(row_cols),
            Some(expected) if expected != row_cols => {
                return Err(Error::RaggedRow {
                    row: labels.len(),
                    got: row_cols,
                    expected,
                });
            }
            _ => {}
        }
        let mut parsed = fields.iter().enumerate().map(|(i, field)| {
            field.parse::<f64>().map_err(|_| {
                let what = if i == 0 { "label" } else { "feature" };
                parse_err(source_name, line_no, format!("{what} `{field}` is not a number"))
            })
        });
        labels.push(parsed.next().expect("at least two fields")?);
        for value in parsed {
            values.push(value?);
        }
    }

    let rows = labels.len();
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyDataset { rows, cols });
    }
    RawMatrix::new(rows, cols, values, labels)
}
