//! Min/max normalization and any-precision fixed-point quantization.
//!
//! Raw features are first scaled per column to `[0, 1]`, then quantized once
//! at the maximum precision `S`: `code = round_half_up(value * (2^S - 1))`.
//! Every lower precision `s` is derived from that single table by keeping the
//! `s` most significant bits ([`truncate_code`]), so no re-quantization pass
//! is ever needed. Codes are interpreted as binary fractions
//! (`dequantize(code, s) = code / 2^s`, i.e. bit 1 — the MSB — weighs 2^-1),
//! which is the interpretation the bit-serial arithmetic implements; the
//! generation rule scales by `2^S - 1`, so the two differ by at most one part
//! in `2^S` at the top of the range. Labels are never quantized: they are
//! carried as 32-bit fixed-point values with 24 fractional bits.

use crate::error::{Error, Result};
use crate::fixed::Fixed;

/// Dense row-major matrix of raw (unnormalized) features plus labels.
#[derive(Debug, Clone)]
pub struct RawMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Vec<f64>,
}

impl RawMatrix {
    /// Builds a matrix from row-major values and one label per row.
    /// Rejects empty shapes, length mismatches, and non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDataset { rows, cols });
        }
        if values.len() != rows * cols {
            return Err(Error::RaggedRow {
                row: values.len() / cols.max(1),
                got: values.len() % cols.max(1),
                expected: cols,
            });
        }
        if labels.len() != rows {
            return Err(Error::LabelCountMismatch {
                labels: labels.len(),
                rows,
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: i / cols,
                    col: i % cols,
                    value: *v,
                });
            }
        }
        for (row, v) in labels.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row,
                    col: usize::MAX,
                    value: *v,
                });
            }
        }
        Ok(RawMatrix {
            rows,
            cols,
            values,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn label(&self, row: usize) -> f64 {
        self.labels[row]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// Per-column scaling metadata recorded by [`normalize_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

/// Row-major matrix with every feature scaled into `[0, 1]`.
#[derive(Debug, Clone)]
pub struct NormalizedMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Vec<f64>,
    ranges: Vec<ColumnRange>,
}

impl NormalizedMatrix {
    /// Wraps values that are already in `[0, 1]` (identity column ranges).
    /// Useful when a dataset is generated directly in normalized form.
    pub fn from_normalized(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        labels: Vec<f64>,
    ) -> Result<Self> {
        let raw = RawMatrix::new(rows, cols, values, labels)?;
        for i in 0..raw.values.len() {
            let v = raw.values[i];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::NotNormalized {
                    row: i / cols,
                    col: i % cols,
                    value: v,
                });
            }
        }
        Ok(NormalizedMatrix {
            rows,
            cols,
            values: raw.values,
            labels: raw.labels,
            ranges: vec![ColumnRange { min: 0.0, max: 1.0 }; cols],
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn label(&self, row: usize) -> f64 {
        self.labels[row]
    }

    /// The `(min, max)` pair each column was scaled by.
    pub fn ranges(&self) -> &[ColumnRange] {
        &self.ranges
    }

    #[cfg(test)]
    fn as_raw(&self) -> RawMatrix {
        RawMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.clone(),
            labels: self.labels.clone(),
        }
    }
}

/// Scales every column to `[0, 1]` via `(v - min) / (max - min)`.
///
/// Constant columns (max = min) carry no information and map to all zeros.
/// Labels pass through untouched.
pub fn normalize_dataset(raw: &RawMatrix) -> Result<NormalizedMatrix> {
    let mut ranges = Vec::with_capacity(raw.cols);
    for col in 0..raw.cols {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for row in 0..raw.rows {
            let v = raw.value(row, col);
            min = min.min(v);
            max = max.max(v);
        }
        ranges.push(ColumnRange { min, max });
    }
    let mut values = Vec::with_capacity(raw.values.len());
    for row in 0..raw.rows {
        for (col, &ColumnRange { min, max }) in ranges.iter().enumerate() {
            let v = raw.value(row, col);
            if max > min {
                values.push((v - min) / (max - min));
            } else {
                values.push(0.0);
            }
        }
    }
    Ok(NormalizedMatrix {
        rows: raw.rows,
        cols: raw.cols,
        values,
        labels: raw.labels.clone(),
        ranges,
    })
}

/// The full-precision quantized dataset: `S`-bit codes plus fixed-point
/// labels. All lower precisions are views of this table via truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointTable {
    rows: usize,
    cols: usize,
    s_max: u8,
    codes: Vec<u32>,
    labels: Vec<Fixed>,
}

impl FixedPointTable {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Maximum precision `S` the codes were generated at.
    pub fn max_precision(&self) -> u8 {
        self.s_max
    }

    pub fn code(&self, row: usize, col: usize) -> u32 {
        self.codes[row * self.cols + col]
    }

    pub fn row_codes(&self, row: usize) -> &[u32] {
        &self.codes[row * self.cols..(row + 1) * self.cols]
    }

    pub fn label(&self, row: usize) -> Fixed {
        self.labels[row]
    }

    pub fn labels(&self) -> &[Fixed] {
        &self.labels
    }
}

/// Quantizes a normalized matrix at maximum precision `S`:
/// `code = round_half_up(value * (2^S - 1))`, so 0.0 maps to 0 and 1.0 maps
/// to the all-ones code. Labels become 32-bit fixed-point and must fit the
/// representable range `[-128, 128)`.
pub fn quantize_full(norm: &NormalizedMatrix, s_max: u8) -> Result<FixedPointTable> {
    if !(1..=32).contains(&s_max) {
        return Err(Error::PrecisionRange {
            s: s_max as u32,
            max: 32,
        });
    }
    let top = (1u64 << s_max) - 1;
    let mut codes = Vec::with_capacity(norm.rows * norm.cols);
    for v in &norm.values {
        // Round half up; values are in [0, 1] so the +0.5 floor is exact
        // half-up rounding. Clamp guards the v = 1.0 float boundary.
        let code = ((v * top as f64) + 0.5).floor() as u64;
        codes.push(code.min(top) as u32);
    }
    let mut labels = Vec::with_capacity(norm.rows);
    for (row, &label) in norm.labels.iter().enumerate() {
        let fx = Fixed::from_f64(label);
        if !fx.fits_i32() {
            return Err(Error::LabelRange { row, value: label });
        }
        labels.push(fx);
    }
    Ok(FixedPointTable {
        rows: norm.rows,
        cols: norm.cols,
        s_max,
        codes,
        labels,
    })
}

/// Keeps the `s` most significant bits of an `s_full`-bit code (logical
/// right shift by `s_full - s`).
pub fn truncate_code(code: u32, s_full: u8, s: u8) -> Result<u32> {
    if s < 1 || s > s_full {
        return Err(Error::PrecisionRange {
            s: s as u32,
            max: s_full as u32,
        });
    }
    Ok(code >> (s_full - s))
}

/// Interprets an `s`-bit code as a binary fraction in `[0, 1)`:
/// bit 1 (the most significant) weighs 2^-1, bit 2 weighs 2^-2, and so on —
/// equivalently `code / 2^s`.
pub fn dequantize(code: u32, s: u8) -> Result<f64> {
    if !(1..=32).contains(&s) {
        return Err(Error::PrecisionRange { s: s as u32, max: 32 });
    }
    if s < 32 && code >= (1u32 << s) {
        return Err(Error::CodeRange {
            code,
            s: s as u32,
        });
    }
    Ok(code as f64 / (1u64 << s) as f64)
}
