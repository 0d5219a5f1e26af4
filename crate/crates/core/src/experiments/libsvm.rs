//! Reader for the libsvm sparse text format.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problems::SparseRows;

/// How the feature columns were preprocessed after reading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardization {
    pub unit_column_norm: bool,
    /// Column 2-norms before scaling; zero columns are left untouched.
    pub column_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DatasetMatrix {
    pub rows: SparseRows,
    /// Labels mapped to `{-1, +1}`.
    pub labels: Vec<f64>,
    pub standardization: Option<Standardization>,
}

impl DatasetMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.rows.n_cols()
    }

    /// Scales every nonzero column to unit 2-norm and records the norms.
    pub fn standardize(&mut self) {
        let norms = self.rows.column_norms();
        let factors: Vec<f64> = norms.iter().map(|c| if *c > 0.0 { 1.0 / c } else { 1.0 }).collect();
        self.rows.scale_columns(&factors);
        self.standardization = Some(Standardization { unit_column_norm: true, column_norms: norms });
    }
}

/// Binary labels: two distinct positive values (such as `1/2`) map the
/// smaller to `-1`; otherwise positive labels are `+1` and the rest `-1`.
fn map_labels(raw: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = raw.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() == 2 && distinct[0] > 0.0 {
        let low = distinct[0];
        return raw.iter().map(|y| if *y == low { -1.0 } else { 1.0 }).collect();
    }
    raw.iter().map(|y| if *y > 0.0 { 1.0 } else { -1.0 }).collect()
}

/// Parses libsvm text. Feature indices are 1-based and must increase
/// strictly within a line; blank lines and `#` comments are skipped.
/// The feature count is the largest index seen unless `n_features` is given.
pub fn parse_libsvm_str(text: &str, n_features: Option<usize>) -> Result<DatasetMatrix> {
    let mut raw_labels = Vec::new();
    let mut rows = Vec::new();
    let mut max_index = 0usize;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let mut fields = content.split_whitespace();
        let label_text = fields.next().expect("nonempty line has a field");
        let label: f64 = label_text.parse().map_err(|_| err(format!("invalid label '{label_text}'")))?;
        if !label.is_finite() {
            return Err(err(format!("invalid label '{label_text}'")));
        }
        let mut row = Vec::new();
        let mut last = 0usize;
        for field in fields {
            let (idx, val) = field.split_once(':').ok_or_else(|| err(format!("expected index:value, got '{field}'")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("invalid feature index '{idx}'")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            if idx <= last {
                return Err(err(format!("feature index {idx} does not increase (previous {last})")));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("invalid feature value '{val}'")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite feature value '{val}'")));
            }
            last = idx;
            row.push((idx - 1, val));
        }
        max_index = max_index.max(last);
        raw_labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data lines".into() });
    }
    let n = match n_features {
        Some(n) if n < max_index => {
            return Err(Error::InvalidArgument(format!("feature index {max_index} exceeds the declared {n} features")))
        }
        Some(n) => n,
        None => max_index,
    };
    if n == 0 {
        return Err(Error::Parse { line: 0, message: "no features".into() });
    }
    Ok(DatasetMatrix { rows: SparseRows::new(n, &rows)?, labels: map_labels(&raw_labels), standardization: None })
}

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<DatasetMatrix> {
    parse_libsvm_str(&std::fs::read_to_string(path)?, None)
}
