//! Reading run CSVs back and merging them into long format.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::runner::fmt_f64;

/// A run CSV: header plus numeric cells, `None` for empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl RunTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_run_csv(path: &Path) -> Result<RunTable> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| Error::Parse { line: i + 2, message: format!("non-numeric cell '{cell}'") })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(RunTable { name, header, rows })
}

/// `run,iter,variable,value` rows: one per nonempty cell other than `iter`.
pub fn long_format(tables: &[RunTable]) -> Result<Vec<(String, f64, String, f64)>> {
    let mut out = Vec::new();
    for t in tables {
        let it = t
            .header
            .iter()
            .position(|h| h == "iter")
            .ok_or_else(|| Error::InvalidArgument(format!("{} has no iter column", t.name)))?;
        for row in &t.rows {
            let k = row[it].ok_or_else(|| Error::InvalidArgument(format!("{} has an empty iter cell", t.name)))?;
            for (j, cell) in row.iter().enumerate() {
                if let (true, Some(v)) = (j != it, cell) {
                    out.push((t.name.clone(), k, t.header[j].clone(), *v));
                }
            }
        }
    }
    Ok(out)
}

/// Merges run CSVs into one long-format CSV at `out`.
pub fn plotdata(inputs: &[impl AsRef<Path>], out: &Path) -> Result<usize> {
    let tables = inputs.iter().map(|p| read_run_csv(p.as_ref())).collect::<Result<Vec<_>>>()?;
    let rows = long_format(&tables)?;
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["run", "iter", "variable", "value"])?;
    for (run, k, var, v) in &rows {
        w.write_record([run.clone(), fmt_f64(*k), var.clone(), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(rows.len())
}

/// Reassembles per-run tables from long-format rows (inverse of [`long_format`]
/// for runs whose columns are all present).
pub fn from_long_format(path: &Path) -> Result<Vec<(String, f64, String, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = || Error::Parse { line: i + 2, message: "expected run,iter,variable,value".into() };
        if rec.len() != 4 {
            return Err(bad());
        }
        let k: f64 = rec[1].parse().map_err(|_| bad())?;
        let v: f64 = rec[3].parse().map_err(|_| bad())?;
        out.push((rec[0].to_string(), k, rec[2].to_string(), v));
    }
    Ok(out)
}
