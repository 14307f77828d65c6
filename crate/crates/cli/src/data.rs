//! CSV ingestion.

use std::path::Path;

use miniprob::glm::Table;

use crate::error::{CliError, CliResult};

fn open(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    if !path.is_file() {
        return Err(CliError::DataFileMissing(path.to_path_buf()));
    }
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(path, e))
}

fn bad(path: &Path, msg: impl ToString) -> CliError {
    CliError::Data {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    }
}

/// A table with a header row; every column must parse as reals.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut rdr = open(path)?;
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| bad(path, e))?,
        None => return Err(bad(path, "empty file")),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let mut cols = vec![Vec::new(); names.len()];
    for (line, rec) in records.enumerate() {
        let rec = rec.map_err(|e| bad(path, e))?;
        if rec.len() != names.len() {
            return Err(bad(path, format!("row {} has {} fields, expected {}", line + 2, rec.len(), names.len())));
        }
        for (col, field) in cols.iter_mut().zip(rec.iter()) {
            let v = field
                .parse::<f64>()
                .map_err(|_| bad(path, format!("row {}: `{field}` is not a number", line + 2)))?;
            col.push(v);
        }
    }
    Ok(Table::new(names.into_iter().zip(cols).collect())?)
}

/// One real per line in the first column. A non-numeric first line is
/// taken as a header and skipped.
pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let mut rdr = open(path)?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(path, e))?;
        let field = rec.get(0).unwrap_or("");
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if line == 0 => {}
            Err(_) => return Err(bad(path, format!("line {}: `{field}` is not a number", line + 1))),
        }
    }
    if out.is_empty() {
        return Err(bad(path, "no values"));
    }
    Ok(out)
}
