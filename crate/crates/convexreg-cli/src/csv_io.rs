//! Tabular input: CSV with a header row, '.' decimal separator, UTF-8.

use crate::error::CliError;
use convexreg::Dataset;
use std::path::Path;

/// Read a dataset from CSV by column names. Every referenced column must be
/// present and numeric; rows with NaN or infinite entries are rejected with
/// their row number. The domain defaults to the bounding box of the
/// predictors (attached later by the fit).
pub fn read_csv(path: &Path, x_cols: &[String], y_col: &str) -> Result<Dataset, CliError> {
    if x_cols.is_empty() {
        return Err(CliError::Usage("need at least one x column".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let col_index = |name: &str| -> Result<usize, CliError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Parse(format!(
                "{}: column '{name}' not found (header: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            ))
        })
    };
    let x_idx: Vec<usize> = x_cols
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_, _>>()?;
    let y_idx = col_index(y_col)?;

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::Parse(format!("{}: row {}: {e}", path.display(), row_number + 2))
        })?;
        let parse_cell = |idx: usize| -> Result<f64, CliError> {
            let cell = record.get(idx).ok_or_else(|| {
                CliError::Parse(format!(
                    "{}: row {}: missing column {}",
                    path.display(),
                    row_number + 2,
                    headers.get(idx).unwrap_or("?")
                ))
            })?;
            let value: f64 = cell.parse().map_err(|_| {
                CliError::Parse(format!(
                    "{}: row {}, column '{}': cannot parse {cell:?} as a number",
                    path.display(),
                    row_number + 2,
                    headers.get(idx).unwrap_or("?")
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse(format!(
                    "{}: row {}, column '{}': non-finite value {cell:?}",
                    path.display(),
                    row_number + 2,
                    headers.get(idx).unwrap_or("?")
                )));
            }
            Ok(value)
        };
        let x: Vec<f64> = x_idx
            .iter()
            .map(|&i| parse_cell(i))
            .collect::<Result<_, _>>()?;
        ys.push(parse_cell(y_idx)?);
        xs.push(x);
    }
    if xs.is_empty() {
        return Err(CliError::Parse(format!("{}: no data rows", path.display())));
    }
    Dataset::new(xs, ys).map_err(CliError::Smoothing)
}
