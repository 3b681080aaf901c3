//! CSV ingestion with row-numbered diagnostics.
//!
//! Row numbers in messages count data rows from 1; the header is not a row.

use std::path::Path;

use calagg::{Dataset64, Error};

use crate::config::ColumnRoles;
use crate::CliError;

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Validation(format!("column '{name}' not found in header")))
}

fn parse_label(raw: &str, row: usize) -> Result<bool, CliError> {
    match raw.trim() {
        "1" | "1.0" | "true" => Ok(true),
        "0" | "0.0" | "false" => Ok(false),
        other => Err(CliError::Validation(format!("row {row}: label '{other}' is not binary (0 or 1)"))),
    }
}

fn parse_number(raw: &str, row: usize, name: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("row {row}: column '{name}' value '{}' is not numeric", raw.trim())))?;
    if !v.is_finite() {
        return Err(CliError::Validation(format!("row {row}: column '{name}' value is not finite")));
    }
    Ok(v)
}

/// Parses comma-separated text with a header row.
pub fn parse_dataset(text: &[u8], roles: &ColumnRoles) -> Result<Dataset64, CliError> {
    roles.validate()?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text);
    let headers = reader.headers().map_err(|e| CliError::Validation(format!("header: {e}")))?.clone();
    let feature_cols = roles.features.iter().map(|f| column(&headers, f)).collect::<Result<Vec<_>, _>>()?;
    let label_col = column(&headers, &roles.label)?;
    let prediction_col = column(&headers, &roles.prediction)?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut predictions = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::Validation(format!("row {row}: {e}")))?;
        let field = |c: usize| record.get(c).unwrap_or("");
        features.push(
            feature_cols
                .iter()
                .zip(&roles.features)
                .map(|(&c, name)| parse_number(field(c), row, name))
                .collect::<Result<Vec<_>, _>>()?,
        );
        labels.push(parse_label(field(label_col), row)?);
        let p = parse_number(field(prediction_col), row, &roles.prediction)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Validation(format!("row {row}: prediction {p} outside [0, 1]")));
        }
        predictions.push(p);
    }
    if labels.is_empty() {
        return Err(CliError::Validation("dataset has no data rows".into()));
    }
    Dataset64::new(features, labels, predictions)
        .map_err(|e| match e {
            Error::InconsistentPredictions { first, second } => CliError::Validation(format!(
                "rows {} and {}: identical features with different predictions",
                first + 1,
                second + 1
            )),
            other => CliError::Validation(other.to_string()),
        })?
        .with_feature_names(roles.features.clone())
        .map_err(|e| CliError::Validation(e.to_string()))
}

pub fn load_dataset(path: &Path, roles: &ColumnRoles) -> Result<Dataset64, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Validation(format!("cannot read dataset {}: {e}", path.display())))?;
    parse_dataset(&bytes, roles)
}
