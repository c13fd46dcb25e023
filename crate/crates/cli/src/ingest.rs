//! CSV tables with a header row and numeric cells.

use std::collections::HashSet;
use std::path::Path;

use tvgam::Dataset;

use crate::error::CliError;

/// Features in header order, without the target column.
#[derive(Debug, Clone)]
pub struct Table {
    pub feature_names: Vec<String>,
    pub dataset: Dataset,
}

/// Reads `path`; every column except `target` becomes a feature. When
/// `target` is `None` all columns are features and targets are zero.
pub fn ingest_csv(path: &Path, target: Option<&str>) -> Result<Table, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, target).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_csv(reader: impl std::io::Read, target: Option<&str>) -> Result<Table, CliError> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = csv
        .headers()
        .map_err(|e| CliError::Data(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::Data("empty file".into()));
    }
    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(CliError::Data(format!("duplicate column name {name:?}")));
        }
    }
    let target_col = match target {
        Some(t) => Some(
            header
                .iter()
                .position(|h| h == t)
                .ok_or_else(|| CliError::Data(format!("target column {t:?} not found")))?,
        ),
        None => None,
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(c, _)| Some(c) != target_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (r, record) in csv.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(e.to_string()))?;
        // Row numbers count data rows from 1; the header is row 0.
        let row = r + 1;
        for (c, cell) in record.iter().enumerate() {
            let value = cell
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "cell at row {row}, column {:?} is not a finite number: {cell:?}",
                        header[c]
                    ))
                })?;
            if Some(c) == target_col {
                targets.push(value);
            } else {
                features.push(value);
            }
        }
        if target_col.is_none() {
            targets.push(0.0);
        }
    }
    if targets.is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }
    let m = targets.len();
    let dataset = Dataset::from_flat(m, feature_names.len(), features, targets)?;
    Ok(Table {
        feature_names,
        dataset,
    })
}
