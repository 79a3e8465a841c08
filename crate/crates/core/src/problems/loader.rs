use std::io::Read;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Reads a numeric CSV with a header row. The named column becomes the
/// labels, all other columns (in file order) the features.
pub fn load_csv_dataset(path: impl AsRef<Path>, label_column: &str, normalize: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv_dataset(file, label_column, normalize)
}

pub fn read_csv_dataset(reader: impl Read, label_column: &str, normalize: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("no column named {label_column:?}"),
        })?;
    let width = headers.len();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let line = r + 2;
        let record = record?;
        if record.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("column {:?}: {field:?} is not a number", &headers[c]),
            })?;
            if c == label_idx {
                labels.push(v);
            } else {
                features.push(v);
            }
        }
    }
    let rows = labels.len();
    let mut data = Dataset::new(Matrix::from_vec(rows, width - 1, features)?, labels)?;
    if normalize {
        data.standardize();
    }
    Ok(data)
}
