use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<f64>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        if features.rows() == 0 {
            return Err(Error::InvalidParameter("dataset has no samples".into()));
        }
        if !features.data().iter().chain(&labels).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("dataset contains non-finite values".into()));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn sample_count(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn sample(&self, j: usize) -> (&[f64], f64) {
        (self.features.row(j), self.labels[j])
    }

    pub fn has_binary_labels(&self) -> bool {
        self.labels.iter().all(|&b| b == 0.0 || b == 1.0)
    }

    pub fn require_binary_labels(&self) -> Result<()> {
        match self.labels.iter().position(|&b| b != 0.0 && b != 1.0) {
            None => Ok(()),
            Some(j) => Err(Error::InvalidParameter(format!(
                "label {} at sample {j} is not in {{0, 1}}",
                self.labels[j]
            ))),
        }
    }

    /// Centers every feature column and scales it to unit population
    /// variance. Constant columns are only centered.
    pub fn standardize(&mut self) {
        let (rows, cols) = (self.features.rows(), self.features.cols());
        for c in 0..cols {
            let mean = (0..rows).map(|r| self.features[(r, c)]).sum::<f64>() / rows as f64;
            let var = (0..rows)
                .map(|r| (self.features[(r, c)] - mean).powi(2))
                .sum::<f64>()
                / rows as f64;
            let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
            for r in 0..rows {
                self.features[(r, c)] = (self.features[(r, c)] - mean) / scale;
            }
        }
    }
}
