//! Directional min-max normalization.

use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;

use crate::csvio;
use crate::dataset::{self, DataMatrix, Direction};
use crate::error::{Result, SmiError};

/// Indicator values rescaled into `[0, 1]`, 1 being the socially better end.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    states: Vec<String>,
    indicators: Vec<String>,
    values: DMatrix<f64>,
}

impl NormalizedMatrix {
    /// Builds a matrix from already-normalized values; every entry must lie
    /// in `[0, 1]`.
    pub fn from_parts(
        states: Vec<String>,
        indicators: Vec<String>,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if values.nrows() != states.len() || values.ncols() != indicators.len() {
            return Err(SmiError::Dimension(format!(
                "values are {}x{}, labels are {}x{}",
                values.nrows(),
                values.ncols(),
                states.len(),
                indicators.len()
            )));
        }
        for (c, col) in values.column_iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(SmiError::Dimension(format!(
                        "normalized value {v} at ({}, {}) is outside [0, 1]",
                        states[r], indicators[c]
                    )));
                }
            }
        }
        Ok(Self {
            states,
            indicators,
            values,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn indicators(&self) -> &[String] {
        &self.indicators
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Same schema as the observations file, exact number formatting.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        dataset::write_labeled(path, &self.states, &self.indicators, &self.values)
    }

    /// Reads a `normalized.csv` dump. Column names are taken from the header.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr: csv::Reader<File> = csvio::reader(path)?;
        let header = csvio::headers(path, &mut rdr)?;
        if header.first().map(String::as_str) != Some("state") || header.len() < 3 {
            return Err(SmiError::Schema {
                path: path.to_path_buf(),
                message: "expected header `state,<id>,<id>,...` with at least two indicators"
                    .to_owned(),
            });
        }
        let columns = header[1..].to_vec();
        let mut sorted = columns.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(SmiError::Schema {
                path: path.to_path_buf(),
                message: format!("duplicate column `{}`", w[0]),
            });
        }
        let (states, values) = dataset::read_matrix_body(path, &mut rdr, &columns)?;
        Self::from_parts(states, columns, values)
    }
}

/// `Positive`: `(x - min) / (max - min)`; `Negative`: `(max - x) / (max - min)`.
///
/// A constant column is a [`SmiError::DegenerateColumn`] with an empty
/// indicator name; [`normalize_matrix`] fills the name in.
pub fn normalize_column(values: &[f64], direction: Direction) -> Result<Vec<f64>> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || !(max > min) {
        return Err(SmiError::DegenerateColumn {
            indicator: String::new(),
            value: min,
        });
    }
    let range = max - min;
    let out = match direction {
        Direction::Positive => values.iter().map(|&x| (x - min) / range).collect(),
        Direction::Negative => values.iter().map(|&x| (max - x) / range).collect(),
    };
    Ok(out)
}

pub fn normalize_matrix(matrix: &DataMatrix) -> Result<NormalizedMatrix> {
    let raw = matrix.values();
    let mut values = DMatrix::zeros(raw.nrows(), raw.ncols());
    for (c, spec) in matrix.registry().specs().iter().enumerate() {
        let column: Vec<f64> = raw.column(c).iter().copied().collect();
        let scaled = normalize_column(&column, spec.direction).map_err(|e| match e {
            SmiError::DegenerateColumn { value, .. } => SmiError::DegenerateColumn {
                indicator: spec.id.clone(),
                value,
            },
            other => other,
        })?;
        values.set_column(c, &nalgebra::DVector::from_vec(scaled));
    }
    Ok(NormalizedMatrix {
        states: matrix.states().to_vec(),
        indicators: matrix.registry().ids().map(str::to_owned).collect(),
        values,
    })
}
