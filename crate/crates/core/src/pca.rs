//! Principal component analysis of the normalized indicators: correlation
//! (or covariance) matrix, spectrum, component selection and loadings.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::csvio::{self, CsvOut};
use crate::eigen::{self, Spectrum, SymmetricMatrix};
use crate::error::{Result, SmiError};
use crate::normalize::NormalizedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Basis {
    #[default]
    Correlation,
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LoadingConvention {
    /// Raw unit-eigenvector entries.
    #[default]
    UnitEigenvector,
    /// Eigenvector entries scaled by `sqrt(eigenvalue)`.
    SqrtEigenvalueScaled,
}

impl std::str::FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "correlation" => Ok(Basis::Correlation),
            "covariance" => Ok(Basis::Covariance),
            _ => Err(format!(
                "unknown PCA basis `{s}` (expected correlation or covariance)"
            )),
        }
    }
}

impl std::str::FromStr for LoadingConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "unit" | "uniteigenvector" => Ok(LoadingConvention::UnitEigenvector),
            "sqrt" | "scaled" | "sqrteigenvaluescaled" => {
                Ok(LoadingConvention::SqrtEigenvalueScaled)
            }
            _ => Err(format!(
                "unknown loading convention `{s}` (expected unit or scaled)"
            )),
        }
    }
}

/// Pearson correlations (or sample covariances, `n - 1` denominator) between
/// indicator columns.
pub fn correlation_matrix(norm: &NormalizedMatrix, basis: Basis) -> Result<SymmetricMatrix> {
    let x = norm.values();
    let (n, p) = (x.nrows(), x.ncols());
    if n < 3 {
        return Err(SmiError::TooFew {
            what: "states",
            required: 3,
            found: n,
        });
    }
    // centred variance of a constant column need not round to exactly zero
    if let Some(i) = x.column_iter().position(|c| c.iter().all(|&v| v == c[0])) {
        return Err(SmiError::DegenerateColumn {
            indicator: norm.indicators()[i].clone(),
            value: x[(0, i)],
        });
    }
    let means: Vec<f64> = x.column_iter().map(|c| c.sum() / n as f64).collect();
    let mut centered = x.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    let mut cov = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let s = centered.column(i).dot(&centered.column(j)) / (n - 1) as f64;
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    if basis == Basis::Covariance {
        return SymmetricMatrix::new(cov);
    }
    let sd: Vec<f64> = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|&s| !(s > 0.0)) {
        return Err(SmiError::DegenerateColumn {
            indicator: norm.indicators()[i].clone(),
            value: x[(0, i)],
        });
    }
    let mut corr = DMatrix::zeros(p, p);
    for i in 0..p {
        corr[(i, i)] = 1.0;
        for j in (i + 1)..p {
            let r = (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0);
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }
    SymmetricMatrix::new(corr)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSelection {
    /// Zero-based component indices; always a non-empty prefix.
    pub selected: Vec<usize>,
    pub explained_variance_ratio: f64,
    /// Components passing the eigenvalue threshold on their own.
    pub threshold_count: usize,
    /// The threshold rule kept nothing, so the first component was kept.
    pub minimum_prefix_applied: bool,
    /// Components beyond the threshold rule were added to reach the variance
    /// target.
    pub extended_for_variance: bool,
}

impl ComponentSelection {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// True when the eigenvalue and variance criteria disagreed.
    pub fn criteria_conflict(&self) -> bool {
        self.minimum_prefix_applied || self.extended_for_variance
    }
}

/// Keeps components with eigenvalue strictly above `eigen_threshold` (at
/// least one), then extends the prefix until `variance_target` of the total
/// is explained.
pub fn select_components(
    s: &Spectrum,
    eigen_threshold: f64,
    variance_target: f64,
) -> ComponentSelection {
    let total = s.total();
    let p = s.dim();
    let threshold_count = s
        .eigenvalues
        .iter()
        .take_while(|&&l| l > eigen_threshold)
        .count();
    let mut k = threshold_count.max(1).min(p);
    let ratio = |k: usize| -> f64 {
        if total > 0.0 {
            s.eigenvalues[..k].iter().sum::<f64>() / total
        } else {
            0.0
        }
    };
    let base = k;
    while k < p && ratio(k) < variance_target {
        k += 1;
    }
    ComponentSelection {
        selected: (0..k).collect(),
        explained_variance_ratio: ratio(k),
        threshold_count,
        minimum_prefix_applied: threshold_count == 0 && p > 0,
        extended_for_variance: k > base,
    }
}

/// Indicator × selected-component loadings in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingMatrix {
    pub values: DMatrix<f64>,
    pub convention: LoadingConvention,
}

impl LoadingMatrix {
    pub fn nindicators(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncomponents(&self) -> usize {
        self.values.ncols()
    }

    pub fn write_csv(&self, path: &Path, indicators: &[String]) -> Result<()> {
        let mut out = CsvOut::create(path)?;
        let mut header = vec!["indicator".to_owned()];
        header.extend((1..=self.ncomponents()).map(|j| format!("Comp{j}")));
        out.row(&header)?;
        for (i, id) in indicators.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.values.row(i).iter().map(|&v| csvio::exact(v)));
            out.row(&row)?;
        }
        out.finish()
    }

    /// Reads `indicator,Comp1,...`; returns the indicator column alongside.
    pub fn read_csv(path: &Path, convention: LoadingConvention) -> Result<(Vec<String>, Self)> {
        let mut rdr = csvio::reader(path)?;
        let header = csvio::headers(path, &mut rdr)?;
        let k = header.len().saturating_sub(1);
        let expected: Vec<String> = std::iter::once("indicator".to_owned())
            .chain((1..=k).map(|j| format!("Comp{j}")))
            .collect();
        if k == 0 || header != expected {
            return Err(SmiError::Schema {
                path: path.to_path_buf(),
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (line, rec) in csvio::records(path, &mut rdr)? {
            ids.push(rec[0].to_owned());
            for raw in rec.iter().skip(1) {
                data.push(csvio::parse_f64(raw).ok_or_else(|| SmiError::Row {
                    path: path.to_path_buf(),
                    row: line,
                    message: format!("loading `{raw}` is not a finite number"),
                })?);
            }
        }
        let values = DMatrix::from_row_slice(ids.len(), k, &data);
        Ok((ids, Self { values, convention }))
    }
}

pub fn loadings(
    s: &Spectrum,
    sel: &ComponentSelection,
    convention: LoadingConvention,
) -> LoadingMatrix {
    let p = s.dim();
    let mut values = DMatrix::zeros(p, sel.len());
    for (dst, &j) in sel.selected.iter().enumerate() {
        let scale = match convention {
            LoadingConvention::UnitEigenvector => 1.0,
            LoadingConvention::SqrtEigenvalueScaled => s.eigenvalues[j].max(0.0).sqrt(),
        };
        values.set_column(dst, &(s.eigenvectors.column(j) * scale));
    }
    LoadingMatrix { values, convention }
}

/// Correlation dump: `indicator,<id1>,...`.
pub fn write_correlation_csv(
    path: &Path,
    m: &SymmetricMatrix,
    indicators: &[String],
) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    let mut header = vec!["indicator".to_owned()];
    header.extend(indicators.iter().cloned());
    out.row(&header)?;
    for (i, id) in indicators.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(m.as_matrix().row(i).iter().map(|&v| csvio::exact(v)));
        out.row(&row)?;
    }
    out.finish()
}

/// `component,eigenvalue,explained_ratio,cumulative_ratio,selected`, one row
/// per component, 1-based component numbers.
pub fn write_spectrum_csv(path: &Path, s: &Spectrum, sel: &ComponentSelection) -> Result<()> {
    let total = s.total();
    let mut out = CsvOut::create(path)?;
    out.row([
        "component",
        "eigenvalue",
        "explained_ratio",
        "cumulative_ratio",
        "selected",
    ])?;
    let mut cumulative = 0.0;
    for (j, &l) in s.eigenvalues.iter().enumerate() {
        cumulative += l;
        out.row([
            (j + 1).to_string(),
            csvio::exact(l),
            csvio::exact(l / total),
            csvio::exact(cumulative / total),
            sel.selected.contains(&j).to_string(),
        ])?;
    }
    out.finish()
}

/// Eigenvalues of the rows flagged `selected` in a spectrum dump, in file
/// order.
pub fn read_selected_eigenvalues(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csvio::reader(path)?;
    let header = csvio::headers(path, &mut rdr)?;
    csvio::expect_header(
        path,
        &header,
        &[
            "component",
            "eigenvalue",
            "explained_ratio",
            "cumulative_ratio",
            "selected",
        ],
    )?;
    let mut out = Vec::new();
    for (line, rec) in csvio::records(path, &mut rdr)? {
        let row_err = |message: String| SmiError::Row {
            path: path.to_path_buf(),
            row: line,
            message,
        };
        let selected = rec[4].to_ascii_lowercase().parse::<bool>().map_err(|_| {
            row_err(format!(
                "`selected` must be true or false, got `{}`",
                &rec[4]
            ))
        })?;
        if selected {
            let l = csvio::parse_f64(&rec[1])
                .ok_or_else(|| row_err(format!("eigenvalue `{}` is not a number", &rec[1])))?;
            out.push(l);
        }
    }
    Ok(out)
}

/// All PCA stage products for one normalized matrix.
#[derive(Debug, Clone)]
pub struct PcaOutcome {
    pub correlation: SymmetricMatrix,
    pub spectrum: Spectrum,
    pub selection: ComponentSelection,
    pub loadings: LoadingMatrix,
}

impl PcaOutcome {
    pub fn selected_eigenvalues(&self) -> Vec<f64> {
        self.selection
            .selected
            .iter()
            .map(|&j| self.spectrum.eigenvalues[j])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcaSettings {
    pub basis: Basis,
    pub convention: LoadingConvention,
    pub eigen_threshold: f64,
    pub variance_target: f64,
    pub tolerance: f64,
}

impl Default for PcaSettings {
    fn default() -> Self {
        Self {
            basis: Basis::Correlation,
            convention: LoadingConvention::UnitEigenvector,
            eigen_threshold: 1.0,
            variance_target: 0.85,
            tolerance: eigen::DEFAULT_TOLERANCE,
        }
    }
}

pub fn run_pca(norm: &NormalizedMatrix, settings: &PcaSettings) -> Result<PcaOutcome> {
    let correlation = correlation_matrix(norm, settings.basis)?;
    let spectrum = eigen::eigendecompose(&correlation, settings.tolerance)?;
    let selection = select_components(
        &spectrum,
        settings.eigen_threshold,
        settings.variance_target,
    );
    let loadings = loadings(&spectrum, &selection, settings.convention);
    Ok(PcaOutcome {
        correlation,
        spectrum,
        selection,
        loadings,
    })
}
