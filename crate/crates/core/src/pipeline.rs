//! End-to-end orchestration: run configuration, the three pipeline stages
//! and the JSON run report.
//!
//! Each stage writes its dump files into the output directory and returns
//! its in-memory products, so a full [`run`] and the chained stage
//! subcommands share one code path. Files that feed a later stage
//! (`normalized.csv`, `spectrum.csv`, `loadings.csv`) carry exact
//! round-trip numbers; report-only CSV dumps use six decimals.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{self, PillarBreakdown, Scatter, ScenarioTable};
use crate::csvio::{self, CsvOut};
use crate::dataset::{self, ColumnSummary, DataMatrix, GiniTable, IndicatorRegistry};
use crate::error::{Result, SmiError};
use crate::normalize::{self, NormalizedMatrix};
use crate::pca::{self, Basis, LoadingConvention, LoadingMatrix, PcaOutcome, PcaSettings};
use crate::scoring::{
    self, Category, CategoryThresholds, PercentileMethod, StateScore, WeightVector,
};

/// States this close to a category threshold get a warning.
pub const BOUNDARY_MARGIN: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub meta: PathBuf,
    pub gini: Option<PathBuf>,
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub eigen_threshold: f64,
    pub variance_target: f64,
    pub percentile_method: PercentileMethod,
    pub low_percentile: f64,
    pub high_percentile: f64,
    pub gini_threshold: f64,
    pub pca_basis: Basis,
    pub loading_convention: LoadingConvention,
}

impl RunConfig {
    pub fn new(
        data: impl Into<PathBuf>,
        meta: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            data: data.into(),
            meta: meta.into(),
            gini: None,
            out_dir: out_dir.into(),
            eigen_threshold: 1.0,
            variance_target: 0.85,
            percentile_method: PercentileMethod::Exclusive,
            low_percentile: 25.0,
            high_percentile: 75.0,
            gini_threshold: analysis::DEFAULT_GINI_THRESHOLD,
            pca_basis: Basis::Correlation,
            loading_convention: LoadingConvention::UnitEigenvector,
        }
    }

    /// Reports every violated constraint at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.low_percentile > 0.0
            && self.low_percentile < self.high_percentile
            && self.high_percentile < 100.0)
        {
            problems.push(format!(
                "percentiles must satisfy 0 < low < high < 100 (got low {}, high {})",
                self.low_percentile, self.high_percentile
            ));
        }
        if !(self.eigen_threshold >= 0.0) {
            problems.push(format!(
                "eigenvalue threshold must be >= 0 (got {})",
                self.eigen_threshold
            ));
        }
        if !(self.variance_target > 0.0 && self.variance_target <= 1.0) {
            problems.push(format!(
                "variance target must lie in (0, 1] (got {})",
                self.variance_target
            ));
        }
        if !(0.0..=1.0).contains(&self.gini_threshold) {
            problems.push(format!(
                "Gini threshold must lie in [0, 1] (got {})",
                self.gini_threshold
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SmiError::Config(problems))
        }
    }

    pub fn pca_settings(&self) -> PcaSettings {
        PcaSettings {
            basis: self.pca_basis,
            convention: self.loading_convention,
            eigen_threshold: self.eigen_threshold,
            variance_target: self.variance_target,
            ..PcaSettings::default()
        }
    }

    pub fn score_settings(&self) -> ScoreSettings {
        ScoreSettings {
            percentile_method: self.percentile_method,
            low_percentile: self.low_percentile,
            high_percentile: self.high_percentile,
            gini_threshold: self.gini_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreSettings {
    pub percentile_method: PercentileMethod,
    pub low_percentile: f64,
    pub high_percentile: f64,
    pub gini_threshold: f64,
}

impl Default for ScoreSettings {
    fn default() -> Self {
        Self {
            percentile_method: PercentileMethod::Exclusive,
            low_percentile: 25.0,
            high_percentile: 75.0,
            gini_threshold: analysis::DEFAULT_GINI_THRESHOLD,
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SmiError::io(dir, e))
}

pub struct NormalizeOutcome {
    pub matrix: DataMatrix,
    pub validation: dataset::ValidationReport,
    pub normalized: NormalizedMatrix,
}

/// Load, validate and normalize; writes `normalized.csv`.
pub fn stage_normalize(data: &Path, meta: &Path, out_dir: &Path) -> Result<NormalizeOutcome> {
    let registry = Arc::new(dataset::load_indicator_metadata(meta)?);
    let matrix = dataset::load_observations(data, registry)?;
    let validation = dataset::validate(&matrix).into_result()?;
    let normalized = normalize::normalize_matrix(&matrix)?;
    ensure_dir(out_dir)?;
    normalized.write_csv(&out_dir.join("normalized.csv"))?;
    Ok(NormalizeOutcome {
        matrix,
        validation,
        normalized,
    })
}

/// Correlation, spectrum, selection and loadings; writes `correlation.csv`,
/// `spectrum.csv` and `loadings.csv`.
pub fn stage_pca(
    norm: &NormalizedMatrix,
    settings: &PcaSettings,
    out_dir: &Path,
) -> Result<PcaOutcome> {
    let outcome = pca::run_pca(norm, settings)?;
    ensure_dir(out_dir)?;
    pca::write_correlation_csv(
        &out_dir.join("correlation.csv"),
        &outcome.correlation,
        norm.indicators(),
    )?;
    pca::write_spectrum_csv(
        &out_dir.join("spectrum.csv"),
        &outcome.spectrum,
        &outcome.selection,
    )?;
    outcome
        .loadings
        .write_csv(&out_dir.join("loadings.csv"), norm.indicators())?;
    Ok(outcome)
}

pub struct ScoreOutcome {
    pub weights: WeightVector,
    pub raw_scores: Vec<(String, f64)>,
    pub thresholds: CategoryThresholds,
    pub scores: Vec<StateScore>,
    pub scenarios: ScenarioTable,
    pub scatter: Scatter,
    pub pillars: Option<PillarBreakdown>,
    pub warnings: Vec<String>,
}

/// Weights, index, ranks, categories and the analysis outputs; writes
/// `weights.csv`, `scores.csv`, `scenarios.json`, `scatter.csv` and, when a
/// registry is supplied, `pillars.csv`.
pub fn stage_score(
    norm: &NormalizedMatrix,
    loadings: &LoadingMatrix,
    eigenvalues: &[f64],
    registry: Option<&IndicatorRegistry>,
    gini: Option<&GiniTable>,
    settings: &ScoreSettings,
    out_dir: &Path,
) -> Result<ScoreOutcome> {
    if loadings.nindicators() != norm.ncols() {
        return Err(SmiError::Dimension(format!(
            "{} loading rows but {} normalized columns",
            loadings.nindicators(),
            norm.ncols()
        )));
    }
    let weights = scoring::compute_weights(loadings, eigenvalues)?;
    let raw_scores = scoring::composite_index(norm, &weights)?;
    let thresholds = CategoryThresholds::from_scores(
        &raw_scores,
        settings.low_percentile,
        settings.high_percentile,
        settings.percentile_method,
    )?;
    let scores = scoring::score_states(&raw_scores, &thresholds);

    let mut warnings = Vec::new();
    for s in &scores {
        for (label, t) in [("low", thresholds.t_low), ("high", thresholds.t_high)] {
            if (s.smi - t).abs() <= BOUNDARY_MARGIN {
                warnings.push(format!(
                    "{} (index {:.6}) lies within {BOUNDARY_MARGIN} of the {label} threshold {:.6}; its category is sensitive to rounding",
                    s.state, s.smi, t
                ));
            }
        }
    }
    for pair in scores.windows(2) {
        if pair[0].smi == pair[1].smi {
            warnings.push(format!(
                "{} and {} have identical index {:.6}; ranks {} and {} assigned alphabetically",
                pair[0].state, pair[1].state, pair[0].smi, pair[0].rank, pair[1].rank
            ));
        }
    }

    let empty = GiniTable::default();
    let gini_table = match gini {
        Some(g) => g,
        None => {
            warnings.push("no Gini table supplied; every state is unclassified".to_owned());
            &empty
        }
    };
    let inequality = analysis::classify_states(
        norm.states().iter().map(String::as_str),
        gini_table,
        settings.gini_threshold,
    );
    let categories: Vec<(String, Category)> = scores
        .iter()
        .map(|s| (s.state.clone(), s.category))
        .collect();
    let scenarios = analysis::scenario_table(&categories, &inequality);
    if gini.is_some() && !scenarios.unclassified().is_empty() {
        warnings.push(format!(
            "no Gini value for: {}",
            scenarios
                .unclassified()
                .iter()
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let scatter = analysis::scatter_data(&raw_scores, gini_table);

    let pillars = match registry {
        Some(reg) => {
            let b = analysis::pillar_scores(norm, &weights, reg)?;
            for p in &b.skipped {
                warnings.push(format!("pillar `{p}` carries zero weight and was skipped"));
            }
            Some(b)
        }
        None => None,
    };

    ensure_dir(out_dir)?;
    write_weights(&out_dir.join("weights.csv"), norm.indicators(), &weights)?;
    write_scores(&out_dir.join("scores.csv"), &scores)?;
    write_json(&out_dir.join("scenarios.json"), &scenarios)?;
    write_scatter(&out_dir.join("scatter.csv"), &scatter)?;
    if let Some(b) = &pillars {
        write_pillars(&out_dir.join("pillars.csv"), b)?;
    }

    Ok(ScoreOutcome {
        weights,
        raw_scores,
        thresholds,
        scores,
        scenarios,
        scatter,
        pillars,
        warnings,
    })
}

fn write_weights(path: &Path, ids: &[String], w: &WeightVector) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["indicator_id", "weight"])?;
    for (id, &v) in ids.iter().zip(w.as_slice()) {
        out.row([id.clone(), csvio::fixed6(v)])?;
    }
    out.finish()
}

fn write_scores(path: &Path, scores: &[StateScore]) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["state", "smi", "rank", "category"])?;
    for s in scores {
        out.row([
            s.state.clone(),
            csvio::fixed6(s.smi),
            s.rank.to_string(),
            s.category.to_string(),
        ])?;
    }
    out.finish()
}

fn write_scatter(path: &Path, scatter: &Scatter) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["state", "gini", "smi"])?;
    for p in &scatter.points {
        out.row([p.state.clone(), csvio::fixed6(p.gini), csvio::fixed6(p.smi)])?;
    }
    out.finish()
}

fn write_pillars(path: &Path, b: &PillarBreakdown) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    out.row(["state", "pillar", "score", "is_best"])?;
    for s in &b.scores {
        out.row([
            s.state.clone(),
            s.pillar.label().to_owned(),
            csvio::fixed6(s.value),
            s.is_best.to_string(),
        ])?;
    }
    out.finish()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SmiError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| SmiError::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub states: usize,
    pub indicators: usize,
    pub fatal: usize,
    pub columns: Vec<ColumnSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentRecord {
    pub component: usize,
    pub eigenvalue: f64,
    pub explained_ratio: f64,
    pub cumulative_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub basis: Basis,
    pub components: Vec<ComponentRecord>,
    pub sweeps: usize,
    pub off_diagonal_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionSummary {
    /// One-based component numbers.
    pub selected: Vec<usize>,
    pub explained_variance_ratio: f64,
    pub eigen_threshold: f64,
    pub variance_target: f64,
    pub threshold_rule_count: usize,
    pub minimum_prefix_applied: bool,
    pub extended_for_variance: bool,
    pub loading_convention: LoadingConvention,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightRecord {
    pub indicator: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreSummary {
    pub states: Vec<StateScore>,
    pub category_counts: BTreeMap<Category, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub gini_threshold: f64,
    #[serde(flatten)]
    pub table: ScenarioTable,
}

/// Non-deterministic run metadata, kept apart from everything else.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub out_dir: PathBuf,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub validation: ValidationSummary,
    pub spectrum: SpectrumSummary,
    pub selection: SelectionSummary,
    pub weights: Vec<WeightRecord>,
    pub thresholds: CategoryThresholds,
    pub scores: ScoreSummary,
    pub scenarios: ScenarioSummary,
    pub warnings: Vec<String>,
    pub meta: RunMeta,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// The whole pipeline: every stage dump plus `report.json`.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    config.validate()?;
    let out_dir = config.out_dir.as_path();

    let norm = stage_normalize(&config.data, &config.meta, out_dir)?;
    let gini = config.gini.as_deref().map(dataset::load_gini).transpose()?;

    let pca = stage_pca(&norm.normalized, &config.pca_settings(), out_dir)?;
    let mut warnings = Vec::new();
    let sel = &pca.selection;
    if sel.minimum_prefix_applied {
        warnings.push(format!(
            "no eigenvalue exceeds {}; kept the first component only",
            config.eigen_threshold
        ));
    }
    if sel.extended_for_variance {
        warnings.push(format!(
            "components above the eigenvalue threshold explain less than {}; selection extended to {} components ({:.6} explained)",
            config.variance_target,
            sel.len(),
            sel.explained_variance_ratio
        ));
    }

    let score = stage_score(
        &norm.normalized,
        &pca.loadings,
        &pca.selected_eigenvalues(),
        Some(norm.matrix.registry()),
        gini.as_ref(),
        &config.score_settings(),
        out_dir,
    )?;
    warnings.extend(score.warnings.iter().cloned());

    let total = pca.spectrum.total();
    let mut cumulative = 0.0;
    let components = pca
        .spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            cumulative += l;
            ComponentRecord {
                component: j + 1,
                eigenvalue: l,
                explained_ratio: l / total,
                cumulative_ratio: cumulative / total,
            }
        })
        .collect();

    let report = RunReport {
        config: config.clone(),
        validation: ValidationSummary {
            states: norm.matrix.states().len(),
            indicators: norm.matrix.registry().len(),
            fatal: norm.validation.fatal().count(),
            columns: norm.validation.columns.clone(),
        },
        spectrum: SpectrumSummary {
            basis: config.pca_basis,
            components,
            sweeps: pca.spectrum.sweeps,
            off_diagonal_norm: pca.spectrum.off_diagonal,
        },
        selection: SelectionSummary {
            selected: sel.selected.iter().map(|j| j + 1).collect(),
            explained_variance_ratio: sel.explained_variance_ratio,
            eigen_threshold: config.eigen_threshold,
            variance_target: config.variance_target,
            threshold_rule_count: sel.threshold_count,
            minimum_prefix_applied: sel.minimum_prefix_applied,
            extended_for_variance: sel.extended_for_variance,
            loading_convention: config.loading_convention,
        },
        weights: norm
            .normalized
            .indicators()
            .iter()
            .zip(score.weights.as_slice())
            .map(|(id, &w)| WeightRecord {
                indicator: id.clone(),
                weight: w,
            })
            .collect(),
        thresholds: score.thresholds,
        scores: ScoreSummary {
            category_counts: scoring::category_counts(&score.scores)
                .into_iter()
                .collect(),
            states: score.scores,
        },
        scenarios: ScenarioSummary {
            gini_threshold: config.gini_threshold,
            table: score.scenarios,
        },
        warnings,
        meta: RunMeta {
            tool: "smi".to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            out_dir: out_dir.to_path_buf(),
            elapsed_ms: started.elapsed().as_millis(),
        },
    };
    fs::write(out_dir.join("report.json"), report.to_json())
        .map_err(|e| SmiError::io(out_dir.join("report.json"), e))?;
    Ok(report)
}
