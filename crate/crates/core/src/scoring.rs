//! Indicator weights, the composite index, ranking and percentile-based
//! mobility categories.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, SmiError};
use crate::normalize::NormalizedMatrix;
use crate::pca::LoadingMatrix;

/// Non-negative per-indicator weights in registry order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(SmiError::Dimension(format!(
                "weights must be finite and non-negative, found {w}"
            )));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(SmiError::ZeroTotalWeight);
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|w| w * factor).collect())
    }
}

/// `W_i = Σ_j |L_ij| · E_j` over the selected components, summed in
/// component order.
pub fn compute_weights(loadings: &LoadingMatrix, eigenvalues: &[f64]) -> Result<WeightVector> {
    if loadings.ncomponents() != eigenvalues.len() {
        return Err(SmiError::Dimension(format!(
            "{} loading columns but {} eigenvalues",
            loadings.ncomponents(),
            eigenvalues.len()
        )));
    }
    if let Some(e) = eigenvalues.iter().find(|e| !(**e >= 0.0)) {
        return Err(SmiError::Dimension(format!(
            "selected eigenvalue {e} is negative"
        )));
    }
    let weights = loadings
        .values
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(eigenvalues)
                .fold(0.0, |acc, (l, e)| acc + l.abs() * e)
        })
        .collect();
    WeightVector::new(weights)
}

/// Weighted mean `Σ X_i W_i / Σ W_i` of each state's normalized row, in
/// matrix row order.
pub fn composite_index(norm: &NormalizedMatrix, w: &WeightVector) -> Result<Vec<(String, f64)>> {
    if norm.ncols() != w.len() {
        return Err(SmiError::Dimension(format!(
            "{} indicators but {} weights",
            norm.ncols(),
            w.len()
        )));
    }
    let total = w.total();
    if !(total > 0.0) {
        return Err(SmiError::ZeroTotalWeight);
    }
    Ok(norm
        .states()
        .iter()
        .zip(norm.values().row_iter())
        .map(|(state, row)| {
            let num = row
                .iter()
                .zip(w.as_slice())
                .fold(0.0, |acc, (x, w)| acc + x * w);
            (state.clone(), num / total)
        })
        .collect())
}

/// Descending by score; exact ties go to the alphabetically earlier state.
/// Returns `(state, rank)` in rank order, ranks `1..=n` without gaps.
pub fn rank(scores: &[(String, f64)]) -> Vec<(String, usize)> {
    let mut order: Vec<&(String, f64)> = scores.iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    order
        .into_iter()
        .enumerate()
        .map(|(i, (state, _))| (state.clone(), i + 1))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PercentileMethod {
    /// Weibull plotting position, `h = (n + 1) p`, clamped to `[1, n]`.
    #[default]
    Exclusive,
    /// `h = 1 + (n - 1) p`.
    Inclusive,
    /// The `ceil(p n)`-th order statistic.
    NearestRank,
}

impl PercentileMethod {
    fn min_values(self) -> usize {
        match self {
            PercentileMethod::Exclusive => 3,
            PercentileMethod::Inclusive | PercentileMethod::NearestRank => 1,
        }
    }
}

impl FromStr for PercentileMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exclusive" => Ok(PercentileMethod::Exclusive),
            "inclusive" => Ok(PercentileMethod::Inclusive),
            "nearestrank" => Ok(PercentileMethod::NearestRank),
            _ => Err(format!("unknown percentile method `{s}`")),
        }
    }
}

/// The `p`-th percentile (`0 < p < 100`) of `values`.
pub fn percentile(values: &[f64], p: f64, method: PercentileMethod) -> Result<f64> {
    if !(p > 0.0 && p < 100.0) {
        return Err(SmiError::Config(vec![format!(
            "percentile must lie strictly between 0 and 100, got {p}"
        )]));
    }
    let needed = method.min_values();
    if values.len() < needed {
        return Err(SmiError::TooFew {
            what: "values for this percentile method",
            required: needed,
            found: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let fraction = p / 100.0;

    let interpolate = |h: f64| -> f64 {
        let h = h.clamp(1.0, n as f64);
        let lower = h.floor() as usize;
        let lo = sorted[lower - 1];
        if lower == n {
            return lo;
        }
        let hi = sorted[lower];
        lo + (h - lower as f64) * (hi - lo)
    };

    Ok(match method {
        PercentileMethod::Exclusive => interpolate((n + 1) as f64 * fraction),
        PercentileMethod::Inclusive => interpolate(1.0 + (n - 1) as f64 * fraction),
        PercentileMethod::NearestRank => {
            let r = ((fraction * n as f64).ceil() as usize).clamp(1, n);
            sorted[r - 1]
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Category {
    Low,
    Medium,
    High,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::High, Category::Medium, Category::Low];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Low => "Low",
            Category::Medium => "Medium",
            Category::High => "High",
        })
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Category::Low),
            "medium" => Ok(Category::Medium),
            "high" => Ok(Category::High),
            _ => Err(format!("unknown category `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryThresholds {
    pub t_low: f64,
    pub t_high: f64,
    pub low_percentile: f64,
    pub high_percentile: f64,
    pub percentile_method: PercentileMethod,
}

impl CategoryThresholds {
    /// Percentile cut points of the scores themselves.
    pub fn from_scores(
        scores: &[(String, f64)],
        low_percentile: f64,
        high_percentile: f64,
        method: PercentileMethod,
    ) -> Result<Self> {
        if !(low_percentile < high_percentile) {
            return Err(SmiError::Config(vec![format!(
                "low percentile {low_percentile} must be below high percentile {high_percentile}"
            )]));
        }
        let values: Vec<f64> = scores.iter().map(|(_, v)| *v).collect();
        Ok(Self {
            t_low: percentile(&values, low_percentile, method)?,
            t_high: percentile(&values, high_percentile, method)?,
            low_percentile,
            high_percentile,
            percentile_method: method,
        })
    }

    /// `High` from `t_high` upward, `Low` strictly below `t_low`.
    pub fn classify(&self, smi: f64) -> Category {
        if smi >= self.t_high {
            Category::High
        } else if smi < self.t_low {
            Category::Low
        } else {
            Category::Medium
        }
    }
}

pub fn categorize(scores: &[(String, f64)], t: &CategoryThresholds) -> Vec<(String, Category)> {
    scores
        .iter()
        .map(|(state, smi)| (state.clone(), t.classify(*smi)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateScore {
    pub state: String,
    pub smi: f64,
    pub rank: usize,
    pub category: Category,
}

/// Ranks and categorizes `scores`; the result is in rank order.
pub fn score_states(scores: &[(String, f64)], t: &CategoryThresholds) -> Vec<StateScore> {
    let ranks = rank(scores);
    ranks
        .into_iter()
        .map(|(state, rank)| {
            let smi = scores
                .iter()
                .find(|(s, _)| *s == state)
                .map(|(_, v)| *v)
                .expect("ranked state comes from the score list");
            StateScore {
                category: t.classify(smi),
                state,
                smi,
                rank,
            }
        })
        .collect()
}

/// Bucket sizes in `High, Medium, Low` order.
pub fn category_counts(scores: &[StateScore]) -> [(Category, usize); 3] {
    Category::ALL.map(|c| (c, scores.iter().filter(|s| s.category == c).count()))
}
