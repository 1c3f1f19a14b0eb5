//! Mobility-versus-inequality cross-tabulation and per-pillar sub-scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::dataset::{GiniTable, IndicatorRegistry, Pillar};
use crate::error::{Result, SmiError};
use crate::normalize::NormalizedMatrix;
use crate::scoring::{Category, WeightVector};

pub const DEFAULT_GINI_THRESHOLD: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum InequalityClass {
    LowInequality,
    HighInequality,
    Unclassified,
}

impl fmt::Display for InequalityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityClass::LowInequality => "Low",
            InequalityClass::HighInequality => "High",
            InequalityClass::Unclassified => "Unclassified",
        })
    }
}

/// Strictly below `threshold` is low inequality; the boundary itself is high.
pub fn classify_inequality(gini: f64, threshold: f64) -> InequalityClass {
    if gini < threshold {
        InequalityClass::LowInequality
    } else {
        InequalityClass::HighInequality
    }
}

/// Classifies every state in `states`; those absent from `gini` are
/// `Unclassified`.
pub fn classify_states<'a>(
    states: impl IntoIterator<Item = &'a str>,
    gini: &GiniTable,
    threshold: f64,
) -> BTreeMap<String, InequalityClass> {
    states
        .into_iter()
        .map(|s| {
            let class = gini.get(s).map_or(InequalityClass::Unclassified, |g| {
                classify_inequality(g, threshold)
            });
            (s.to_owned(), class)
        })
        .collect()
}

/// The 3×2 mobility × inequality grid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioTable {
    cells: BTreeMap<(Category, InequalityClass), BTreeSet<String>>,
    unclassified: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioCell {
    pub mobility: Category,
    pub inequality: InequalityClass,
    pub states: Vec<String>,
}

impl ScenarioTable {
    /// Cell order: mobility High → Low, and within each, low then high
    /// inequality.
    pub const CELL_ORDER: [(Category, InequalityClass); 6] = [
        (Category::High, InequalityClass::LowInequality),
        (Category::High, InequalityClass::HighInequality),
        (Category::Medium, InequalityClass::LowInequality),
        (Category::Medium, InequalityClass::HighInequality),
        (Category::Low, InequalityClass::LowInequality),
        (Category::Low, InequalityClass::HighInequality),
    ];

    pub fn cell(&self, mobility: Category, inequality: InequalityClass) -> BTreeSet<String> {
        self.cells
            .get(&(mobility, inequality))
            .cloned()
            .unwrap_or_default()
    }

    pub fn unclassified(&self) -> &BTreeSet<String> {
        &self.unclassified
    }

    /// All six cells in [`Self::CELL_ORDER`], empty ones included.
    pub fn cells(&self) -> Vec<ScenarioCell> {
        Self::CELL_ORDER
            .iter()
            .map(|&(mobility, inequality)| ScenarioCell {
                mobility,
                inequality,
                states: self.cell(mobility, inequality).into_iter().collect(),
            })
            .collect()
    }
}

#[derive(Serialize)]
struct ScenarioJson {
    cells: Vec<ScenarioCell>,
    unclassified: Vec<String>,
}

impl Serialize for ScenarioTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScenarioJson {
            cells: self.cells(),
            unclassified: self.unclassified.iter().cloned().collect(),
        }
        .serialize(serializer)
    }
}

pub fn scenario_table(
    categories: &[(String, Category)],
    inequality: &BTreeMap<String, InequalityClass>,
) -> ScenarioTable {
    let mut table = ScenarioTable::default();
    for (state, category) in categories {
        match inequality.get(state) {
            Some(&class) if class != InequalityClass::Unclassified => {
                table
                    .cells
                    .entry((*category, class))
                    .or_default()
                    .insert(state.clone());
            }
            _ => {
                table.unclassified.insert(state.clone());
            }
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub state: String,
    pub gini: f64,
    pub smi: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Scatter {
    pub points: Vec<ScatterPoint>,
    /// States with a score but no Gini value.
    pub omitted: Vec<String>,
}

/// Pairs each score with its Gini value, sorted by state name.
pub fn scatter_data(scores: &[(String, f64)], gini: &GiniTable) -> Scatter {
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Scatter::default();
    for (state, smi) in sorted {
        match gini.get(state) {
            Some(g) => out.points.push(ScatterPoint {
                state: state.clone(),
                gini: g,
                smi: *smi,
            }),
            None => out.omitted.push(state.clone()),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PillarScore {
    pub state: String,
    pub pillar: Pillar,
    pub value: f64,
    pub is_best: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PillarBreakdown {
    /// State-major, pillars in canonical order within each state.
    pub scores: Vec<PillarScore>,
    /// Total index weight carried by each scored pillar.
    pub pillar_weights: Vec<(Pillar, f64)>,
    /// Pillars whose indicators all have zero weight.
    pub skipped: Vec<Pillar>,
}

/// Weighted mean of each state's normalized values within each pillar,
/// using the index weights restricted to that pillar. The best performer
/// per pillar is the highest scorer (alphabetical on ties).
pub fn pillar_scores(
    norm: &NormalizedMatrix,
    w: &WeightVector,
    registry: &IndicatorRegistry,
) -> Result<PillarBreakdown> {
    if !registry
        .ids()
        .eq(norm.indicators().iter().map(String::as_str))
    {
        return Err(SmiError::Dimension(
            "normalized matrix columns do not match the indicator registry".to_owned(),
        ));
    }
    if w.len() != registry.len() {
        return Err(SmiError::Dimension(format!(
            "{} indicators but {} weights",
            registry.len(),
            w.len()
        )));
    }
    let weights = w.as_slice();
    let mut breakdown = PillarBreakdown::default();
    let mut per_pillar: Vec<(Pillar, Vec<usize>, f64)> = Vec::new();
    for (pillar, cols) in registry.pillar_groups() {
        let total: f64 = cols.iter().map(|&c| weights[c]).sum();
        if total > 0.0 {
            breakdown.pillar_weights.push((pillar, total));
            per_pillar.push((pillar, cols, total));
        } else {
            breakdown.skipped.push(pillar);
        }
    }

    let values = norm.values();
    let mut best: BTreeMap<Pillar, (f64, &str)> = BTreeMap::new();
    for (r, state) in norm.states().iter().enumerate() {
        for (pillar, cols, total) in &per_pillar {
            let num = cols
                .iter()
                .fold(0.0, |acc, &c| acc + values[(r, c)] * weights[c]);
            let value = (num / total).clamp(0.0, 1.0);
            let entry = best.entry(*pillar).or_insert((value, state));
            if value > entry.0 || (value == entry.0 && state.as_str() < entry.1) {
                *entry = (value, state);
            }
            breakdown.scores.push(PillarScore {
                state: state.clone(),
                pillar: *pillar,
                value,
                is_best: false,
            });
        }
    }
    for score in &mut breakdown.scores {
        score.is_best = best
            .get(&score.pillar)
            .is_some_and(|(_, s)| *s == score.state);
    }
    Ok(breakdown)
}
