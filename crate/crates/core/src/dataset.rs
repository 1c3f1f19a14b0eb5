//! Domain data model and the three input files: indicator metadata,
//! state observations and Gini coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::csvio::{self, CsvOut};
use crate::error::{BadCell, Result, SmiError};

/// The ten thematic groups indicators are organised into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Pillar {
    Health,
    EducationAccess,
    EducationQualityEquity,
    LifelongLearning,
    TechnologyAccess,
    WorkOpportunities,
    FairWages,
    WorkingConditions,
    SocialProtection,
    InclusiveInstitutions,
}

impl Pillar {
    pub const ALL: [Pillar; 10] = [
        Pillar::Health,
        Pillar::EducationAccess,
        Pillar::EducationQualityEquity,
        Pillar::LifelongLearning,
        Pillar::TechnologyAccess,
        Pillar::WorkOpportunities,
        Pillar::FairWages,
        Pillar::WorkingConditions,
        Pillar::SocialProtection,
        Pillar::InclusiveInstitutions,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Pillar::Health => "Health",
            Pillar::EducationAccess => "Education Access",
            Pillar::EducationQualityEquity => "Education Quality and Equity",
            Pillar::LifelongLearning => "Lifelong Learning",
            Pillar::TechnologyAccess => "Technology Access",
            Pillar::WorkOpportunities => "Work Opportunities",
            Pillar::FairWages => "Fair Wages",
            Pillar::WorkingConditions => "Working Conditions",
            Pillar::SocialProtection => "Social Protection",
            Pillar::InclusiveInstitutions => "Inclusive Institutions",
        }
    }
}

impl fmt::Display for Pillar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Pillar {
    type Err = String;

    /// Matches the canonical label ignoring case, spacing and punctuation;
    /// `&` is read as `and`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .replace('&', "and")
            .chars()
            .filter(char::is_ascii_alphanumeric)
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let found = match key.as_str() {
            "health" => Pillar::Health,
            "educationaccess" => Pillar::EducationAccess,
            "educationqualityandequity" | "educationqualityequity" => {
                Pillar::EducationQualityEquity
            }
            "lifelonglearning" => Pillar::LifelongLearning,
            "technologyaccess" => Pillar::TechnologyAccess,
            "workopportunities" => Pillar::WorkOpportunities,
            "fairwages" => Pillar::FairWages,
            "workingconditions" => Pillar::WorkingConditions,
            "socialprotection" => Pillar::SocialProtection,
            "inclusiveinstitutions" | "efficientandinclusiveinstitutions" => {
                Pillar::InclusiveInstitutions
            }
            _ => return Err(format!("unknown pillar `{s}`")),
        };
        Ok(found)
    }
}

/// Whether a larger raw value is socially better (`Positive`) or worse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Positive,
    Negative,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "positive" => Ok(Direction::Positive),
            "negative" => Ok(Direction::Negative),
            _ => Err(format!(
                "unknown direction `{s}` (expected positive or negative)"
            )),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Positive => "positive",
            Direction::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndicatorSpec {
    pub id: String,
    pub name: String,
    pub pillar: Pillar,
    pub direction: Direction,
}

/// Ordered indicator list. Its order is the column order of every matrix
/// built from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorRegistry {
    specs: Vec<IndicatorSpec>,
}

impl IndicatorRegistry {
    /// Fails on an empty or duplicated id. The two-indicator minimum is
    /// enforced when observations are loaded, not here.
    pub fn new(specs: Vec<IndicatorSpec>) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, spec) in specs.iter().enumerate() {
            if spec.id.is_empty() {
                return Err(SmiError::Schema {
                    path: "<registry>".into(),
                    message: format!("indicator {} has an empty id", i + 1),
                });
            }
            if let Some(first) = seen.insert(spec.id.as_str(), i) {
                return Err(SmiError::DuplicateIndicator {
                    path: "<registry>".into(),
                    id: spec.id.clone(),
                    first_row: first + 1,
                    second_row: i + 1,
                });
            }
        }
        Ok(Self { specs })
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[IndicatorSpec] {
        &self.specs
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.id.as_str())
    }

    pub fn get(&self, id: &str) -> Option<&IndicatorSpec> {
        self.specs.iter().find(|s| s.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.id == id)
    }

    /// Column indices of each pillar, in canonical pillar order. Pillars
    /// without indicators are absent.
    pub fn pillar_groups(&self) -> BTreeMap<Pillar, Vec<usize>> {
        let mut groups: BTreeMap<Pillar, Vec<usize>> = BTreeMap::new();
        for (i, spec) in self.specs.iter().enumerate() {
            groups.entry(spec.pillar).or_default().push(i);
        }
        groups
    }
}

/// Raw observations: one row per state, one column per registry indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    registry: Arc<IndicatorRegistry>,
    states: Vec<String>,
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(
        registry: Arc<IndicatorRegistry>,
        states: Vec<String>,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if registry.len() < 2 {
            return Err(SmiError::TooFew {
                what: "indicators",
                required: 2,
                found: registry.len(),
            });
        }
        if states.len() < 3 {
            return Err(SmiError::TooFew {
                what: "states",
                required: 3,
                found: states.len(),
            });
        }
        if values.nrows() != states.len() || values.ncols() != registry.len() {
            return Err(SmiError::Dimension(format!(
                "values are {}x{}, labels are {}x{}",
                values.nrows(),
                values.ncols(),
                states.len(),
                registry.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (r, c) = (idx % values.nrows(), idx / values.nrows());
            return Err(SmiError::Dimension(format!(
                "non-finite value at ({}, {})",
                states[r],
                registry.specs()[c].id
            )));
        }
        Ok(Self {
            registry,
            states,
            values,
        })
    }

    pub fn registry(&self) -> &IndicatorRegistry {
        &self.registry
    }

    pub fn registry_arc(&self) -> Arc<IndicatorRegistry> {
        Arc::clone(&self.registry)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Writes the matrix in the observations schema with exact round-trip
    /// number formatting.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let ids: Vec<&str> = self.registry.ids().collect();
        write_labeled(path, &self.states, &ids, &self.values)
    }
}

pub(crate) fn write_labeled<S: AsRef<str>>(
    path: &Path,
    states: &[String],
    columns: &[S],
    values: &DMatrix<f64>,
) -> Result<()> {
    let mut out = CsvOut::create(path)?;
    let mut header = vec!["state".to_owned()];
    header.extend(columns.iter().map(|c| c.as_ref().to_owned()));
    out.row(&header)?;
    for (r, state) in states.iter().enumerate() {
        let mut row = vec![state.clone()];
        row.extend(values.row(r).iter().map(|&v| csvio::exact(v)));
        out.row(&row)?;
    }
    out.finish()
}

/// State → Gini coefficient, each in `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GiniTable(BTreeMap<String, f64>);

impl GiniTable {
    pub fn new(entries: BTreeMap<String, f64>) -> Result<Self> {
        for (state, &g) in &entries {
            if !(0.0..=1.0).contains(&g) {
                return Err(SmiError::Schema {
                    path: "<gini>".into(),
                    message: format!("Gini for `{state}` is {g}, outside [0, 1]"),
                });
            }
        }
        Ok(Self(entries))
    }

    pub fn get(&self, state: &str) -> Option<f64> {
        self.0.get(state).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Reads `indicator_id,name,pillar,direction`.
pub fn load_indicator_metadata(path: &Path) -> Result<IndicatorRegistry> {
    let mut rdr = csvio::reader(path)?;
    let header = csvio::headers(path, &mut rdr)?;
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(SmiError::Schema {
            path: path.to_path_buf(),
            message: "file is empty".to_owned(),
        });
    }
    csvio::expect_header(
        path,
        &header,
        &["indicator_id", "name", "pillar", "direction"],
    )?;

    let mut specs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, rec) in csvio::records(path, &mut rdr)? {
        let row_err = |message: String| SmiError::Row {
            path: path.to_path_buf(),
            row: line,
            message,
        };
        let id = rec[0].to_owned();
        if id.is_empty() {
            return Err(row_err("empty indicator id".to_owned()));
        }
        if let Some(&first) = seen.get(&id) {
            return Err(SmiError::DuplicateIndicator {
                path: path.to_path_buf(),
                id,
                first_row: first,
                second_row: line,
            });
        }
        let pillar = rec[2].parse::<Pillar>().map_err(row_err)?;
        let direction = rec[3].parse::<Direction>().map_err(row_err)?;
        seen.insert(id.clone(), line);
        specs.push(IndicatorSpec {
            id,
            name: rec[1].to_owned(),
            pillar,
            direction,
        });
    }
    if specs.is_empty() {
        return Err(SmiError::Schema {
            path: path.to_path_buf(),
            message: "no indicator rows".to_owned(),
        });
    }
    IndicatorRegistry::new(specs)
}

/// Reads `state,<id1>,<id2>,...` where the ids are exactly the registry ids
/// in registry order.
pub fn load_observations(path: &Path, registry: Arc<IndicatorRegistry>) -> Result<DataMatrix> {
    if registry.len() < 2 {
        return Err(SmiError::TooFew {
            what: "indicators",
            required: 2,
            found: registry.len(),
        });
    }
    let mut rdr = csvio::reader(path)?;
    let header = csvio::headers(path, &mut rdr)?;
    check_matrix_header(path, &header, registry.ids())?;

    let (states, values) = read_matrix_body(path, &mut rdr, &header[1..])?;
    DataMatrix::new(registry, states, values)
}

pub(crate) fn check_matrix_header<'a>(
    path: &Path,
    header: &[String],
    expected: impl Iterator<Item = &'a str>,
) -> Result<()> {
    let expected: Vec<&str> = expected.collect();
    let first_ok = header.first().map(String::as_str) == Some("state");
    let cols: Vec<&str> = header.iter().skip(1).map(String::as_str).collect();
    if first_ok && cols == expected {
        return Ok(());
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|id| !cols.contains(id))
        .map(|s| s.to_string())
        .collect();
    let extra: Vec<String> = cols
        .iter()
        .filter(|c| !expected.contains(c))
        .map(|s| s.to_string())
        .collect();
    if !first_ok {
        return Err(SmiError::Schema {
            path: path.to_path_buf(),
            message: format!(
                "first column must be `state`, found `{}`",
                header.first().map(String::as_str).unwrap_or("")
            ),
        });
    }
    Err(SmiError::HeaderMismatch {
        path: path.to_path_buf(),
        out_of_order: missing.is_empty() && extra.is_empty(),
        missing,
        extra,
    })
}

/// Parses the state column and the numeric body of a labelled matrix file,
/// collecting every bad cell before failing.
pub(crate) fn read_matrix_body(
    path: &Path,
    rdr: &mut csv::Reader<std::fs::File>,
    columns: &[String],
) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut states = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut bad = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, rec) in csvio::records(path, rdr)? {
        let state = rec[0].to_owned();
        if state.is_empty() {
            return Err(SmiError::Row {
                path: path.to_path_buf(),
                row: line,
                message: "empty state name".to_owned(),
            });
        }
        if let Some(&first) = seen.get(&state) {
            return Err(SmiError::DuplicateState {
                path: path.to_path_buf(),
                state,
                first_row: first,
                second_row: line,
            });
        }
        seen.insert(state.clone(), line);
        for (raw, column) in rec.iter().skip(1).zip(columns) {
            match csvio::parse_f64(raw) {
                Some(v) => rows.push(v),
                None => {
                    bad.push(BadCell {
                        state: state.clone(),
                        indicator: column.clone(),
                        raw: raw.to_owned(),
                    });
                    rows.push(f64::NAN);
                }
            }
        }
        states.push(state);
    }
    if !bad.is_empty() {
        return Err(SmiError::BadCells {
            path: path.to_path_buf(),
            cells: bad,
        });
    }
    if states.len() < 3 {
        return Err(SmiError::TooFew {
            what: "states",
            required: 3,
            found: states.len(),
        });
    }
    let values = DMatrix::from_row_slice(states.len(), columns.len(), &rows);
    Ok((states, values))
}

/// Reads `state,gini`. A zero-byte file yields an empty table.
pub fn load_gini(path: &Path) -> Result<GiniTable> {
    let meta = std::fs::metadata(path).map_err(|e| SmiError::io(path, e))?;
    if meta.len() == 0 {
        return Ok(GiniTable::default());
    }
    let mut rdr = csvio::reader(path)?;
    let header = csvio::headers(path, &mut rdr)?;
    csvio::expect_header(path, &header, &["state", "gini"])?;

    let mut entries = BTreeMap::new();
    let mut rows: HashMap<String, usize> = HashMap::new();
    for (line, rec) in csvio::records(path, &mut rdr)? {
        let state = rec[0].to_owned();
        let value = csvio::parse_f64(&rec[1]).ok_or_else(|| SmiError::Row {
            path: path.to_path_buf(),
            row: line,
            message: format!("Gini `{}` is not a number", &rec[1]),
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(SmiError::Row {
                path: path.to_path_buf(),
                row: line,
                message: format!("Gini {value} for `{state}` is outside [0, 1]"),
            });
        }
        if let Some(&first) = rows.get(&state) {
            return Err(SmiError::DuplicateState {
                path: path.to_path_buf(),
                state,
                first_row: first,
                second_row: line,
            });
        }
        rows.insert(state.clone(), line);
        entries.insert(state, value);
    }
    GiniTable::new(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub indicator: String,
    pub min: f64,
    pub max: f64,
    /// FATAL: `max == min` makes min-max normalization divide by zero.
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub columns: Vec<ColumnSummary>,
}

impl ValidationReport {
    pub fn fatal(&self) -> impl Iterator<Item = &ColumnSummary> {
        self.columns.iter().filter(|c| c.constant)
    }

    pub fn is_ok(&self) -> bool {
        self.fatal().next().is_none()
    }

    /// Converts FATAL entries into an error listing all of them.
    pub fn into_result(self) -> Result<Self> {
        let msgs: Vec<String> = self
            .fatal()
            .map(|c| format!("indicator `{}` is constant ({})", c.indicator, c.min))
            .collect();
        if msgs.is_empty() {
            Ok(self)
        } else {
            Err(SmiError::Validation(msgs))
        }
    }
}

pub fn validate(matrix: &DataMatrix) -> ValidationReport {
    let columns = matrix
        .registry()
        .specs()
        .iter()
        .zip(matrix.values().column_iter())
        .map(|(spec, col)| {
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ColumnSummary {
                indicator: spec.id.clone(),
                min,
                max,
                constant: max == min,
            }
        })
        .collect();
    ValidationReport { columns }
}
