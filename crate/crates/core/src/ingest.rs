//! Dataset loading and `[0, 1]` rescaling.
//!
//! Datasets are delimited text (RFC-4180 style) with a header row and a class
//! label in the last column. Missing values are written as marker tokens
//! (`"?"` and the empty field by default). Column types either come from a
//! sidecar schema file or are inferred: a column is numeric iff every
//! non-marker token parses as a finite real.
//!
//! Rescaling is a separate fit/apply pair so that min/max statistics can be
//! computed on a training fold and applied to held-out rows without leakage.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Errors produced while loading or rescaling datasets.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column:?}: cannot parse {token:?} as a finite number")]
    Parse {
        row: usize,
        column: String,
        token: String,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("dataset contains no data rows")]
    EmptyDataset,
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("row {row}: class label is a missing-value marker; labels may not be missing")]
    MissingLabel { row: usize },
}

/// Column type: numeric or categorical with an ordered category list.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Numeric,
    Categorical(Vec<String>),
}

/// Name and kind of a single column.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Categorical(categories),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Number of categories, or `None` for numeric attributes.
    pub fn arity(&self) -> Option<usize> {
        match &self.kind {
            AttributeKind::Numeric => None,
            AttributeKind::Categorical(cats) => Some(cats.len()),
        }
    }
}

/// A single value: a real, a 0-based category index, or missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Numeric(f64),
    Category(usize),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Numeric(v) => write!(f, "{v}"),
            Cell::Category(i) => write!(f, "#{i}"),
            Cell::Missing => write!(f, "?"),
        }
    }
}

/// Row-major table of cells with a class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Vec<AttributeSchema>,
    pub rows: Vec<Vec<Cell>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, validating the structural invariants: unique
    /// attribute names, non-empty duplicate-free category lists, uniform row
    /// width, in-range category indices and in-range labels.
    pub fn new(
        schema: Vec<AttributeSchema>,
        rows: Vec<Vec<Cell>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for attr in &schema {
            if !seen.insert(attr.name.as_str()) {
                return Err(IngestError::InvalidSchema(format!(
                    "duplicate attribute name {:?}",
                    attr.name
                )));
            }
            if let AttributeKind::Categorical(cats) = &attr.kind {
                if cats.is_empty() {
                    return Err(IngestError::InvalidSchema(format!(
                        "attribute {:?} has an empty category list",
                        attr.name
                    )));
                }
                let mut cat_seen = HashSet::new();
                for c in cats {
                    if !cat_seen.insert(c.as_str()) {
                        return Err(IngestError::InvalidSchema(format!(
                            "attribute {:?} lists category {:?} twice",
                            attr.name, c
                        )));
                    }
                }
            }
        }
        if rows.len() != labels.len() {
            return Err(IngestError::SchemaMismatch(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(IngestError::SchemaMismatch(format!(
                    "row {} has {} cells, schema has {} attributes",
                    i,
                    row.len(),
                    schema.len()
                )));
            }
            for (cell, attr) in row.iter().zip(&schema) {
                match (cell, &attr.kind) {
                    (Cell::Numeric(v), AttributeKind::Numeric) => {
                        if !v.is_finite() {
                            return Err(IngestError::InvalidSchema(format!(
                                "row {i}: non-finite value in attribute {:?}",
                                attr.name
                            )));
                        }
                    }
                    (Cell::Category(c), AttributeKind::Categorical(cats)) => {
                        if *c >= cats.len() {
                            return Err(IngestError::InvalidSchema(format!(
                                "row {i}: category index {c} out of range for attribute {:?}",
                                attr.name
                            )));
                        }
                    }
                    (Cell::Missing, _) => {}
                    _ => {
                        return Err(IngestError::SchemaMismatch(format!(
                            "row {i}: cell kind does not match attribute {:?}",
                            attr.name
                        )));
                    }
                }
            }
        }
        for (i, &label) in labels.iter().enumerate() {
            if label >= class_names.len() {
                return Err(IngestError::InvalidSchema(format!(
                    "row {i}: label {label} out of range ({} classes)",
                    class_names.len()
                )));
            }
        }
        Ok(Dataset {
            schema,
            rows,
            labels,
            class_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_attrs(&self) -> usize {
        self.schema.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Copies the given rows (in the given order) into a new dataset sharing
    /// the same schema and class names.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}

/// Where column types come from.
#[derive(Debug, Clone)]
pub enum SchemaSource<'a> {
    /// Numeric iff every non-marker token parses as a finite real; categorical
    /// otherwise, with categories in first-appearance order. The last column
    /// is the class.
    Infer,
    /// Sidecar schema file, one line per column: `name,kind[,cat1|cat2|...]`,
    /// where `kind` is `numeric`, `categorical` or (for the last column only)
    /// `class`.
    Sidecar(&'a Path),
}

/// Delimiter and missing-value markers used by [`load_csv`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub missing_markers: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            missing_markers: vec!["?".to_owned(), String::new()],
        }
    }
}

enum ColumnPlan {
    Numeric,
    /// Fixed vocabulary from the sidecar; unseen tokens become `Missing`.
    FixedCategorical(Vec<String>),
    /// Vocabulary collected from the data in first-appearance order.
    InferCategorical,
}

struct ClassPlan {
    name: String,
    /// Fixed class names, or first-appearance when empty.
    names: Vec<String>,
}

/// Loads a delimited text file into a typed [`Dataset`].
///
/// The header row is required and the last column holds the class label.
/// Every token listed in `options.missing_markers` becomes [`Cell::Missing`];
/// a marker in the class column is an error, since labels may not be missing.
pub fn load_csv(
    path: &Path,
    schema: SchemaSource<'_>,
    options: &LoadOptions,
) -> Result<Dataset, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let n_cols = headers.len();
    if n_cols < 2 {
        return Err(IngestError::InvalidSchema(
            "need at least one feature column and a class column".into(),
        ));
    }

    let mut records = Vec::new();
    for result in reader.records() {
        let record = result?;
        let row = records.len() + 1;
        if record.len() != n_cols {
            return Err(IngestError::SchemaMismatch(format!(
                "row {row} has {} fields, expected {n_cols}",
                record.len()
            )));
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(IngestError::EmptyDataset);
    }

    let markers: HashSet<&str> = options.missing_markers.iter().map(String::as_str).collect();
    let is_marker = |token: &str| markers.contains(token);

    let (mut names, plans, class_plan) = match schema {
        SchemaSource::Sidecar(schema_path) => parse_sidecar(schema_path, n_cols)?,
        SchemaSource::Infer => {
            let mut plans = Vec::with_capacity(n_cols - 1);
            for col in 0..n_cols - 1 {
                let numeric = records.iter().all(|r| {
                    let token = &r[col];
                    is_marker(token) || parse_finite(token).is_some()
                });
                plans.push(if numeric {
                    ColumnPlan::Numeric
                } else {
                    ColumnPlan::InferCategorical
                });
            }
            let class_plan = ClassPlan {
                name: headers[n_cols - 1].clone(),
                names: Vec::new(),
            };
            (Vec::new(), plans, class_plan)
        }
    };
    if names.is_empty() {
        names = headers[..n_cols - 1].to_vec();
    }

    // First-appearance vocabularies for inferred categorical columns and,
    // when not fixed by the sidecar, for the class column.
    let mut vocabs: Vec<Vec<String>> = plans
        .iter()
        .map(|plan| match plan {
            ColumnPlan::FixedCategorical(cats) => cats.clone(),
            _ => Vec::new(),
        })
        .collect();
    let mut class_names = class_plan.names.clone();
    let class_fixed = !class_names.is_empty();

    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (idx, record) in records.iter().enumerate() {
        let row_no = idx + 1;
        let mut row = Vec::with_capacity(n_cols - 1);
        for (col, plan) in plans.iter().enumerate() {
            let token = &record[col];
            if is_marker(token) {
                row.push(Cell::Missing);
                continue;
            }
            let cell = match plan {
                ColumnPlan::Numeric => match parse_finite(token) {
                    Some(v) => Cell::Numeric(v),
                    None => {
                        return Err(IngestError::Parse {
                            row: row_no,
                            column: names[col].clone(),
                            token: token.to_owned(),
                        });
                    }
                },
                ColumnPlan::FixedCategorical(cats) => {
                    // Tokens outside the declared vocabulary carry no positive
                    // information for any known category: treat as missing.
                    match cats.iter().position(|c| c == token) {
                        Some(i) => Cell::Category(i),
                        None => Cell::Missing,
                    }
                }
                ColumnPlan::InferCategorical => {
                    let vocab = &mut vocabs[col];
                    let i = match vocab.iter().position(|c| c == token) {
                        Some(i) => i,
                        None => {
                            vocab.push(token.to_owned());
                            vocab.len() - 1
                        }
                    };
                    Cell::Category(i)
                }
            };
            row.push(cell);
        }
        let class_token = &record[n_cols - 1];
        if is_marker(class_token) {
            return Err(IngestError::MissingLabel { row: row_no });
        }
        let label = match class_names.iter().position(|c| c == class_token) {
            Some(i) => i,
            None if class_fixed => {
                return Err(IngestError::Parse {
                    row: row_no,
                    column: class_plan.name.clone(),
                    token: class_token.to_owned(),
                });
            }
            None => {
                class_names.push(class_token.to_owned());
                class_names.len() - 1
            }
        };
        rows.push(row);
        labels.push(label);
    }

    let schema = plans
        .iter()
        .zip(&names)
        .zip(vocabs)
        .map(|((plan, name), vocab)| match plan {
            ColumnPlan::Numeric => AttributeSchema::numeric(name.clone()),
            _ => AttributeSchema::categorical(name.clone(), vocab),
        })
        .collect();
    Dataset::new(schema, rows, labels, class_names)
}

fn parse_finite(token: &str) -> Option<f64> {
    token.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_sidecar(
    path: &Path,
    n_cols: usize,
) -> Result<(Vec<String>, Vec<ColumnPlan>, ClassPlan), IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.len() != n_cols {
        return Err(IngestError::SchemaMismatch(format!(
            "schema file declares {} columns, data has {n_cols}",
            lines.len()
        )));
    }

    let mut names = Vec::with_capacity(n_cols - 1);
    let mut plans = Vec::with_capacity(n_cols - 1);
    let mut class_plan = None;
    for (i, line) in lines.iter().enumerate() {
        let mut parts = line.splitn(3, ',');
        let name = parts.next().unwrap_or("").trim().to_owned();
        let kind = parts.next().unwrap_or("").trim().to_ascii_lowercase();
        let list: Vec<String> = parts
            .next()
            .map(|s| {
                s.split('|')
                    .map(|c| c.trim().to_owned())
                    .filter(|c| !c.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        let last = i == n_cols - 1;
        match kind.as_str() {
            "class" if last => {
                class_plan = Some(ClassPlan { name, names: list });
            }
            "class" => {
                return Err(IngestError::InvalidSchema(format!(
                    "column {:?} declared as class, but only the last column may be",
                    name
                )));
            }
            _ if last => {
                return Err(IngestError::InvalidSchema(
                    "the last schema line must declare the class column".into(),
                ));
            }
            "numeric" => {
                names.push(name);
                plans.push(ColumnPlan::Numeric);
            }
            "categorical" => {
                names.push(name);
                plans.push(if list.is_empty() {
                    ColumnPlan::InferCategorical
                } else {
                    ColumnPlan::FixedCategorical(list)
                });
            }
            other => {
                return Err(IngestError::InvalidSchema(format!(
                    "unknown column kind {other:?} for column {name:?}"
                )));
            }
        }
    }
    Ok((names, plans, class_plan.expect("class plan set for last line")))
}

/// Per-attribute min/max of the non-missing training values. `None` entries
/// are categorical attributes, which scaling leaves untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    ranges: Vec<Option<NumericRange>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericRange {
    pub min: f64,
    pub max: f64,
}

impl ScalingParams {
    pub fn ranges(&self) -> &[Option<NumericRange>] {
        &self.ranges
    }
}

/// Computes per-attribute min/max over the non-missing training values.
///
/// A constant column yields `min == max`; an all-missing column yields the
/// `(0, 0)` sentinel. Both make [`apply_scaling`] send every non-missing
/// value to the midrange 0.5.
pub fn fit_scaling(train: &Dataset) -> ScalingParams {
    let ranges = train
        .schema
        .iter()
        .enumerate()
        .map(|(col, attr)| {
            if !attr.is_numeric() {
                return None;
            }
            let mut range: Option<NumericRange> = None;
            for row in &train.rows {
                if let Cell::Numeric(v) = row[col] {
                    range = Some(match range {
                        None => NumericRange { min: v, max: v },
                        Some(r) => NumericRange {
                            min: r.min.min(v),
                            max: r.max.max(v),
                        },
                    });
                }
            }
            Some(range.unwrap_or(NumericRange { min: 0.0, max: 0.0 }))
        })
        .collect();
    ScalingParams { ranges }
}

/// Rescales numeric attributes to `[0, 1]` with the fitted parameters.
///
/// Values outside the training range are clamped, so held-out rows always
/// land inside the unit interval; constant training columns map to 0.5.
/// Missing cells stay missing and categorical attributes are untouched.
pub fn apply_scaling(data: &Dataset, params: &ScalingParams) -> Result<Dataset, IngestError> {
    if params.ranges.len() != data.schema.len() {
        return Err(IngestError::SchemaMismatch(format!(
            "scaling parameters cover {} attributes, dataset has {}",
            params.ranges.len(),
            data.schema.len()
        )));
    }
    for (attr, range) in data.schema.iter().zip(&params.ranges) {
        if attr.is_numeric() != range.is_some() {
            return Err(IngestError::SchemaMismatch(format!(
                "scaling parameters do not match attribute {:?}",
                attr.name
            )));
        }
    }
    let rows = data
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&params.ranges)
                .map(|(cell, range)| match (cell, range) {
                    (Cell::Numeric(v), Some(r)) => {
                        if r.max > r.min {
                            Cell::Numeric(((v - r.min) / (r.max - r.min)).clamp(0.0, 1.0))
                        } else {
                            Cell::Numeric(0.5)
                        }
                    }
                    _ => *cell,
                })
                .collect()
        })
        .collect();
    Ok(Dataset {
        schema: data.schema.clone(),
        rows,
        labels: data.labels.clone(),
        class_names: data.class_names.clone(),
    })
}
