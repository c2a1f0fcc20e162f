//! Encoding schemes turning a [`Dataset`] into a dense real matrix.
//!
//! Two families are provided:
//!
//! * **Polar encodings** represent a `[0, 1]` value `x` as a pair — either
//!   `⟨x, 1 − x⟩` (Boscovich) or `⟨sin(xπ/2), cos(xπ/2)⟩` (Euclidean) — and a
//!   categorical value as a redundant one-hot vector. Missing values become
//!   the all-zero vector in both cases, so missingness is carried by the
//!   geometry itself rather than by extra columns.
//! * **The imputation baseline** replaces missing numeric values with the
//!   training mean and missing categories with the training mode, optionally
//!   appending one binary missing-indicator column per attribute that had
//!   missing values in the training data.
//!
//! Every encoder records column provenance (which source attribute produced
//! which columns, and in what role) so that downstream consumers can reason
//! about the matrix structurally.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

use crate::ingest::{
    apply_scaling, fit_scaling, AttributeKind, Cell, Dataset, IngestError, ScalingParams,
};

/// Errors produced by the encoders.
#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("value {0} outside [0, 1]; inputs must be rescaled before encoding")]
    Domain(f64),
    #[error("category index {index} out of range for arity {arity}")]
    CategoryOutOfRange { index: usize, arity: usize },
    #[error("missing value cannot be represented in the compact form")]
    MissingNotRepresentable,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown encoding {0:?}; valid names: polar-boscovich, polar-euclidean, impute-indicator, impute-only")]
    UnknownChoice(String),
    #[error("invalid encoding pairing: {0}")]
    InvalidPairing(String),
    #[error("malformed encoded matrix: {0}")]
    MalformedMatrix(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Which polar map to apply to numeric attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarVariant {
    Boscovich,
    Euclidean,
}

impl fmt::Display for PolarVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolarVariant::Boscovich => write!(f, "boscovich"),
            PolarVariant::Euclidean => write!(f, "euclidean"),
        }
    }
}

/// Maps `x ∈ [0, 1]` to `⟨x, 1 − x⟩`; missing maps to `⟨0, 0⟩`.
///
/// Non-missing outputs lie on the non-negative quadrant of the Boscovich
/// (taxicab) unit circle; the missing point is the unique output with norm 0.
pub fn polar_encode_boscovich(x: Option<f64>) -> Result<[f64; 2], EncodingError> {
    match x {
        None => Ok([0.0, 0.0]),
        Some(v) if (0.0..=1.0).contains(&v) => Ok([v, 1.0 - v]),
        Some(v) => Err(EncodingError::Domain(v)),
    }
}

/// Maps `x ∈ [0, 1]` to `⟨sin(xπ/2), cos(xπ/2)⟩`; missing maps to `⟨0, 0⟩`.
///
/// Non-missing outputs lie on the non-negative quadrant of the Euclidean unit
/// circle, making distance an arc-length-like chord measure.
pub fn polar_encode_euclidean(x: Option<f64>) -> Result<[f64; 2], EncodingError> {
    match x {
        None => Ok([0.0, 0.0]),
        Some(v) if (0.0..=1.0).contains(&v) => {
            let angle = v * std::f64::consts::FRAC_PI_2;
            Ok([angle.sin(), angle.cos()])
        }
        Some(v) => Err(EncodingError::Domain(v)),
    }
}

fn polar_encode(x: Option<f64>, variant: PolarVariant) -> Result<[f64; 2], EncodingError> {
    match variant {
        PolarVariant::Boscovich => polar_encode_boscovich(x),
        PolarVariant::Euclidean => polar_encode_euclidean(x),
    }
}

/// Redundant one-hot: category `i` becomes the standard basis vector `e_i` of
/// length `arity`; missing becomes the all-zero vector.
pub fn one_hot_redundant(c: Option<usize>, arity: usize) -> Result<Vec<f64>, EncodingError> {
    let mut v = vec![0.0; arity];
    match c {
        None => Ok(v),
        Some(i) if i < arity => {
            v[i] = 1.0;
            Ok(v)
        }
        Some(i) => Err(EncodingError::CategoryOutOfRange {
            index: i,
            arity,
        }),
    }
}

/// Compact one-hot: drops the last coordinate, sending the last category to
/// the all-zero vector of length `arity − 1`.
///
/// The compact form has no representation left over for missing values — the
/// zero vector already means "last category" — so missing input is an error.
pub fn one_hot_compact(c: Option<usize>, arity: usize) -> Result<Vec<f64>, EncodingError> {
    match c {
        None => Err(EncodingError::MissingNotRepresentable),
        Some(i) if i < arity => {
            let mut v = vec![0.0; arity - 1];
            if i < arity - 1 {
                v[i] = 1.0;
            }
            Ok(v)
        }
        Some(i) => Err(EncodingError::CategoryOutOfRange {
            index: i,
            arity,
        }),
    }
}

/// Role of a single encoded column, recorded as provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    /// First polar coordinate (`x` or `sin(xπ/2)`).
    PolarPos,
    /// Second polar coordinate (`1 − x` or `cos(xπ/2)`).
    PolarNeg,
    /// One coordinate of a one-hot block.
    OneHot,
    /// Binary missing indicator.
    Indicator,
    /// Imputed numeric value.
    Imputed,
}

/// The encoded columns produced by one source attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnGroup {
    /// Index of the source attribute in the dataset schema.
    pub attribute: usize,
    /// Name of the source attribute.
    pub name: String,
    /// First column of the group.
    pub start: usize,
    /// Role of each column in the group, in order; the group's span is the
    /// length of this vector.
    pub roles: Vec<ColumnRole>,
}

impl ColumnGroup {
    pub fn span(&self) -> usize {
        self.roles.len()
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.roles.len()
    }
}

/// Dense row-major matrix of encoded values with column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    n_rows: usize,
    n_cols: usize,
    /// Row-major values, `n_rows × n_cols`.
    data: Vec<f64>,
    /// One name per column, e.g. `height.pos`, `color=red`, `height.missing`.
    pub column_names: Vec<String>,
    /// Contiguous column groups in schema order, one per source attribute.
    pub groups: Vec<ColumnGroup>,
}

impl EncodedMatrix {
    /// Builds a matrix, validating that the groups tile the columns exactly
    /// and that names and data sizes agree.
    pub fn new(
        n_rows: usize,
        data: Vec<f64>,
        column_names: Vec<String>,
        groups: Vec<ColumnGroup>,
    ) -> Result<Self, EncodingError> {
        let n_cols = column_names.len();
        if data.len() != n_rows * n_cols {
            return Err(EncodingError::MalformedMatrix(format!(
                "{} values for {n_rows}×{n_cols} matrix",
                data.len()
            )));
        }
        let mut next = 0;
        for group in &groups {
            if group.start != next || group.roles.is_empty() {
                return Err(EncodingError::MalformedMatrix(format!(
                    "group for attribute {:?} does not tile the columns",
                    group.name
                )));
            }
            next += group.roles.len();
        }
        if next != n_cols {
            return Err(EncodingError::MalformedMatrix(format!(
                "groups cover {next} of {n_cols} columns"
            )));
        }
        Ok(EncodedMatrix {
            n_rows,
            n_cols,
            data,
            column_names,
            groups,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols.max(1))
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    /// Copies the given rows (in the given order) into a new matrix with the
    /// same columns and provenance.
    pub fn subset(&self, indices: &[usize]) -> EncodedMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        EncodedMatrix {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            data,
            column_names: self.column_names.clone(),
            groups: self.groups.clone(),
        }
    }

    /// Writes the matrix as delimited text with a provenance header.
    ///
    /// Values use the shortest decimal form that parses back to the same
    /// float, so a write/read round trip reproduces every value exactly.
    pub fn write_delimited(&self, out: &mut dyn Write, delimiter: u8) -> std::io::Result<()> {
        let sep = delimiter as char;
        let mut header = String::new();
        for (i, name) in self.column_names.iter().enumerate() {
            if i > 0 {
                header.push(sep);
            }
            header.push_str(name);
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for row in self.rows() {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(sep);
                }
                line.push_str(&format!("{v}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a matrix previously written by [`write_delimited`].
    ///
    /// Provenance is reconstructed from the column names (`attr.pos`,
    /// `attr.neg`, `attr=cat`, `attr.missing`, `attr.imputed`); attribute
    /// names containing the tag separators themselves may group differently,
    /// but values and column names always round-trip.
    ///
    /// [`write_delimited`]: EncodedMatrix::write_delimited
    pub fn read_delimited(input: &mut dyn BufRead, delimiter: u8) -> Result<Self, EncodingError> {
        let sep = delimiter as char;
        let mut lines = input.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line =
                        line.map_err(|e| EncodingError::MalformedMatrix(e.to_string()))?;
                    // tolerate leading comment lines (e.g. a provenance note)
                    if line.starts_with('#') {
                        continue;
                    }
                    break line;
                }
                None => return Err(EncodingError::MalformedMatrix("empty input".into())),
            }
        };
        let column_names: Vec<String> = header.split(sep).map(str::to_owned).collect();
        let n_cols = column_names.len();
        let mut data = Vec::new();
        let mut n_rows = 0;
        for line in lines {
            let line = line.map_err(|e| EncodingError::MalformedMatrix(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let mut width = 0;
            for token in line.split(sep) {
                let v: f64 = token.parse().map_err(|_| {
                    EncodingError::MalformedMatrix(format!("bad value {token:?}"))
                })?;
                data.push(v);
                width += 1;
            }
            if width != n_cols {
                return Err(EncodingError::MalformedMatrix(format!(
                    "row {} has {width} values, header has {n_cols}",
                    n_rows + 1
                )));
            }
            n_rows += 1;
        }
        let groups = groups_from_names(&column_names);
        EncodedMatrix::new(n_rows, data, column_names, groups)
    }
}

/// Splits a column name into (attribute, role); used to rebuild provenance
/// when reading a serialised matrix.
fn parse_column_name(name: &str) -> (String, ColumnRole) {
    if let Some((attr, _)) = name.split_once('=') {
        return (attr.to_owned(), ColumnRole::OneHot);
    }
    if let Some((attr, tag)) = name.rsplit_once('.') {
        let role = match tag {
            "pos" => Some(ColumnRole::PolarPos),
            "neg" => Some(ColumnRole::PolarNeg),
            "missing" => Some(ColumnRole::Indicator),
            "imputed" => Some(ColumnRole::Imputed),
            _ => None,
        };
        if let Some(role) = role {
            return (attr.to_owned(), role);
        }
    }
    (name.to_owned(), ColumnRole::Imputed)
}

fn groups_from_names(names: &[String]) -> Vec<ColumnGroup> {
    let mut groups: Vec<ColumnGroup> = Vec::new();
    for (col, name) in names.iter().enumerate() {
        let (attr, role) = parse_column_name(name);
        match groups.last_mut() {
            Some(last) if last.name == attr => last.roles.push(role),
            _ => groups.push(ColumnGroup {
                attribute: groups.len(),
                name: attr,
                start: col,
                roles: vec![role],
            }),
        }
    }
    // Re-number attributes in case two adjacent attributes share a name.
    for (i, g) in groups.iter_mut().enumerate() {
        g.attribute = i;
    }
    groups
}

/// Imputation value for one attribute of the baseline encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum ImputedValue {
    /// Mean of the non-missing training values (0.5 when all are missing).
    Mean(f64),
    /// Mode category index (ties broken toward the lowest index; 0 when all
    /// training values are missing).
    Mode(usize),
}

/// Training-fold statistics for the imputation baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputationParams {
    /// One imputation value per attribute, in schema order.
    pub values: Vec<ImputedValue>,
    /// Whether each attribute had at least one missing training value; only
    /// these attributes receive indicator columns.
    pub had_missing: Vec<bool>,
    /// When false, no indicator columns are emitted at all (imputation-only
    /// ablation).
    pub indicators: bool,
}

impl ImputationParams {
    /// Returns a copy that emits no indicator columns.
    pub fn without_indicators(&self) -> ImputationParams {
        ImputationParams {
            indicators: false,
            ..self.clone()
        }
    }
}

/// Computes per-attribute imputation statistics over the training rows:
/// numeric attributes get the mean of their non-missing values, categorical
/// attributes the mode (ties toward the lowest index). All-missing attributes
/// fall back to 0.5 / category 0.
pub fn fit_imputation(train: &Dataset) -> ImputationParams {
    let mut values = Vec::with_capacity(train.n_attrs());
    let mut had_missing = Vec::with_capacity(train.n_attrs());
    for (col, attr) in train.schema.iter().enumerate() {
        let mut missing = false;
        let value = match &attr.kind {
            AttributeKind::Numeric => {
                let mut sum = 0.0;
                let mut count = 0usize;
                for row in &train.rows {
                    match row[col] {
                        Cell::Numeric(v) => {
                            sum += v;
                            count += 1;
                        }
                        Cell::Missing => missing = true,
                        Cell::Category(_) => unreachable!("validated by Dataset::new"),
                    }
                }
                ImputedValue::Mean(if count > 0 { sum / count as f64 } else { 0.5 })
            }
            AttributeKind::Categorical(cats) => {
                let mut counts = vec![0usize; cats.len()];
                for row in &train.rows {
                    match row[col] {
                        Cell::Category(c) => counts[c] += 1,
                        Cell::Missing => missing = true,
                        Cell::Numeric(_) => unreachable!("validated by Dataset::new"),
                    }
                }
                let mut best = 0;
                for (i, &n) in counts.iter().enumerate() {
                    if n > counts[best] {
                        best = i;
                    }
                }
                ImputedValue::Mode(best)
            }
        };
        values.push(value);
        had_missing.push(missing);
    }
    ImputationParams {
        values,
        had_missing,
        indicators: true,
    }
}

fn check_imputation_schema(
    data: &Dataset,
    params: &ImputationParams,
) -> Result<(), EncodingError> {
    if params.values.len() != data.n_attrs() || params.had_missing.len() != data.n_attrs() {
        return Err(EncodingError::SchemaMismatch(format!(
            "imputation parameters cover {} attributes, dataset has {}",
            params.values.len(),
            data.n_attrs()
        )));
    }
    for (attr, value) in data.schema.iter().zip(&params.values) {
        let ok = match (&attr.kind, value) {
            (AttributeKind::Numeric, ImputedValue::Mean(_)) => true,
            (AttributeKind::Categorical(cats), ImputedValue::Mode(m)) => m < &cats.len(),
            _ => false,
        };
        if !ok {
            return Err(EncodingError::SchemaMismatch(format!(
                "imputation parameters do not match attribute {:?}",
                attr.name
            )));
        }
    }
    Ok(())
}

/// Encodes with mean/mode imputation plus missing indicators.
///
/// Numeric attributes become one imputed column; categorical attributes a
/// redundant one-hot block of the (imputed-if-missing) category. Attributes
/// that had missing training values additionally get one binary indicator
/// column (1 iff the cell was missing), unless indicators are disabled.
pub fn encode_baseline(
    data: &Dataset,
    params: &ImputationParams,
) -> Result<EncodedMatrix, EncodingError> {
    check_imputation_schema(data, params)?;
    let mut column_names = Vec::new();
    let mut groups = Vec::new();
    for (a, attr) in data.schema.iter().enumerate() {
        let start = column_names.len();
        let mut roles = Vec::new();
        match &attr.kind {
            AttributeKind::Numeric => {
                column_names.push(format!("{}.imputed", attr.name));
                roles.push(ColumnRole::Imputed);
            }
            AttributeKind::Categorical(cats) => {
                for cat in cats {
                    column_names.push(format!("{}={}", attr.name, cat));
                    roles.push(ColumnRole::OneHot);
                }
            }
        }
        if params.indicators && params.had_missing[a] {
            column_names.push(format!("{}.missing", attr.name));
            roles.push(ColumnRole::Indicator);
        }
        groups.push(ColumnGroup {
            attribute: a,
            name: attr.name.clone(),
            start,
            roles,
        });
    }

    let n_cols = column_names.len();
    let mut values = Vec::with_capacity(data.n_rows() * n_cols);
    for row in &data.rows {
        for (a, attr) in data.schema.iter().enumerate() {
            let cell = row[a];
            match (&attr.kind, &params.values[a]) {
                (AttributeKind::Numeric, ImputedValue::Mean(mean)) => {
                    values.push(match cell {
                        Cell::Numeric(v) => v,
                        _ => *mean,
                    });
                }
                (AttributeKind::Categorical(cats), ImputedValue::Mode(mode)) => {
                    let c = match cell {
                        Cell::Category(c) => c,
                        _ => *mode,
                    };
                    values.extend(one_hot_redundant(Some(c), cats.len())?);
                }
                _ => unreachable!("checked by check_imputation_schema"),
            }
            if params.indicators && params.had_missing[a] {
                values.push(if cell.is_missing() { 1.0 } else { 0.0 });
            }
        }
    }
    EncodedMatrix::new(data.n_rows(), values, column_names, groups)
}

/// Encodes with the polar map: each numeric attribute becomes its two polar
/// columns, each categorical attribute a redundant one-hot block, and missing
/// values become zero vectors in both.
pub fn encode_polar(
    data: &Dataset,
    variant: PolarVariant,
) -> Result<EncodedMatrix, EncodingError> {
    let mut column_names = Vec::new();
    let mut groups = Vec::new();
    for (a, attr) in data.schema.iter().enumerate() {
        let start = column_names.len();
        let roles = match &attr.kind {
            AttributeKind::Numeric => {
                column_names.push(format!("{}.pos", attr.name));
                column_names.push(format!("{}.neg", attr.name));
                vec![ColumnRole::PolarPos, ColumnRole::PolarNeg]
            }
            AttributeKind::Categorical(cats) => {
                for cat in cats {
                    column_names.push(format!("{}={}", attr.name, cat));
                }
                vec![ColumnRole::OneHot; cats.len()]
            }
        };
        groups.push(ColumnGroup {
            attribute: a,
            name: attr.name.clone(),
            start,
            roles,
        });
    }

    let n_cols = column_names.len();
    let mut values = Vec::with_capacity(data.n_rows() * n_cols);
    for row in &data.rows {
        for (a, attr) in data.schema.iter().enumerate() {
            match &attr.kind {
                AttributeKind::Numeric => {
                    let x = match row[a] {
                        Cell::Numeric(v) => Some(v),
                        _ => None,
                    };
                    values.extend(polar_encode(x, variant)?);
                }
                AttributeKind::Categorical(cats) => {
                    let c = match row[a] {
                        Cell::Category(c) => Some(c),
                        _ => None,
                    };
                    values.extend(one_hot_redundant(c, cats.len())?);
                }
            }
        }
    }
    EncodedMatrix::new(data.n_rows(), values, column_names, groups)
}

/// Scheme applied to numeric attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericScheme {
    PolarBoscovich,
    PolarEuclidean,
    ImputeIndicator,
}

/// Scheme applied to categorical attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoricalScheme {
    PolarOneHot,
    ImputeIndicatorOneHot,
}

/// A validated pairing of numeric and categorical schemes.
///
/// The baseline is a package: imputation+indicators on numeric attributes
/// goes with imputation+indicators on categorical ones, and the polar numeric
/// maps go with plain redundant one-hot. Mixed pairings are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingSpec {
    numeric_scheme: NumericScheme,
    categorical_scheme: CategoricalScheme,
}

impl EncodingSpec {
    pub fn new(
        numeric_scheme: NumericScheme,
        categorical_scheme: CategoricalScheme,
    ) -> Result<Self, EncodingError> {
        let valid = match numeric_scheme {
            NumericScheme::ImputeIndicator => {
                categorical_scheme == CategoricalScheme::ImputeIndicatorOneHot
            }
            _ => categorical_scheme == CategoricalScheme::PolarOneHot,
        };
        if !valid {
            return Err(EncodingError::InvalidPairing(format!(
                "{numeric_scheme:?} cannot be paired with {categorical_scheme:?}"
            )));
        }
        Ok(EncodingSpec {
            numeric_scheme,
            categorical_scheme,
        })
    }

    pub fn numeric_scheme(&self) -> NumericScheme {
        self.numeric_scheme
    }

    pub fn categorical_scheme(&self) -> CategoricalScheme {
        self.categorical_scheme
    }
}

/// Named encoding configurations selectable from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingChoice {
    /// Polar `⟨x, 1 − x⟩` + redundant one-hot.
    PolarBoscovich,
    /// Polar `⟨sin, cos⟩` + redundant one-hot.
    PolarEuclidean,
    /// Mean/mode imputation with missing-indicator columns.
    ImputeIndicator,
    /// Mean/mode imputation with indicators disabled (ablation).
    ImputeOnly,
}

impl EncodingChoice {
    pub const ALL: [EncodingChoice; 4] = [
        EncodingChoice::PolarBoscovich,
        EncodingChoice::PolarEuclidean,
        EncodingChoice::ImputeIndicator,
        EncodingChoice::ImputeOnly,
    ];

    /// The scheme pairing realised by this choice.
    pub fn spec(&self) -> EncodingSpec {
        let (n, c) = match self {
            EncodingChoice::PolarBoscovich => {
                (NumericScheme::PolarBoscovich, CategoricalScheme::PolarOneHot)
            }
            EncodingChoice::PolarEuclidean => {
                (NumericScheme::PolarEuclidean, CategoricalScheme::PolarOneHot)
            }
            EncodingChoice::ImputeIndicator | EncodingChoice::ImputeOnly => (
                NumericScheme::ImputeIndicator,
                CategoricalScheme::ImputeIndicatorOneHot,
            ),
        };
        EncodingSpec::new(n, c).expect("all named choices are valid pairings")
    }
}

impl EncodingChoice {
    pub fn name(&self) -> &'static str {
        match self {
            EncodingChoice::PolarBoscovich => "polar-boscovich",
            EncodingChoice::PolarEuclidean => "polar-euclidean",
            EncodingChoice::ImputeIndicator => "impute-indicator",
            EncodingChoice::ImputeOnly => "impute-only",
        }
    }
}

impl fmt::Display for EncodingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for EncodingChoice {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EncodingChoice::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| EncodingError::UnknownChoice(s.to_owned()))
    }
}

/// Scaling and imputation statistics fitted on a training fold, bundled with
/// the encoding choice so that training and test partitions are encoded with
/// identical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedEncoding {
    choice: EncodingChoice,
    scaling: ScalingParams,
    imputation: Option<ImputationParams>,
}

impl FittedEncoding {
    /// Fits scaling (and, for the baseline choices, imputation) statistics on
    /// the training rows only.
    pub fn fit(train: &Dataset, choice: EncodingChoice) -> Result<Self, EncodingError> {
        let scaling = fit_scaling(train);
        let imputation = match choice {
            EncodingChoice::PolarBoscovich | EncodingChoice::PolarEuclidean => None,
            EncodingChoice::ImputeIndicator | EncodingChoice::ImputeOnly => {
                let scaled = apply_scaling(train, &scaling)?;
                let params = fit_imputation(&scaled);
                Some(match choice {
                    EncodingChoice::ImputeOnly => params.without_indicators(),
                    _ => params,
                })
            }
        };
        Ok(FittedEncoding {
            choice,
            scaling,
            imputation,
        })
    }

    /// Rescales and encodes a dataset with the fitted parameters. Works for
    /// the training fold itself and for held-out rows alike.
    pub fn encode(&self, data: &Dataset) -> Result<EncodedMatrix, EncodingError> {
        let scaled = apply_scaling(data, &self.scaling)?;
        match self.choice {
            EncodingChoice::PolarBoscovich => encode_polar(&scaled, PolarVariant::Boscovich),
            EncodingChoice::PolarEuclidean => encode_polar(&scaled, PolarVariant::Euclidean),
            EncodingChoice::ImputeIndicator | EncodingChoice::ImputeOnly => encode_baseline(
                &scaled,
                self.imputation.as_ref().expect("fitted for baseline"),
            ),
        }
    }

    pub fn choice(&self) -> EncodingChoice {
        self.choice
    }

    pub fn scaling(&self) -> &ScalingParams {
        &self.scaling
    }

    pub fn imputation(&self) -> Option<&ImputationParams> {
        self.imputation.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::AttributeSchema;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pair_eq(got: [f64; 2], want: [f64; 2]) {
        assert_abs_diff_eq!(got[0], want[0], epsilon = 1e-12);
        assert_abs_diff_eq!(got[1], want[1], epsilon = 1e-12);
    }

    #[test]
    fn boscovich_examples() {
        pair_eq(polar_encode_boscovich(Some(0.75)).unwrap(), [0.75, 0.25]);
        pair_eq(polar_encode_boscovich(None).unwrap(), [0.0, 0.0]);
        pair_eq(polar_encode_boscovich(Some(0.0)).unwrap(), [0.0, 1.0]);
    }

    #[test]
    fn euclidean_examples() {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        pair_eq(polar_encode_euclidean(Some(0.5)).unwrap(), [half, half]);
        pair_eq(polar_encode_euclidean(Some(1.0)).unwrap(), [1.0, 0.0]);
        pair_eq(polar_encode_euclidean(None).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        assert!(matches!(
            polar_encode_boscovich(Some(1.5)),
            Err(EncodingError::Domain(_))
        ));
        assert!(matches!(
            polar_encode_euclidean(Some(-0.1)),
            Err(EncodingError::Domain(_))
        ));
        assert!(matches!(
            polar_encode_boscovich(Some(f64::NAN)),
            Err(EncodingError::Domain(_))
        ));
    }

    #[test]
    fn one_hot_redundant_examples() {
        assert_eq!(one_hot_redundant(Some(1), 3).unwrap(), vec![0.0, 1.0, 0.0]);
        assert_eq!(one_hot_redundant(None, 3).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(one_hot_redundant(Some(0), 1).unwrap(), vec![1.0]);
        assert!(matches!(
            one_hot_redundant(Some(3), 3),
            Err(EncodingError::CategoryOutOfRange { index: 3, arity: 3 })
        ));
    }

    #[test]
    fn one_hot_compact_examples() {
        assert_eq!(one_hot_compact(Some(2), 3).unwrap(), vec![0.0, 0.0]);
        assert_eq!(one_hot_compact(Some(0), 3).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(
            one_hot_compact(None, 3),
            Err(EncodingError::MissingNotRepresentable)
        ));
    }

    proptest! {
        #[test]
        fn boscovich_lies_on_unit_l1_circle(x in 0.0f64..=1.0) {
            let [a, b] = polar_encode_boscovich(Some(x)).unwrap();
            prop_assert!((a.abs() + b.abs() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn euclidean_lies_on_unit_l2_circle(x in 0.0f64..=1.0) {
            let [a, b] = polar_encode_euclidean(Some(x)).unwrap();
            prop_assert!((a.hypot(b) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn polar_maps_injective(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            prop_assume!(x != y);
            let b1 = polar_encode_boscovich(Some(x)).unwrap();
            let b2 = polar_encode_boscovich(Some(y)).unwrap();
            prop_assert_ne!(b1, b2);
            let e1 = polar_encode_euclidean(Some(x)).unwrap();
            let e2 = polar_encode_euclidean(Some(y)).unwrap();
            prop_assert_ne!(e1, e2);
        }
    }

    fn toy_dataset() -> Dataset {
        // numeric x plus a 2-category colour, with one missing cell in each
        Dataset::new(
            vec![
                AttributeSchema::numeric("x"),
                AttributeSchema::categorical("color", vec!["red".into(), "blue".into()]),
            ],
            vec![
                vec![Cell::Numeric(0.2), Cell::Category(0)],
                vec![Cell::Missing, Cell::Category(0)],
                vec![Cell::Numeric(0.8), Cell::Missing],
            ],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn fit_imputation_mean_and_mode() {
        let ds = toy_dataset();
        let params = fit_imputation(&ds);
        assert_eq!(params.values[0], ImputedValue::Mean(0.5));
        assert_eq!(params.values[1], ImputedValue::Mode(0));
        assert_eq!(params.had_missing, vec![true, true]);
    }

    #[test]
    fn fit_imputation_mode_tie_breaks_low() {
        let ds = Dataset::new(
            vec![AttributeSchema::categorical(
                "c",
                vec!["a".into(), "b".into()],
            )],
            vec![vec![Cell::Category(1)], vec![Cell::Category(0)]],
            vec![0, 0],
            vec!["x".into()],
        )
        .unwrap();
        assert_eq!(fit_imputation(&ds).values[0], ImputedValue::Mode(0));
    }

    #[test]
    fn fit_imputation_all_missing_fallbacks() {
        let ds = Dataset::new(
            vec![
                AttributeSchema::numeric("x"),
                AttributeSchema::categorical("c", vec!["a".into(), "b".into()]),
            ],
            vec![vec![Cell::Missing, Cell::Missing]],
            vec![0],
            vec!["y".into()],
        )
        .unwrap();
        let params = fit_imputation(&ds);
        assert_eq!(params.values[0], ImputedValue::Mean(0.5));
        assert_eq!(params.values[1], ImputedValue::Mode(0));
    }

    #[test]
    fn baseline_numeric_column_and_indicator() {
        let ds = Dataset::new(
            vec![AttributeSchema::numeric("x")],
            vec![
                vec![Cell::Numeric(0.2)],
                vec![Cell::Missing],
                vec![Cell::Numeric(0.8)],
            ],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = encode_baseline(&ds, &fit_imputation(&ds)).unwrap();
        assert_eq!(m.column_names, vec!["x.imputed", "x.missing"]);
        assert_eq!(m.row(0), &[0.2, 0.0]);
        assert_eq!(m.row(1), &[0.5, 1.0]);
        assert_eq!(m.row(2), &[0.8, 0.0]);
    }

    #[test]
    fn baseline_categorical_mode_imputation() {
        let ds = Dataset::new(
            vec![AttributeSchema::categorical(
                "c",
                vec!["a".into(), "b".into()],
            )],
            vec![vec![Cell::Category(0)], vec![Cell::Missing]],
            vec![0, 1],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let m = encode_baseline(&ds, &fit_imputation(&ds)).unwrap();
        assert_eq!(m.column_names, vec!["c=a", "c=b", "c.missing"]);
        assert_eq!(m.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(m.row(1), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn baseline_skips_indicator_without_training_missing() {
        let ds = Dataset::new(
            vec![AttributeSchema::numeric("x")],
            vec![vec![Cell::Numeric(0.1)], vec![Cell::Numeric(0.9)]],
            vec![0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = encode_baseline(&ds, &fit_imputation(&ds)).unwrap();
        assert_eq!(m.column_names, vec!["x.imputed"]);
        assert_eq!(m.n_cols(), 1);
    }

    #[test]
    fn baseline_width_contract() {
        let ds = toy_dataset();
        let m = encode_baseline(&ds, &fit_imputation(&ds)).unwrap();
        // 1 numeric + arity 2 + 2 attributes with training missing
        assert_eq!(m.n_cols(), 1 + 2 + 2);
    }

    #[test]
    fn impute_only_drops_all_indicators() {
        let ds = toy_dataset();
        let params = fit_imputation(&ds).without_indicators();
        let m = encode_baseline(&ds, &params).unwrap();
        assert_eq!(m.column_names, vec!["x.imputed", "color=red", "color=blue"]);
    }

    #[test]
    fn polar_boscovich_matrix_example() {
        let ds = Dataset::new(
            vec![AttributeSchema::numeric("x")],
            vec![
                vec![Cell::Numeric(0.0)],
                vec![Cell::Numeric(0.5)],
                vec![Cell::Missing],
            ],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let m = encode_polar(&ds, PolarVariant::Boscovich).unwrap();
        assert_eq!(m.column_names, vec!["x.pos", "x.neg"]);
        assert_eq!(m.row(0), &[0.0, 1.0]);
        assert_eq!(m.row(1), &[0.5, 0.5]);
        assert_eq!(m.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn polar_categorical_missing_is_zero_vector() {
        let ds = Dataset::new(
            vec![AttributeSchema::categorical(
                "c",
                vec!["a".into(), "b".into(), "d".into()],
            )],
            vec![vec![Cell::Missing]],
            vec![0],
            vec!["x".into()],
        )
        .unwrap();
        let m = encode_polar(&ds, PolarVariant::Euclidean).unwrap();
        assert_eq!(m.row(0), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn polar_width_contract() {
        let ds = toy_dataset();
        let m = encode_polar(&ds, PolarVariant::Boscovich).unwrap();
        assert_eq!(m.n_cols(), 2 + 2);
        assert_eq!(m.groups.len(), 2);
        assert_eq!(m.groups[0].roles, vec![ColumnRole::PolarPos, ColumnRole::PolarNeg]);
        assert_eq!(m.groups[1].roles, vec![ColumnRole::OneHot, ColumnRole::OneHot]);
    }

    #[test]
    fn boscovich_first_column_round_trips_input() {
        let ds = Dataset::new(
            vec![AttributeSchema::numeric("x")],
            (0..20)
                .map(|i| vec![Cell::Numeric(i as f64 / 19.0)])
                .collect(),
            vec![0; 20],
            vec!["a".into()],
        )
        .unwrap();
        let m = encode_polar(&ds, PolarVariant::Boscovich).unwrap();
        for (i, row) in ds.rows.iter().enumerate() {
            if let Cell::Numeric(v) = row[0] {
                assert_eq!(m.value(i, 0), v);
            }
        }
    }

    #[test]
    fn serialisation_round_trip() {
        let ds = toy_dataset();
        let m = encode_polar(&ds, PolarVariant::Euclidean).unwrap();
        let mut buf = Vec::new();
        m.write_delimited(&mut buf, b',').unwrap();
        let back = EncodedMatrix::read_delimited(&mut buf.as_slice(), b',').unwrap();
        assert_eq!(back.column_names, m.column_names);
        assert_eq!(back.n_rows(), m.n_rows());
        for i in 0..m.n_rows() {
            assert_eq!(back.row(i), m.row(i), "row {i} must round-trip exactly");
        }
        assert_eq!(back.groups, m.groups);
    }

    #[test]
    fn encoding_choice_names_round_trip() {
        for choice in EncodingChoice::ALL {
            assert_eq!(choice.name().parse::<EncodingChoice>().unwrap(), choice);
        }
        let err = "one-hot".parse::<EncodingChoice>().unwrap_err();
        let msg = err.to_string();
        for choice in EncodingChoice::ALL {
            assert!(msg.contains(choice.name()), "{msg} should list {choice}");
        }
    }

    #[test]
    fn encoding_spec_rejects_mixed_pairings() {
        assert!(EncodingSpec::new(
            NumericScheme::ImputeIndicator,
            CategoricalScheme::PolarOneHot
        )
        .is_err());
        assert!(EncodingSpec::new(
            NumericScheme::PolarBoscovich,
            CategoricalScheme::ImputeIndicatorOneHot
        )
        .is_err());
        assert!(EncodingSpec::new(
            NumericScheme::PolarEuclidean,
            CategoricalScheme::PolarOneHot
        )
        .is_ok());
    }

    #[test]
    fn fitted_encoding_scales_before_encoding() {
        // raw values outside [0,1] must be rescaled, not rejected
        let train = Dataset::new(
            vec![AttributeSchema::numeric("x")],
            vec![
                vec![Cell::Numeric(10.0)],
                vec![Cell::Numeric(20.0)],
                vec![Cell::Missing],
            ],
            vec![0, 1, 0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let fitted = FittedEncoding::fit(&train, EncodingChoice::PolarBoscovich).unwrap();
        let m = fitted.encode(&train).unwrap();
        assert_eq!(m.row(0), &[0.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, 0.0]);
        assert_eq!(m.row(2), &[0.0, 0.0]);

        // baseline imputation operates in scaled space: mean of {0, 1} = 0.5
        let fitted = FittedEncoding::fit(&train, EncodingChoice::ImputeIndicator).unwrap();
        let m = fitted.encode(&train).unwrap();
        assert_eq!(m.row(2), &[0.5, 1.0]);
    }
}
