//! Polar encoding for missing values, with the baselines and evaluation
//! machinery needed to benchmark it.
//!
//! The library is organised as a pipeline:
//!
//! 1. [`ingest`] loads delimited data with missing-value markers and scales
//!    numeric attributes to the unit interval.
//! 2. [`encoding`] maps each attribute into columns: the polar maps send a
//!    unit-interval value to a point on a two-column arc and missingness to
//!    the origin, while the baseline encodings impute and optionally add
//!    missingness indicator columns.
//! 3. [`distance`] and [`neighbors`] consume encoded rows: Minkowski
//!    distances, similarity, and the nearest-neighbour family (kNN, weighted
//!    kNN, fuzzy-rough NN with OWA weights).
//! 4. [`tree`] grows and prunes CART trees on encoded columns, plus the
//!    missingness-aware split enumeration used to relate polar splits to
//!    missingness-incorporated splits.
//! 5. [`eval`] runs repeated stratified cross-validation, scores folds with
//!    AUROC, and compares encodings with the Wilcoxon signed-rank test.
//!
//! [`barycentric`] generalises the two-column polar idea to attributes that
//! are already non-negative coefficient vectors (fuzzy set memberships).
//!
//! Everything downstream of a seed is deterministic, including parallel
//! benchmark runs.

pub mod barycentric;
pub mod distance;
pub mod encoding;
pub mod eval;
pub mod ingest;
pub mod neighbors;
pub mod tree;

pub use encoding::{EncodedMatrix, EncodingChoice, FittedEncoding, PolarVariant};
pub use eval::{ClassifierSpec, EvaluationReport, FoldPlan};
pub use ingest::{AttributeKind, AttributeSchema, Cell, Dataset, LoadOptions, SchemaSource};
