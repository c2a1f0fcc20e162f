//! Barycentric attribute values and their fuzzy-partition counterpart.
//!
//! A barycentric value is a non-negative coefficient vector identified up to
//! positive scaling; the all-zero vector is admitted and denotes a missing
//! value. Dividing by the coefficient sum gives the *normalised*
//! representation on the standard simplex (the zero vector stays zero), and
//! dropping the redundant last coordinate gives the *compact* representation,
//! which can no longer express missingness.
//!
//! One-hot encoded categories are exactly the normalised representations of
//! crisp values, and for two coordinates the expansion map `⟨x⟩ ↦ ⟨x, 1 − x⟩`
//! coincides with the Boscovich polar encoding — both encodings are instances
//! of the same vector representation.
//!
//! A list of barycentric values over `m` classes is equivalently a fuzzy
//! partition matrix: each normalised row gives the membership degrees of one
//! record in the `m` partition classes, summing to 1 (or to 0 for missing).

use std::io::{BufRead, Write};

use thiserror::Error;

/// Errors produced by barycentric operations.
#[derive(Debug, Error)]
pub enum BarycentricError {
    #[error("coefficient {0} is negative; barycentric coefficients must be >= 0")]
    NegativeCoefficient(f64),
    #[error("coefficient {0} is not finite")]
    NonFinite(f64),
    #[error("coefficient vector must have at least one entry")]
    Empty,
    #[error("missing value (zero vector) has no compact representation")]
    MissingNotRepresentable,
    #[error("expected a normalised vector (sum 1), got sum {0}")]
    NotNormalised(f64),
    #[error("entries sum to {0}, which exceeds 1; cannot expand")]
    SumExceedsOne(f64),
    #[error("row {row} has {got} coefficients, expected {expected}")]
    WrongLength {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("malformed partition matrix: {0}")]
    Malformed(String),
}

fn check_coeffs(coeffs: &[f64]) -> Result<(), BarycentricError> {
    for &c in coeffs {
        if !c.is_finite() {
            return Err(BarycentricError::NonFinite(c));
        }
        if c < 0.0 {
            return Err(BarycentricError::NegativeCoefficient(c));
        }
    }
    Ok(())
}

/// A non-negative coefficient vector identified up to positive scaling; the
/// all-zero vector denotes a missing value.
#[derive(Debug, Clone)]
pub struct BarycentricValue {
    coeffs: Vec<f64>,
}

impl BarycentricValue {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, BarycentricError> {
        if coeffs.is_empty() {
            return Err(BarycentricError::Empty);
        }
        check_coeffs(&coeffs)?;
        Ok(BarycentricValue { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient is zero.
    pub fn is_missing(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// The normalised representation of this value.
    pub fn normalized(&self) -> Vec<f64> {
        normalize(&self.coeffs).expect("coefficients validated at construction")
    }

    /// Equality of barycentric values: equal up to positive scaling.
    ///
    /// Tested by comparing normalised forms coordinate-wise, since ratio
    /// comparison breaks down on zero coefficients.
    pub fn equiv(&self, other: &BarycentricValue) -> bool {
        if self.len() != other.len() {
            return false;
        }
        self.normalized()
            .iter()
            .zip(other.normalized())
            .all(|(a, b)| (a - b).abs() <= 1e-9)
    }
}

/// Divides the coefficients by their sum, landing on the standard simplex;
/// the all-zero vector is returned unchanged (missing stays missing).
pub fn normalize(coeffs: &[f64]) -> Result<Vec<f64>, BarycentricError> {
    check_coeffs(coeffs)?;
    let s: f64 = coeffs.iter().sum();
    if s > 0.0 {
        Ok(coeffs.iter().map(|c| c / s).collect())
    } else {
        Ok(vec![0.0; coeffs.len()])
    }
}

/// Drops the redundant last coordinate of a normalised vector.
///
/// The zero vector is rejected: in the compact form the all-zero output
/// already encodes the last category, so missingness has nowhere to go.
pub fn compact(v: &[f64]) -> Result<Vec<f64>, BarycentricError> {
    check_coeffs(v)?;
    if v.iter().all(|&c| c == 0.0) {
        return Err(BarycentricError::MissingNotRepresentable);
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(BarycentricError::NotNormalised(s));
    }
    Ok(v[..v.len() - 1].to_vec())
}

/// Restores the dropped coordinate of a compact vector by appending
/// `1 − Σ entries`; the output is normalised.
pub fn expand(v: &[f64]) -> Result<Vec<f64>, BarycentricError> {
    check_coeffs(v)?;
    let s: f64 = v.iter().sum();
    if s > 1.0 + 1e-12 {
        return Err(BarycentricError::SumExceedsOne(s));
    }
    let mut out = v.to_vec();
    out.push((1.0 - s).max(0.0));
    Ok(out)
}

/// Membership matrix of a fuzzy partition: one row per record, one column per
/// partition class, rows summing to 1 (or to 0 for missing records).
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPartitionMatrix {
    n_classes: usize,
    rows: Vec<Vec<f64>>,
}

impl FuzzyPartitionMatrix {
    /// Validates that every row has `n_classes` entries in `[0, 1]` summing
    /// to 1 within 1e-9 (or to exactly 0 for a missing record).
    pub fn new(rows: Vec<Vec<f64>>, n_classes: usize) -> Result<Self, BarycentricError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_classes {
                return Err(BarycentricError::WrongLength {
                    row: i,
                    expected: n_classes,
                    got: row.len(),
                });
            }
            check_coeffs(row)?;
            let s: f64 = row.iter().sum();
            if s != 0.0 && (s - 1.0).abs() > 1e-9 {
                return Err(BarycentricError::NotNormalised(s));
            }
        }
        Ok(FuzzyPartitionMatrix { n_classes, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// True when every membership degree is 0 or 1 (and no row is missing):
    /// the partition is crisp.
    pub fn is_crisp(&self) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().all(|&v| v == 0.0 || v == 1.0) && row.iter().sum::<f64>() == 1.0)
    }

    /// Writes the matrix as delimited text, rows = records, columns = classes.
    pub fn write_delimited(&self, out: &mut dyn Write, delimiter: u8) -> std::io::Result<()> {
        let sep = delimiter as char;
        let mut line = String::new();
        for row in &self.rows {
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
    /// [`write_delimited`]: FuzzyPartitionMatrix::write_delimited
    pub fn read_delimited(
        input: &mut dyn BufRead,
        delimiter: u8,
    ) -> Result<Self, BarycentricError> {
        let sep = delimiter as char;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| BarycentricError::Malformed(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(sep)
                .map(|token| {
                    token
                        .parse::<f64>()
                        .map_err(|_| BarycentricError::Malformed(format!("bad value {token:?}")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        let n_classes = rows.first().map_or(0, Vec::len);
        FuzzyPartitionMatrix::new(rows, n_classes)
    }
}

/// Builds the fuzzy partition matrix of a barycentric attribute: row `i` is
/// the normalised representation of the `i`-th value.
pub fn partition_from_attribute(
    rows: &[BarycentricValue],
    m: usize,
) -> Result<FuzzyPartitionMatrix, BarycentricError> {
    let mut memberships = Vec::with_capacity(rows.len());
    for (i, value) in rows.iter().enumerate() {
        if value.len() != m {
            return Err(BarycentricError::WrongLength {
                row: i,
                expected: m,
                got: value.len(),
            });
        }
        memberships.push(value.normalized());
    }
    FuzzyPartitionMatrix::new(memberships, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::polar_encode_boscovich;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vec_eq(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(g, w, epsilon = tol);
        }
    }

    #[test]
    fn normalize_examples() {
        vec_eq(&normalize(&[2.0, 6.0, 2.0]).unwrap(), &[0.2, 0.6, 0.2], 1e-12);
        assert_eq!(normalize(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(normalize(&[5.0]).unwrap(), vec![1.0]);
        assert!(matches!(
            normalize(&[-1.0, 2.0]),
            Err(BarycentricError::NegativeCoefficient(_))
        ));
    }

    #[test]
    fn compact_examples() {
        vec_eq(&compact(&[0.2, 0.6, 0.2]).unwrap(), &[0.2, 0.6], 1e-12);
        // the collision the redundant coordinate prevents: last category
        // compacts to the zero vector
        assert_eq!(compact(&[0.0, 0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(compact(&[1.0]).unwrap(), Vec::<f64>::new());
        assert!(matches!(
            compact(&[0.0, 0.0]),
            Err(BarycentricError::MissingNotRepresentable)
        ));
        assert!(matches!(
            compact(&[0.3, 0.3]),
            Err(BarycentricError::NotNormalised(_))
        ));
    }

    #[test]
    fn expand_examples() {
        vec_eq(&expand(&[0.2, 0.6]).unwrap(), &[0.2, 0.6, 0.2], 1e-12);
        vec_eq(&expand(&[0.3]).unwrap(), &[0.3, 0.7], 1e-12);
        assert_eq!(expand(&[]).unwrap(), vec![1.0]);
        assert!(matches!(
            expand(&[0.8, 0.3]),
            Err(BarycentricError::SumExceedsOne(_))
        ));
        assert!(matches!(
            expand(&[-0.1]),
            Err(BarycentricError::NegativeCoefficient(_))
        ));
    }

    #[test]
    fn expand_on_two_coordinates_is_the_polar_map() {
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let expanded = expand(&[x]).unwrap();
            let polar = polar_encode_boscovich(Some(x)).unwrap();
            assert_eq!(expanded, polar.to_vec());
        }
    }

    #[test]
    fn equiv_is_scale_invariant_and_rejects_mismatch() {
        let a = BarycentricValue::new(vec![2.0, 6.0, 2.0]).unwrap();
        let b = BarycentricValue::new(vec![1.0, 3.0, 1.0]).unwrap();
        let c = BarycentricValue::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(a.equiv(&b));
        assert!(!a.equiv(&c));
        let missing = BarycentricValue::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(missing.is_missing());
        assert!(!missing.equiv(&a));
        assert!(missing.equiv(&missing));
    }

    #[test]
    fn partition_from_attribute_examples() {
        let rows = vec![
            BarycentricValue::new(vec![1.0, 0.0]).unwrap(),
            BarycentricValue::new(vec![0.0, 1.0]).unwrap(),
            BarycentricValue::new(vec![1.0, 1.0]).unwrap(),
        ];
        let m = partition_from_attribute(&rows, 2).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0]);
        assert_eq!(m.row(1), &[0.0, 1.0]);
        assert_eq!(m.row(2), &[0.5, 0.5]);
        assert!(!m.is_crisp());
    }

    #[test]
    fn crisp_rows_make_a_crisp_partition() {
        let rows = vec![
            BarycentricValue::new(vec![0.0, 3.0, 0.0]).unwrap(),
            BarycentricValue::new(vec![7.0, 0.0, 0.0]).unwrap(),
        ];
        let m = partition_from_attribute(&rows, 3).unwrap();
        assert!(m.is_crisp());
    }

    #[test]
    fn missing_row_stays_all_zero() {
        let rows = vec![BarycentricValue::new(vec![0.0, 0.0]).unwrap()];
        let m = partition_from_attribute(&rows, 2).unwrap();
        assert_eq!(m.row(0), &[0.0, 0.0]);
        assert!(!m.is_crisp());
    }

    #[test]
    fn partition_rejects_wrong_width() {
        let rows = vec![BarycentricValue::new(vec![1.0, 0.0, 0.0]).unwrap()];
        assert!(matches!(
            partition_from_attribute(&rows, 2),
            Err(BarycentricError::WrongLength { .. })
        ));
    }

    #[test]
    fn partition_matrix_validates_row_sums() {
        assert!(FuzzyPartitionMatrix::new(vec![vec![0.5, 0.4]], 2).is_err());
        assert!(FuzzyPartitionMatrix::new(vec![vec![0.5, 0.5]], 2).is_ok());
        assert!(FuzzyPartitionMatrix::new(vec![vec![0.0, 0.0]], 2).is_ok());
    }

    #[test]
    fn partition_matrix_round_trips_through_text() {
        let m = FuzzyPartitionMatrix::new(
            vec![vec![0.2, 0.6, 0.2], vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            3,
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_delimited(&mut buf, b',').unwrap();
        let back = FuzzyPartitionMatrix::read_delimited(&mut buf.as_slice(), b',').unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(coeffs in prop::collection::vec(0.0f64..10.0, 1..6)) {
            let once = normalize(&coeffs).unwrap();
            let twice = normalize(&once).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn normalize_is_scale_invariant(
            coeffs in prop::collection::vec(0.0f64..10.0, 1..6),
            lambda in 0.1f64..10.0,
        ) {
            let base = normalize(&coeffs).unwrap();
            let scaled: Vec<f64> = coeffs.iter().map(|c| c * lambda).collect();
            let scaled = normalize(&scaled).unwrap();
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn expand_undoes_compact(coeffs in prop::collection::vec(0.01f64..10.0, 1..6)) {
            let v = normalize(&coeffs).unwrap();
            let back = expand(&compact(&v).unwrap()).unwrap();
            prop_assert_eq!(back.len(), v.len());
            for (a, b) in v.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn normalize_fixes_one_hot(i in 0usize..5) {
            let mut v = vec![0.0; 5];
            v[i] = 1.0;
            prop_assert_eq!(normalize(&v).unwrap(), v);
        }
    }
}
