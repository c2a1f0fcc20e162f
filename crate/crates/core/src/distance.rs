//! Minkowski norms and distances, plus the distance-to-similarity transform.
//!
//! The two relevant geometries are `p = 1` (Boscovich / taxicab) and `p = 2`
//! (Euclidean); both get exact fast paths, while other `p ≥ 1` go through the
//! general power formula. Under the Boscovich polar encoding the distance
//! between two encoded `[0, 1]` values is exactly twice their absolute
//! difference, so the full range is `[0, 2]` and `similarity` rescales it
//! back to `[0, 1]`.

use thiserror::Error;

/// Errors produced by the distance kernels.
#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("distance {0} exceeds 2; similarity is defined for Boscovich polar distances only")]
    Domain(f64),
    #[error("p-norm requires p >= 1, got {0}")]
    InvalidOrder(f64),
}

/// Minkowski norm order, `p ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PNorm {
    p: f64,
}

impl PNorm {
    /// Boscovich (taxicab) norm, `p = 1`.
    pub const ONE: PNorm = PNorm { p: 1.0 };
    /// Euclidean norm, `p = 2`.
    pub const TWO: PNorm = PNorm { p: 2.0 };

    pub fn new(p: f64) -> Result<Self, DistanceError> {
        if p.is_finite() && p >= 1.0 {
            Ok(PNorm { p })
        } else {
            Err(DistanceError::InvalidOrder(p))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `(Σ |x_i|^p)^(1/p)`; the zero vector has norm 0 for every `p`.
pub fn norm(x: &[f64], p: PNorm) -> f64 {
    if p.p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p.p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter()
            .map(|v| v.abs().powf(p.p))
            .sum::<f64>()
            .powf(1.0 / p.p)
    }
}

/// The `p`-norm of `x − y`.
pub fn dist(x: &[f64], y: &[f64], p: PNorm) -> Result<f64, DistanceError> {
    if x.len() != y.len() {
        return Err(DistanceError::LengthMismatch(x.len(), y.len()));
    }
    Ok(if p.p == 1.0 {
        x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
    } else if p.p == 2.0 {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    } else {
        x.iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs().powf(p.p))
            .sum::<f64>()
            .powf(1.0 / p.p)
    })
}

/// Maps a Boscovich polar distance `d ∈ [0, 2]` to a similarity `1 − d/2`.
///
/// Encoded values of a single attribute are at distance at most 2, so the
/// result lies in `[0, 1]`; a missing value is at distance 1 from every
/// non-missing value and therefore at similarity exactly 0.5.
pub fn similarity(d: f64) -> Result<f64, DistanceError> {
    if !(0.0..=2.0 + 1e-12).contains(&d) {
        return Err(DistanceError::Domain(d));
    }
    Ok((1.0 - d / 2.0).clamp(0.0, 1.0))
}

/// Distance between two rows of the same encoded layout: the plain `p`-norm
/// of the difference over all concatenated encoded columns.
pub fn record_distance(a: &[f64], b: &[f64], p: PNorm) -> Result<f64, DistanceError> {
    dist(a, b, p)
}
