//! Distance-based classifiers over encoded rows: k-nearest-neighbour voting,
//! Dudani distance-weighted voting, and fuzzy-rough nearest neighbours with
//! ordered-weighted-averaging (OWA) aggregation.
//!
//! All three produce a per-class score vector suitable for ranking metrics.
//! Distance ties between training rows are broken by ascending row index, so
//! scoring is fully deterministic.

use thiserror::Error;

use crate::distance::{record_distance, DistanceError, PNorm};
use crate::encoding::EncodedMatrix;

/// Default neighbour count for plain and distance-weighted kNN.
pub const DEFAULT_K_NN: usize = 5;
/// Default neighbour count for FRNN-OWA.
pub const DEFAULT_K_FRNN: usize = 20;

/// Errors produced when building or querying a neighbour model.
#[derive(Debug, Error)]
pub enum NeighborsError {
    #[error("cannot build a model from an empty training set")]
    EmptyModel,
    #[error("k = {k} is invalid for {n} training rows (need 1 <= k <= n)")]
    InvalidK { k: usize, n: usize },
    #[error("training labels ({labels}) do not match training rows ({rows})")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("class {class} has no training rows; fuzzy-rough scoring needs every class present")]
    ClassTooSmall { class: usize },
    #[error("p = {0} is unsupported here (supported: 1 and 2; FRNN-OWA requires 1)")]
    UnsupportedNorm(f64),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Neighbour aggregation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Unweighted vote over the k nearest rows.
    Uniform,
    /// Dudani's distance weights `(d_k − d_i) / (d_k − d_1)`.
    Dudani,
    /// Fuzzy-rough upper/lower approximations with linear OWA weights.
    FrnnOwa,
}

/// A fitted nearest-neighbour model borrowing its training data.
#[derive(Debug)]
pub struct NeighborModel<'a> {
    matrix: &'a EncodedMatrix,
    labels: &'a [usize],
    n_classes: usize,
    k: usize,
    p: PNorm,
    weighting: Weighting,
}

/// Per-class scores; higher means more confidently that class.
pub type ScoreVector = Vec<f64>;

impl<'a> NeighborModel<'a> {
    pub fn new(
        matrix: &'a EncodedMatrix,
        labels: &'a [usize],
        n_classes: usize,
        k: usize,
        p: PNorm,
        weighting: Weighting,
    ) -> Result<Self, NeighborsError> {
        let n = matrix.n_rows();
        if n == 0 {
            return Err(NeighborsError::EmptyModel);
        }
        if labels.len() != n {
            return Err(NeighborsError::LabelMismatch {
                labels: labels.len(),
                rows: n,
            });
        }
        for &label in labels {
            if label >= n_classes {
                return Err(NeighborsError::LabelOutOfRange { label, n_classes });
            }
        }
        if k == 0 || k > n {
            return Err(NeighborsError::InvalidK { k, n });
        }
        if p != PNorm::ONE && p != PNorm::TWO {
            return Err(NeighborsError::UnsupportedNorm(p.p()));
        }
        if weighting == Weighting::FrnnOwa {
            // similarity = 1 − d/2 is a Boscovich-geometry notion
            if p != PNorm::ONE {
                return Err(NeighborsError::UnsupportedNorm(p.p()));
            }
            for class in 0..n_classes {
                if !labels.contains(&class) {
                    return Err(NeighborsError::ClassTooSmall { class });
                }
            }
        }
        Ok(NeighborModel {
            matrix,
            labels,
            n_classes,
            k,
            p,
            weighting,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Scores a query row with the model's configured weighting.
    pub fn scores(&self, query: &[f64]) -> Result<ScoreVector, NeighborsError> {
        match self.weighting {
            Weighting::Uniform => knn_scores(self, query),
            Weighting::Dudani => knn_weighted_scores(self, query),
            Weighting::FrnnOwa => frnn_owa_scores(self, query),
        }
    }

    /// Distances to every training row, sorted ascending with ties broken by
    /// ascending row index.
    fn sorted_distances(&self, query: &[f64]) -> Result<Vec<(f64, usize)>, NeighborsError> {
        let mut out = Vec::with_capacity(self.matrix.n_rows());
        for (i, row) in self.matrix.rows().enumerate() {
            out.push((record_distance(query, row, self.p)?, i));
        }
        out.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        Ok(out)
    }
}

/// Unweighted kNN: score(c) = (#class-c rows among the k nearest) / k.
pub fn knn_scores(model: &NeighborModel<'_>, query: &[f64]) -> Result<ScoreVector, NeighborsError> {
    let sorted = model.sorted_distances(query)?;
    let mut scores = vec![0.0; model.n_classes];
    for &(_, i) in &sorted[..model.k] {
        scores[model.labels[i]] += 1.0;
    }
    for s in &mut scores {
        *s /= model.k as f64;
    }
    Ok(scores)
}

/// Dudani distance-weighted kNN: neighbour `i` gets weight
/// `(d_k − d_i) / (d_k − d_1)` — so the nearest neighbour weighs 1 and the
/// k-th weighs 0 — except that all-equal distances degenerate to uniform
/// weights. Scores are class weight sums normalised across classes.
pub fn knn_weighted_scores(
    model: &NeighborModel<'_>,
    query: &[f64],
) -> Result<ScoreVector, NeighborsError> {
    let sorted = model.sorted_distances(query)?;
    let nearest = &sorted[..model.k];
    let d_first = nearest[0].0;
    let d_last = nearest[model.k - 1].0;
    let mut scores = vec![0.0; model.n_classes];
    for &(d, i) in nearest {
        let w = if d_last == d_first {
            1.0
        } else {
            (d_last - d) / (d_last - d_first)
        };
        scores[model.labels[i]] += w;
    }
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        for s in &mut scores {
            *s /= total;
        }
    }
    Ok(scores)
}

/// Linear OWA weights `w_i = 2(k+1−i) / (k(k+1))` for `i = 1..=k`: strictly
/// decreasing and summing to 1, so the head of the sorted sequence dominates.
pub fn owa_linear_weights(k: usize) -> Vec<f64> {
    let denom = (k * (k + 1)) as f64;
    (1..=k).map(|i| 2.0 * (k + 1 - i) as f64 / denom).collect()
}

/// Soft maximum: OWA over the `k` largest values, descending, largest value
/// getting the largest weight. Truncates to the pool size when it is smaller
/// than `k`, recomputing the weights for the shorter length.
fn owa_soft_max(values: &mut [f64], k: usize) -> f64 {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    let k = k.min(values.len());
    owa_linear_weights(k)
        .iter()
        .zip(values.iter())
        .map(|(w, v)| w * v)
        .sum()
}

/// Soft minimum: OWA over the `k` smallest values, ascending, smallest value
/// getting the largest weight.
fn owa_soft_min(values: &mut [f64], k: usize) -> f64 {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    let k = k.min(values.len());
    owa_linear_weights(k)
        .iter()
        .zip(values.iter())
        .map(|(w, v)| w * v)
        .sum()
}

/// Fuzzy-rough nearest neighbours with OWA aggregation.
///
/// Record similarity is the per-attribute average of `1 − d/2`: with `g`
/// encoded column groups the Boscovich record distance lies in `[0, 2g]`, so
/// `1 − d/(2g)` recovers a `[0, 1]` similarity (clamped, since baseline
/// indicator columns can push a group's contribution slightly beyond 2).
///
/// For each class `c` the upper approximation softly maximises the similarity
/// to class-`c` rows and the lower approximation softly minimises `1 − sim`
/// over rows of other classes; the score is the mean of the two.
pub fn frnn_owa_scores(
    model: &NeighborModel<'_>,
    query: &[f64],
) -> Result<ScoreVector, NeighborsError> {
    let g = model.matrix.groups.len().max(1) as f64;
    let mut sims = Vec::with_capacity(model.matrix.n_rows());
    for row in model.matrix.rows() {
        let d = record_distance(query, row, PNorm::ONE)?;
        sims.push((1.0 - d / (2.0 * g)).clamp(0.0, 1.0));
    }
    let mut scores = vec![0.0; model.n_classes];
    for (c, score) in scores.iter_mut().enumerate() {
        let mut same: Vec<f64> = Vec::new();
        let mut other: Vec<f64> = Vec::new();
        for (&label, &sim) in model.labels.iter().zip(&sims) {
            if label == c {
                same.push(sim);
            } else {
                other.push(1.0 - sim);
            }
        }
        let upper = owa_soft_max(&mut same, model.k);
        let lower = owa_soft_min(&mut other, model.k);
        *score = 0.5 * (upper + lower);
    }
    Ok(scores)
}
