//! CART decision trees over encoded matrices, with cost-complexity pruning,
//! plus split-enumeration oracles for the missing-value split semantics.
//!
//! Growth is standard greedy CART: binary splits `value ≤ threshold` at
//! midpoints between consecutive distinct column values, chosen to minimise
//! weighted Gini impurity, with ties broken toward the lower column index and
//! lower threshold so the result is fully deterministic.
//!
//! The enumeration oracles exist to make one structural claim testable:
//! thresholding the two polar columns of an attribute (plus a depth-2 pair of
//! splits to isolate the encoded-missing rows) reaches exactly the same
//! bipartitions of the data as "missingness incorporated in attributes"
//! (MIA), which considers every raw threshold with missing values sent left,
//! sent right, or split off alone. [`mia_enumerate`] works on the raw column
//! and [`polar_enumerate`] on the encoded pair; equality of the two
//! bipartition sets is checked in tests.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::encoding::EncodedMatrix;

/// Errors produced by tree growth and prediction.
#[derive(Debug, Error)]
pub enum TreeError {
    #[error("cannot grow a tree from an empty dataset")]
    EmptyDataset,
    #[error("training labels ({labels}) do not match training rows ({rows})")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("invalid growth parameters: {0}")]
    InvalidParams(String),
    #[error("split column {column} out of range for row of width {width}")]
    ColumnOutOfRange { column: usize, width: usize },
}

/// A binary split: rows with `value ≤ threshold` in the given encoded column
/// go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub column: usize,
    pub threshold: f64,
}

/// A grown (and possibly pruned) classification tree.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        /// Training rows of each class that reached this leaf.
        class_counts: Vec<usize>,
    },
    Internal {
        split: SplitCandidate,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => 1 + left.n_nodes() + right.n_nodes(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Per-class training counts of the whole subtree.
    pub fn class_counts(&self) -> Vec<usize> {
        match self {
            TreeNode::Leaf { class_counts } => class_counts.clone(),
            TreeNode::Internal { left, right, .. } => {
                let mut counts = left.class_counts();
                for (a, b) in counts.iter_mut().zip(right.class_counts()) {
                    *a += b;
                }
                counts
            }
        }
    }

    /// Human-readable indented rendering (split column names, thresholds and
    /// leaf counts), stable across runs for golden-file comparison.
    pub fn render(&self, column_names: &[String]) -> String {
        let mut out = String::new();
        self.render_into(&mut out, column_names, 0);
        out
    }

    fn render_into(&self, out: &mut String, names: &[String], indent: usize) {
        for _ in 0..indent {
            out.push_str("  ");
        }
        match self {
            TreeNode::Leaf { class_counts } => {
                out.push_str(&format!("leaf {class_counts:?}\n"));
            }
            TreeNode::Internal { split, left, right } => {
                let name = names
                    .get(split.column)
                    .map(String::as_str)
                    .unwrap_or("<unknown>");
                out.push_str(&format!("split {name} <= {}\n", split.threshold));
                left.render_into(out, names, indent + 1);
                right.render_into(out, names, indent + 1);
            }
        }
    }
}

/// Stopping parameters for tree growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowParams {
    /// Minimum training rows in each child of a split.
    pub min_samples_leaf: usize,
    /// Maximum tree depth; `None` grows until purity or exhaustion.
    pub max_depth: Option<usize>,
}

impl Default for GrowParams {
    fn default() -> Self {
        GrowParams {
            min_samples_leaf: 1,
            max_depth: None,
        }
    }
}

/// Default cost-complexity pruning constant.
pub const DEFAULT_CCP_ALPHA: f64 = 0.01;

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// Greedy CART growth minimising weighted Gini impurity.
pub fn grow_tree(
    matrix: &EncodedMatrix,
    labels: &[usize],
    n_classes: usize,
    params: &GrowParams,
) -> Result<TreeNode, TreeError> {
    if matrix.n_rows() == 0 {
        return Err(TreeError::EmptyDataset);
    }
    if labels.len() != matrix.n_rows() {
        return Err(TreeError::LabelMismatch {
            labels: labels.len(),
            rows: matrix.n_rows(),
        });
    }
    for &label in labels {
        if label >= n_classes {
            return Err(TreeError::LabelOutOfRange { label, n_classes });
        }
    }
    if params.min_samples_leaf == 0 {
        return Err(TreeError::InvalidParams(
            "min_samples_leaf must be at least 1".into(),
        ));
    }
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    Ok(grow(matrix, labels, n_classes, params, rows, 0))
}

fn grow(
    matrix: &EncodedMatrix,
    labels: &[usize],
    n_classes: usize,
    params: &GrowParams,
    rows: Vec<usize>,
    depth: usize,
) -> TreeNode {
    let mut counts = vec![0usize; n_classes];
    for &r in &rows {
        counts[labels[r]] += 1;
    }
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_stop = params.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_stop || rows.len() < 2 * params.min_samples_leaf {
        return TreeNode::Leaf {
            class_counts: counts,
        };
    }
    let Some(split) = find_best_split(matrix, labels, &rows, &counts, params.min_samples_leaf)
    else {
        return TreeNode::Leaf {
            class_counts: counts,
        };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| matrix.value(r, split.column) <= split.threshold);
    TreeNode::Internal {
        split,
        left: Box::new(grow(matrix, labels, n_classes, params, left_rows, depth + 1)),
        right: Box::new(grow(matrix, labels, n_classes, params, right_rows, depth + 1)),
    }
}

/// Scans all columns and midpoint thresholds for the weighted-Gini minimiser.
/// Iteration order (columns ascending, thresholds ascending) plus strict
/// improvement realises the (lower column, lower threshold) tie-break.
fn find_best_split(
    matrix: &EncodedMatrix,
    labels: &[usize],
    rows: &[usize],
    counts: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitCandidate> {
    let n = rows.len();
    let mut best: Option<(f64, SplitCandidate)> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    for column in 0..matrix.n_cols() {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (matrix.value(r, column), labels[r])));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_counts = vec![0usize; counts.len()];
        for i in 0..n - 1 {
            left_counts[pairs[i].1] += 1;
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            if a == b {
                continue;
            }
            let threshold = 0.5 * (a + b);
            if threshold >= b {
                // adjacent floats: the midpoint rounded up would route b left
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let gini_left = gini(&left_counts, n_left);
            let right_counts: Vec<usize> = counts
                .iter()
                .zip(&left_counts)
                .map(|(t, l)| t - l)
                .collect();
            let gini_right = gini(&right_counts, n_right);
            let weighted =
                (n_left as f64 * gini_left + n_right as f64 * gini_right) / n as f64;
            if best.as_ref().is_none_or(|(w, _)| weighted < *w) {
                best = Some((weighted, SplitCandidate { column, threshold }));
            }
        }
    }
    best.map(|(_, split)| split)
}

/// Routes a row to its leaf and returns the leaf class counts normalised to
/// proportions.
pub fn predict_scores(tree: &TreeNode, row: &[f64]) -> Result<Vec<f64>, TreeError> {
    let mut node = tree;
    loop {
        match node {
            TreeNode::Leaf { class_counts } => {
                let n: usize = class_counts.iter().sum();
                let n = n.max(1) as f64;
                return Ok(class_counts.iter().map(|&c| c as f64 / n).collect());
            }
            TreeNode::Internal { split, left, right } => {
                if split.column >= row.len() {
                    return Err(TreeError::ColumnOutOfRange {
                        column: split.column,
                        width: row.len(),
                    });
                }
                node = if row[split.column] <= split.threshold {
                    left
                } else {
                    right
                };
            }
        }
    }
}

struct PruneCandidate {
    g: f64,
    depth: usize,
    order: usize,
    path: Vec<bool>,
}

/// Minimal cost-complexity pruning: repeatedly collapse the internal node
/// with the smallest effective alpha
/// `g(t) = (R(t) − R(T_t)) / (|leaves(T_t)| − 1)` while that minimum is
/// strictly below `alpha`. Costs `R` are training misclassification rates
/// relative to the full training size, so `alpha = 0` leaves the tree
/// unchanged and `alpha = ∞` collapses it to a single leaf. Ties collapse the
/// node closest to the root first.
pub fn prune_ccp(tree: TreeNode, alpha: f64) -> TreeNode {
    let n_total: usize = tree.class_counts().iter().sum();
    if n_total == 0 {
        return tree;
    }
    let mut tree = tree;
    loop {
        let mut candidates = Vec::new();
        let mut order = 0;
        scan_prune(
            &tree,
            0,
            &mut Vec::new(),
            n_total as f64,
            &mut order,
            &mut candidates,
        );
        let Some(weakest) = candidates.into_iter().min_by(|a, b| {
            a.g.total_cmp(&b.g)
                .then(a.depth.cmp(&b.depth))
                .then(a.order.cmp(&b.order))
        }) else {
            return tree;
        };
        // collapse only while strictly below the threshold; a node whose
        // effective alpha equals the threshold is kept
        if weakest.g < alpha {
            collapse_at(&mut tree, &weakest.path);
        } else {
            return tree;
        }
    }
}

/// Post-order scan computing, per internal node, the subtree class counts,
/// leaf count and misclassification count, and recording its effective alpha.
fn scan_prune(
    node: &TreeNode,
    depth: usize,
    path: &mut Vec<bool>,
    n_total: f64,
    order: &mut usize,
    out: &mut Vec<PruneCandidate>,
) -> (Vec<usize>, usize, usize) {
    match node {
        TreeNode::Leaf { class_counts } => {
            let n: usize = class_counts.iter().sum();
            let max = class_counts.iter().copied().max().unwrap_or(0);
            (class_counts.clone(), 1, n - max)
        }
        TreeNode::Internal { left, right, .. } => {
            let my_order = *order;
            *order += 1;
            path.push(false);
            let (left_counts, left_leaves, left_mis) =
                scan_prune(left, depth + 1, path, n_total, order, out);
            path.pop();
            path.push(true);
            let (right_counts, right_leaves, right_mis) =
                scan_prune(right, depth + 1, path, n_total, order, out);
            path.pop();

            let counts: Vec<usize> = left_counts
                .iter()
                .zip(&right_counts)
                .map(|(a, b)| a + b)
                .collect();
            let n: usize = counts.iter().sum();
            let max = counts.iter().copied().max().unwrap_or(0);
            let node_mis = n - max;
            let leaves = left_leaves + right_leaves;
            let subtree_mis = left_mis + right_mis;
            let g = ((node_mis - subtree_mis) as f64 / n_total) / (leaves - 1) as f64;
            out.push(PruneCandidate {
                g,
                depth,
                order: my_order,
                path: path.clone(),
            });
            (counts, leaves, subtree_mis)
        }
    }
}

fn collapse_at(tree: &mut TreeNode, path: &[bool]) {
    let mut node = tree;
    for &go_right in path {
        match node {
            TreeNode::Internal { left, right, .. } => {
                node = if go_right { right } else { left };
            }
            TreeNode::Leaf { .. } => return,
        }
    }
    let class_counts = node.class_counts();
    *node = TreeNode::Leaf { class_counts };
}

/// Which side of a threshold the missing values are sent to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingSide {
    Left,
    Right,
    /// Missing vs non-missing, regardless of threshold.
    Alone,
}

/// One "missingness incorporated in attributes" split of a raw column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiaSplit {
    /// Source attribute index (caller-supplied provenance).
    pub attribute: usize,
    /// Midpoint threshold; 0 (unused) for [`MissingSide::Alone`].
    pub threshold: f64,
    pub missing_side: MissingSide,
}

/// A two-block partition of row indices in canonical form: the stored side is
/// the one containing row 0, with indices ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition(Vec<usize>);

impl Bipartition {
    /// Canonicalises one side of a split over `n` rows; `None` when the split
    /// is degenerate (one side empty).
    pub fn from_side(side: &[usize], n: usize) -> Option<Bipartition> {
        let mut mask = vec![false; n];
        for &i in side {
            mask[i] = true;
        }
        let on = mask.iter().filter(|&&b| b).count();
        if on == 0 || on == n {
            return None;
        }
        let keep = mask[0];
        Some(Bipartition(
            (0..n).filter(|&i| mask[i] == keep).collect(),
        ))
    }

    /// The canonical side (the one containing row 0).
    pub fn rows(&self) -> &[usize] {
        &self.0
    }
}

/// Enumerates every MIA split of a raw `[0, 1]`-or-missing column: each
/// midpoint threshold with missing values sent left and sent right, plus the
/// split separating missing from non-missing. Splits inducing the same
/// bipartition are deduplicated (first variant wins); output is ordered by
/// bipartition.
pub fn mia_enumerate(
    column: &[Option<f64>],
    attribute: usize,
) -> Vec<(MiaSplit, Bipartition)> {
    let n = column.len();
    let mut out: BTreeMap<Bipartition, MiaSplit> = BTreeMap::new();
    let insert = |out: &mut BTreeMap<Bipartition, MiaSplit>, side: Vec<usize>, split: MiaSplit| {
        if let Some(bp) = Bipartition::from_side(&side, n) {
            out.entry(bp).or_insert(split);
        }
    };

    let mut values: Vec<f64> = column.iter().flatten().copied().collect();
    values.sort_unstable_by(f64::total_cmp);
    values.dedup();
    for w in values.windows(2) {
        let threshold = 0.5 * (w[0] + w[1]);
        let left_with_missing: Vec<usize> = (0..n)
            .filter(|&i| column[i].is_none_or(|v| v <= threshold))
            .collect();
        insert(
            &mut out,
            left_with_missing,
            MiaSplit {
                attribute,
                threshold,
                missing_side: MissingSide::Left,
            },
        );
        let left_without_missing: Vec<usize> = (0..n)
            .filter(|&i| column[i].is_some_and(|v| v <= threshold))
            .collect();
        insert(
            &mut out,
            left_without_missing,
            MiaSplit {
                attribute,
                threshold,
                missing_side: MissingSide::Right,
            },
        );
    }

    let missing: Vec<usize> = (0..n).filter(|&i| column[i].is_none()).collect();
    if !missing.is_empty() && missing.len() < n {
        insert(
            &mut out,
            missing,
            MiaSplit {
                attribute,
                threshold: 0.0,
                missing_side: MissingSide::Alone,
            },
        );
    }
    out.into_iter().map(|(bp, split)| (split, bp)).collect()
}

/// Enumerates every bipartition a tree can induce on one polar-encoded
/// attribute: single midpoint thresholds on either polar column, plus the
/// missing-vs-rest bipartition reachable by a depth-2 pair of splits (the
/// encoded-missing rows are exactly those at the origin of both columns).
pub fn polar_enumerate(pos: &[f64], neg: &[f64]) -> Vec<Bipartition> {
    assert_eq!(
        pos.len(),
        neg.len(),
        "polar columns must have the same length"
    );
    let n = pos.len();
    let mut out: BTreeSet<Bipartition> = BTreeSet::new();
    for col in [pos, neg] {
        let mut values = col.to_vec();
        values.sort_unstable_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let threshold = 0.5 * (w[0] + w[1]);
            let side: Vec<usize> = (0..n).filter(|&i| col[i] <= threshold).collect();
            if let Some(bp) = Bipartition::from_side(&side, n) {
                out.insert(bp);
            }
        }
    }
    let missing: Vec<usize> = (0..n)
        .filter(|&i| pos[i] == 0.0 && neg[i] == 0.0)
        .collect();
    if !missing.is_empty() && missing.len() < n {
        if let Some(bp) = Bipartition::from_side(&missing, n) {
            out.insert(bp);
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{
        encode_polar, polar_encode_boscovich, ColumnGroup, ColumnRole, PolarVariant,
    };
    use crate::ingest::{AttributeSchema, Cell, Dataset};
    use proptest::prelude::*;

    fn polar_line(values: &[Option<f64>], labels: &[usize], n_classes: usize) -> EncodedMatrix {
        let class_names = (0..n_classes).map(|c| format!("c{c}")).collect();
        let ds = Dataset::new(
            vec![AttributeSchema::numeric("x")],
            values
                .iter()
                .map(|v| vec![v.map_or(Cell::Missing, Cell::Numeric)])
                .collect(),
            labels.to_vec(),
            class_names,
        )
        .unwrap();
        encode_polar(&ds, PolarVariant::Boscovich).unwrap()
    }

    fn argmax(scores: &[f64]) -> usize {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        best
    }

    fn train_accuracy(tree: &TreeNode, matrix: &EncodedMatrix, labels: &[usize]) -> f64 {
        let mut hits = 0;
        for (i, row) in matrix.rows().enumerate() {
            if argmax(&predict_scores(tree, row).unwrap()) == labels[i] {
                hits += 1;
            }
        }
        hits as f64 / labels.len() as f64
    }

    #[test]
    fn pure_input_grows_a_single_leaf() {
        let labels = [1, 1, 1];
        let m = polar_line(&[Some(0.1), Some(0.5), Some(0.9)], &labels, 2);
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        assert_eq!(
            tree,
            TreeNode::Leaf {
                class_counts: vec![0, 3]
            }
        );
    }

    #[test]
    fn four_point_line_splits_at_half() {
        // {0.1:A, 0.2:A, 0.8:B, 0.9:B}: the 0.5 midpoint on the first polar
        // column yields pure children; the mirrored split on the second polar
        // column ties and loses to the lower column index
        let labels = [0, 0, 1, 1];
        let m = polar_line(&[Some(0.1), Some(0.2), Some(0.8), Some(0.9)], &labels, 2);
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        match &tree {
            TreeNode::Internal { split, left, right } => {
                assert_eq!(split.column, 0);
                assert_eq!(split.threshold, 0.5);
                assert_eq!(
                    **left,
                    TreeNode::Leaf {
                        class_counts: vec![2, 0]
                    }
                );
                assert_eq!(
                    **right,
                    TreeNode::Leaf {
                        class_counts: vec![0, 2]
                    }
                );
            }
            other => panic!("expected a stump, got {other:?}"),
        }
    }

    #[test]
    fn tree_isolates_missing_rows_when_missingness_is_the_signal() {
        // class 0 iff missing; non-missing values span both endpoints so a
        // single threshold cannot separate the encoded-missing rows
        let values = [
            None,
            None,
            None,
            None,
            Some(0.0),
            Some(0.25),
            Some(0.5),
            Some(0.75),
            Some(1.0),
        ];
        let labels = [0, 0, 0, 0, 1, 1, 1, 1, 1];
        let m = polar_line(&values, &labels, 2);
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        assert_eq!(train_accuracy(&tree, &m, &labels), 1.0);
        assert!(tree.depth() >= 2, "isolating missing needs two splits here");
    }

    #[test]
    fn predict_scores_are_leaf_proportions() {
        let leaf = TreeNode::Leaf {
            class_counts: vec![3, 1],
        };
        assert_eq!(predict_scores(&leaf, &[0.0]).unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn single_leaf_scores_every_row_identically() {
        let labels = [0, 1];
        let m = polar_line(&[Some(0.1), Some(0.9)], &labels, 2);
        let tree = grow_tree(
            &m,
            &labels,
            2,
            &GrowParams {
                max_depth: Some(0),
                ..GrowParams::default()
            },
        )
        .unwrap();
        let a = predict_scores(&tree, &[0.0, 1.0]).unwrap();
        let b = predict_scores(&tree, &[1.0, 0.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![0.5, 0.5]);
    }

    #[test]
    fn predict_rejects_rows_narrower_than_the_routing_column() {
        // column 0 is constant, so the tree must split on column 1; a
        // one-value row then cannot be routed
        let labels = [0, 0, 1, 1];
        let m = EncodedMatrix::new(
            4,
            vec![0.5, 0.1, 0.5, 0.2, 0.5, 0.8, 0.5, 0.9],
            vec!["x.pos".into(), "x.neg".into()],
            vec![ColumnGroup {
                attribute: 0,
                name: "x".into(),
                start: 0,
                roles: vec![ColumnRole::PolarPos, ColumnRole::PolarNeg],
            }],
        )
        .unwrap();
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        assert!(matches!(
            predict_scores(&tree, &[0.5, 0.15]),
            Ok(scores) if scores == vec![1.0, 0.0]
        ));
        assert!(matches!(
            predict_scores(&tree, &[0.5]),
            Err(TreeError::ColumnOutOfRange { .. })
        ));
    }

    #[test]
    fn grow_rejects_bad_inputs() {
        let labels = [0, 1];
        let m = polar_line(&[Some(0.1), Some(0.9)], &labels, 2);
        let empty = m.subset(&[]);
        assert!(matches!(
            grow_tree(&empty, &[], 2, &GrowParams::default()),
            Err(TreeError::EmptyDataset)
        ));
        assert!(matches!(
            grow_tree(&m, &[0], 2, &GrowParams::default()),
            Err(TreeError::LabelMismatch { .. })
        ));
        assert!(matches!(
            grow_tree(&m, &[0, 5], 2, &GrowParams::default()),
            Err(TreeError::LabelOutOfRange { label: 5, .. })
        ));
        assert!(matches!(
            grow_tree(
                &m,
                &labels,
                2,
                &GrowParams {
                    min_samples_leaf: 0,
                    max_depth: None
                }
            ),
            Err(TreeError::InvalidParams(_))
        ));
    }

    #[test]
    fn prune_alpha_zero_is_identity_and_infinity_collapses() {
        let labels = [0, 0, 1, 1];
        let m = polar_line(&[Some(0.1), Some(0.2), Some(0.8), Some(0.9)], &labels, 2);
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        assert_eq!(prune_ccp(tree.clone(), 0.0), tree);
        assert_eq!(
            prune_ccp(tree, f64::INFINITY),
            TreeNode::Leaf {
                class_counts: vec![2, 2]
            }
        );
    }

    #[test]
    fn prune_collapses_a_weak_stump() {
        // 6 rows, 5 A + 1 B, split isolates the lone B:
        // g = (R(root) − R(subtree)) / 1 = (1/6 − 0) / 1 = 1/6
        let labels = [0, 0, 0, 0, 0, 1];
        let m = polar_line(
            &[
                Some(0.1),
                Some(0.2),
                Some(0.3),
                Some(0.4),
                Some(0.5),
                Some(0.6),
            ],
            &labels,
            2,
        );
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        assert_eq!(tree.n_leaves(), 2);
        // below the effective alpha: kept
        assert_eq!(prune_ccp(tree.clone(), 0.01).n_leaves(), 2);
        // exactly the effective alpha: kept (pruning requires g strictly below)
        assert_eq!(prune_ccp(tree.clone(), 1.0 / 6.0).n_leaves(), 2);
        // above: collapsed
        assert_eq!(
            prune_ccp(tree, 0.2),
            TreeNode::Leaf {
                class_counts: vec![5, 1]
            }
        );
    }

    #[test]
    fn render_is_stable_and_indented() {
        let labels = [0, 0, 1, 1];
        let m = polar_line(&[Some(0.1), Some(0.2), Some(0.8), Some(0.9)], &labels, 2);
        let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
        let rendered = tree.render(&m.column_names);
        assert_eq!(rendered, "split x.pos <= 0.5\n  leaf [2, 0]\n  leaf [0, 2]\n");
    }

    #[test]
    fn gini_is_zero_for_pure_and_relabel_invariant() {
        assert_eq!(gini(&[7, 0, 0], 7), 0.0);
        assert_eq!(gini(&[0, 0, 0], 0), 0.0);
        let a = gini(&[3, 5, 2], 10);
        let b = gini(&[2, 3, 5], 10);
        assert_eq!(a, b);
    }

    #[test]
    fn mia_enumerate_example_column() {
        // (0.2, 0.8, Missing): one threshold at 0.5, missing left/right, plus
        // the standalone missing split
        let column = [Some(0.2), Some(0.8), None];
        let splits = mia_enumerate(&column, 0);
        let bipartitions: BTreeSet<&[usize]> =
            splits.iter().map(|(_, bp)| bp.rows()).collect();
        let expected: BTreeSet<&[usize]> = [
            &[0, 2][..], // {0,2} | {1}: missing left
            &[0][..],    // {0} | {1,2}: missing right
            &[0, 1][..], // {2} | {0,1} canonicalised to the side with row 0
        ]
        .into_iter()
        .collect();
        assert_eq!(bipartitions, expected);
        assert_eq!(splits.len(), 3);
    }

    #[test]
    fn mia_without_missing_reduces_to_plain_thresholds() {
        let column = [Some(0.1), Some(0.4), Some(0.9)];
        let splits = mia_enumerate(&column, 0);
        // two thresholds, each giving one bipartition (left/right coincide)
        assert_eq!(splits.len(), 2);
        assert!(splits
            .iter()
            .all(|(s, _)| s.missing_side != MissingSide::Alone));
    }

    #[test]
    fn mia_all_missing_has_no_splits() {
        let column: [Option<f64>; 3] = [None, None, None];
        assert!(mia_enumerate(&column, 0).is_empty());
    }

    #[test]
    fn polar_enumerate_single_row_is_empty() {
        assert!(polar_enumerate(&[0.3], &[0.7]).is_empty());
    }

    fn polar_columns(column: &[Option<f64>]) -> (Vec<f64>, Vec<f64>) {
        column
            .iter()
            .map(|&v| {
                let [p, n] = polar_encode_boscovich(v).unwrap();
                (p, n)
            })
            .unzip()
    }

    #[test]
    fn polar_enumerate_matches_mia_on_example() {
        let column = [Some(0.2), Some(0.8), None];
        let (pos, neg) = polar_columns(&column);
        let polar: BTreeSet<Bipartition> = polar_enumerate(&pos, &neg).into_iter().collect();
        let mia: BTreeSet<Bipartition> =
            mia_enumerate(&column, 0).into_iter().map(|(_, bp)| bp).collect();
        assert_eq!(polar, mia);
    }

    #[test]
    fn polar_enumerate_without_missing_matches_raw_thresholds() {
        let column = [Some(0.1), Some(0.4), Some(0.9), Some(0.6)];
        let (pos, neg) = polar_columns(&column);
        let polar: BTreeSet<Bipartition> = polar_enumerate(&pos, &neg).into_iter().collect();
        let mia: BTreeSet<Bipartition> =
            mia_enumerate(&column, 0).into_iter().map(|(_, bp)| bp).collect();
        assert_eq!(polar, mia);
    }

    /// Collapsing subtree relation: `pruned` must equal `original` except
    /// that some internal nodes are replaced by leaves with the subtree's
    /// aggregate counts.
    fn is_collapse_of(original: &TreeNode, pruned: &TreeNode) -> bool {
        match (original, pruned) {
            (orig, TreeNode::Leaf { class_counts }) => orig.class_counts() == *class_counts,
            (
                TreeNode::Internal {
                    split: s1,
                    left: l1,
                    right: r1,
                },
                TreeNode::Internal {
                    split: s2,
                    left: l2,
                    right: r2,
                },
            ) => s1 == s2 && is_collapse_of(l1, l2) && is_collapse_of(r1, r2),
            (TreeNode::Leaf { .. }, TreeNode::Internal { .. }) => false,
        }
    }

    proptest! {
        #[test]
        fn mia_equivalence_random_columns(
            raw in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 2..=30),
            missing_rate in prop::sample::select(vec![0.0f64, 0.2, 0.5]),
        ) {
            let column: Vec<Option<f64>> = raw
                .iter()
                .map(|&(v, coin)| if coin < missing_rate { None } else { Some(v) })
                .collect();
            let (pos, neg) = polar_columns(&column);
            let polar: BTreeSet<Bipartition> = polar_enumerate(&pos, &neg).into_iter().collect();
            let mia: BTreeSet<Bipartition> =
                mia_enumerate(&column, 0).into_iter().map(|(_, bp)| bp).collect();
            prop_assert_eq!(polar, mia);
        }

        #[test]
        fn training_accuracy_is_monotone_in_depth(
            values in prop::collection::vec(0.0f64..=1.0, 6..=24),
            seed in 0u64..500,
        ) {
            let labels: Vec<usize> = values
                .iter()
                .enumerate()
                .map(|(i, _)| ((i as u64).wrapping_mul(seed + 7) % 13 % 2) as usize)
                .collect();
            let options: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
            let m = polar_line(&options, &labels, 2);
            let mut last = 0.0;
            for depth in 0..5 {
                let tree = grow_tree(
                    &m,
                    &labels,
                    2,
                    &GrowParams { min_samples_leaf: 1, max_depth: Some(depth) },
                )
                .unwrap();
                let acc = train_accuracy(&tree, &m, &labels);
                prop_assert!(acc >= last - 1e-12, "depth {depth}: {acc} < {last}");
                last = acc;
            }
        }

        #[test]
        fn pruning_shrinks_monotonically_and_collapses_subtrees(
            values in prop::collection::vec(0.0f64..=1.0, 6..=24),
            seed in 0u64..500,
        ) {
            let labels: Vec<usize> = values
                .iter()
                .enumerate()
                .map(|(i, _)| ((i as u64).wrapping_mul(seed + 3) % 11 % 2) as usize)
                .collect();
            let options: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
            let m = polar_line(&options, &labels, 2);
            let tree = grow_tree(&m, &labels, 2, &GrowParams::default()).unwrap();
            let mut last_size = usize::MAX;
            for alpha in [0.0, 0.01, 0.05, 0.2, 1.0] {
                let pruned = prune_ccp(tree.clone(), alpha);
                prop_assert!(is_collapse_of(&tree, &pruned));
                prop_assert!(pruned.n_nodes() <= last_size);
                last_size = pruned.n_nodes();
            }
        }

        #[test]
        fn predicted_scores_sum_to_one(
            values in prop::collection::vec(0.0f64..=1.0, 4..=16),
            q in 0.0f64..=1.0,
        ) {
            let labels: Vec<usize> = (0..values.len()).map(|i| i % 3).collect();
            let options: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
            let m = polar_line(&options, &labels, 3);
            let tree = grow_tree(&m, &labels, 3, &GrowParams::default()).unwrap();
            let scores = predict_scores(&tree, &[q, 1.0 - q]).unwrap();
            prop_assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
