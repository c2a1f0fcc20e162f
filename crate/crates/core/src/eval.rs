//! Evaluation protocol: repeated stratified cross-validation, AUROC (binary
//! and multiclass one-vs-one averaging), one-sided Wilcoxon signed-rank
//! comparison, and the benchmark driver tying encodings and classifiers
//! together.
//!
//! Everything is deterministic given the fold-plan seed: fold assignment
//! draws from a seeded generator, fold×repeat cells are computed
//! independently (optionally in parallel) and assembled in a fixed order, so
//! repeated runs — and runs at different thread counts — produce identical
//! reports.

use std::fmt::Write as _;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::distance::PNorm;
use crate::encoding::{EncodingChoice, EncodingError, FittedEncoding};
use crate::ingest::Dataset;
use crate::neighbors::{
    NeighborModel, NeighborsError, ScoreVector, Weighting, DEFAULT_K_FRNN, DEFAULT_K_NN,
};
use crate::tree::{grow_tree, predict_scores, prune_ccp, GrowParams, TreeError, DEFAULT_CCP_ALPHA};

/// Errors produced by the evaluation protocol.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid fold plan: {0}")]
    InvalidPlan(String),
    #[error("fold contains a single class; AUROC is undefined")]
    SingleClassFold,
    #[error("only {n} nonzero paired differences; the signed-rank test needs at least 3")]
    TooFewPairs { n: usize },
    #[error("paired samples have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("benchmark needs at least one encoding and one classifier")]
    EmptyConfiguration,
    #[error("unknown classifier {0:?}; valid names: nn, nn-d, frnn, cart")]
    UnknownClassifier(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Neighbors(#[from] NeighborsError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Cross-validation layout: `n_folds`-fold stratified CV repeated
/// `n_repeats` times, all randomness drawn from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
}

impl Default for FoldPlan {
    fn default() -> Self {
        FoldPlan {
            n_folds: 5,
            n_repeats: 5,
            seed: 0,
        }
    }
}

/// Materialised fold assignment: for each repeat, the fold index of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAssignment {
    pub n_folds: usize,
    pub n_repeats: usize,
    /// `assignment[repeat][row]` is the fold of that row in that repeat.
    assignment: Vec<Vec<usize>>,
    /// Classes with fewer rows than folds; they are missing from some
    /// training partitions.
    pub degenerate_classes: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, repeat: usize, row: usize) -> usize {
        self.assignment[repeat][row]
    }

    /// Row indices of the training and test partitions of one fold,
    /// ascending.
    pub fn split(&self, repeat: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (row, &f) in self.assignment[repeat].iter().enumerate() {
            if f == fold {
                test.push(row);
            } else {
                train.push(row);
            }
        }
        (train, test)
    }
}

/// Stratified fold assignment: per repeat, the rows of each class are
/// shuffled and dealt round-robin to folds, so per-class fold counts differ
/// by at most one. Deterministic given the plan seed; repeats consume the
/// same generator stream in order.
pub fn stratified_folds(
    labels: &[usize],
    n_classes: usize,
    plan: &FoldPlan,
) -> Result<FoldAssignment, EvalError> {
    if plan.n_folds < 2 {
        return Err(EvalError::InvalidPlan(format!(
            "need at least 2 folds, got {}",
            plan.n_folds
        )));
    }
    if plan.n_repeats == 0 {
        return Err(EvalError::InvalidPlan("need at least 1 repeat".into()));
    }
    if labels.is_empty() {
        return Err(EvalError::InvalidPlan("no rows to assign".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (row, &label) in labels.iter().enumerate() {
        if label >= n_classes {
            return Err(EvalError::InvalidPlan(format!(
                "label {label} out of range for {n_classes} classes"
            )));
        }
        by_class[label].push(row);
    }
    let degenerate_classes: Vec<usize> = (0..n_classes)
        .filter(|&c| by_class[c].len() < plan.n_folds)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut assignment = Vec::with_capacity(plan.n_repeats);
    for _ in 0..plan.n_repeats {
        let mut folds = vec![0usize; labels.len()];
        for rows in &by_class {
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut rng);
            for (i, &row) in shuffled.iter().enumerate() {
                folds[row] = i % plan.n_folds;
            }
        }
        assignment.push(folds);
    }
    Ok(FoldAssignment {
        n_folds: plan.n_folds,
        n_repeats: plan.n_repeats,
        assignment,
        degenerate_classes,
    })
}

/// 1-based ranks with ties assigned the average rank of their group.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Binary AUROC via the Mann-Whitney statistic: the probability that a
/// random positive row outscores a random negative row, ties counting half.
pub fn auroc_binary(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            a: scores.len(),
            b: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClassFold);
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Multiclass AUROC by one-vs-one averaging: the mean over unordered class
/// pairs `{i, j}` of `(A(i|j) + A(j|i)) / 2`, where `A(i|j)` is the binary
/// AUROC of the class-`i` score column restricted to rows of classes `i` and
/// `j`. Only classes present in `labels` enter the average.
pub fn auroc_multiclass(scores: &[ScoreVector], labels: &[usize]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            a: scores.len(),
            b: labels.len(),
        });
    }
    let mut present: Vec<usize> = labels.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(EvalError::SingleClassFold);
    }
    for (row, score) in scores.iter().enumerate() {
        if score.len() <= *present.last().expect("non-empty") {
            return Err(EvalError::LengthMismatch {
                a: score.len(),
                b: labels[row] + 1,
            });
        }
    }
    let mut sum = 0.0;
    let mut n_pairs = 0usize;
    for (a, &ci) in present.iter().enumerate() {
        for &cj in &present[a + 1..] {
            let rows: Vec<usize> = (0..labels.len())
                .filter(|&r| labels[r] == ci || labels[r] == cj)
                .collect();
            let col = |class: usize| -> Vec<f64> {
                rows.iter().map(|&r| scores[r][class]).collect()
            };
            let is_class = |class: usize| -> Vec<bool> {
                rows.iter().map(|&r| labels[r] == class).collect()
            };
            let a_ij = auroc_binary(&col(ci), &is_class(ci))?;
            let a_ji = auroc_binary(&col(cj), &is_class(cj))?;
            sum += 0.5 * (a_ij + a_ji);
            n_pairs += 1;
        }
    }
    Ok(sum / n_pairs as f64)
}

/// Outcome of a one-sided Wilcoxon signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences (W+).
    pub statistic: f64,
    /// One-sided p-value for the alternative "first sample > second sample".
    pub p_value: f64,
    /// Pairs remaining after dropping zero differences.
    pub n_used: usize,
    /// Whether the exact null distribution was used (n ≤ 16) rather than the
    /// normal approximation.
    pub exact: bool,
}

/// One-sided Wilcoxon signed-rank test of paired samples, alternative
/// `a > b`.
///
/// Zero differences are dropped; tied absolute differences get average
/// ranks. For up to 16 usable pairs the p-value comes from the exact null
/// distribution (all 2^n sign patterns, enumerated by dynamic programming
/// over doubled integer ranks); beyond that, from the normal approximation
/// with continuity correction and tie-corrected variance.
pub fn wilcoxon_one_sided(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < 3 {
        return Err(EvalError::TooFewPairs { n });
    }

    // doubled average ranks of |d| are always integers, even with ties
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut doubled_ranks = vec![0u64; n];
    let mut tie_groups: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[idx[j + 1]].abs() == diffs[idx[i]].abs() {
            j += 1;
        }
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &idx[i..=j] {
            doubled_ranks[k] = doubled;
        }
        tie_groups.push(j - i + 1);
        i = j + 1;
    }
    let w_doubled: u64 = (0..n)
        .filter(|&i| diffs[i] > 0.0)
        .map(|i| doubled_ranks[i])
        .sum();
    let statistic = w_doubled as f64 / 2.0;

    let p_value = if n <= 16 {
        let total: u64 = doubled_ranks.iter().sum();
        let mut counts = vec![0.0f64; total as usize + 1];
        counts[0] = 1.0;
        for &dr in &doubled_ranks {
            let dr = dr as usize;
            for s in (dr..counts.len()).rev() {
                counts[s] += counts[s - dr];
            }
        }
        let tail: f64 = counts[w_doubled as usize..].iter().sum();
        tail / 2.0f64.powi(n as i32)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        for &t in &tie_groups {
            let t = t as f64;
            var -= (t * t * t - t) / 48.0;
        }
        let sd = var.sqrt();
        let z = (statistic - 0.5 - mean) / sd;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (1.0 - normal.cdf(z)).clamp(f64::MIN_POSITIVE, 1.0)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        n_used: n,
        exact: n <= 16,
    })
}

/// A classifier configuration for the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    /// Unweighted k-nearest neighbours.
    Nn { k: usize, p: PNorm },
    /// Distance-weighted k-nearest neighbours.
    NnDudani { k: usize, p: PNorm },
    /// Fuzzy-rough nearest neighbours with linear OWA weights.
    FrnnOwa { k: usize },
    /// CART with Gini impurity and cost-complexity pruning.
    Cart {
        alpha: f64,
        min_samples_leaf: usize,
        max_depth: Option<usize>,
    },
}

impl ClassifierSpec {
    pub fn nn() -> Self {
        ClassifierSpec::Nn {
            k: DEFAULT_K_NN,
            p: PNorm::ONE,
        }
    }

    pub fn nn_dudani() -> Self {
        ClassifierSpec::NnDudani {
            k: DEFAULT_K_NN,
            p: PNorm::ONE,
        }
    }

    pub fn frnn_owa() -> Self {
        ClassifierSpec::FrnnOwa { k: DEFAULT_K_FRNN }
    }

    pub fn cart() -> Self {
        ClassifierSpec::Cart {
            alpha: DEFAULT_CCP_ALPHA,
            min_samples_leaf: 1,
            max_depth: None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClassifierSpec::Nn { .. } => "nn",
            ClassifierSpec::NnDudani { .. } => "nn-d",
            ClassifierSpec::FrnnOwa { .. } => "frnn",
            ClassifierSpec::Cart { .. } => "cart",
        }
    }

    /// A spec with default hyperparameters for a classifier name.
    pub fn from_name(name: &str) -> Result<Self, EvalError> {
        match name {
            "nn" => Ok(ClassifierSpec::nn()),
            "nn-d" => Ok(ClassifierSpec::nn_dudani()),
            "frnn" => Ok(ClassifierSpec::frnn_owa()),
            "cart" => Ok(ClassifierSpec::cart()),
            other => Err(EvalError::UnknownClassifier(other.to_owned())),
        }
    }

    /// Fits on the encoded training fold and scores every test row.
    fn fit_and_score(
        &self,
        train: &crate::encoding::EncodedMatrix,
        train_labels: &[usize],
        n_classes: usize,
        test: &crate::encoding::EncodedMatrix,
    ) -> Result<Vec<ScoreVector>, EvalError> {
        match self {
            ClassifierSpec::Nn { k, p }
            | ClassifierSpec::NnDudani { k, p } => {
                let weighting = match self {
                    ClassifierSpec::Nn { .. } => Weighting::Uniform,
                    _ => Weighting::Dudani,
                };
                let model = NeighborModel::new(train, train_labels, n_classes, *k, *p, weighting)?;
                test.rows().map(|row| Ok(model.scores(row)?)).collect()
            }
            ClassifierSpec::FrnnOwa { k } => {
                let model = NeighborModel::new(
                    train,
                    train_labels,
                    n_classes,
                    *k,
                    PNorm::ONE,
                    Weighting::FrnnOwa,
                )?;
                test.rows().map(|row| Ok(model.scores(row)?)).collect()
            }
            ClassifierSpec::Cart {
                alpha,
                min_samples_leaf,
                max_depth,
            } => {
                let params = GrowParams {
                    min_samples_leaf: *min_samples_leaf,
                    max_depth: *max_depth,
                };
                let tree = grow_tree(train, train_labels, n_classes, &params)?;
                let tree = prune_ccp(tree, *alpha);
                test.rows()
                    .map(|row| Ok(predict_scores(&tree, row)?))
                    .collect()
            }
        }
    }
}

/// Fold scores and their mean for one encoding×classifier combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub encoding: EncodingChoice,
    pub classifier: String,
    /// One entry per (repeat, fold) in repeat-major order; `None` marks a
    /// skipped fold (single-class test partition).
    pub fold_scores: Vec<Option<f64>>,
    /// Mean over the non-skipped folds (NaN if every fold was skipped).
    pub mean: f64,
}

/// One pairwise encoding comparison under one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub classifier: String,
    pub first: EncodingChoice,
    pub second: EncodingChoice,
    /// `None` when the test was degenerate (see `note`).
    pub outcome: Option<WilcoxonResult>,
    pub note: Option<String>,
}

/// Full benchmark output for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
    pub cells: Vec<ReportCell>,
    pub comparisons: Vec<Comparison>,
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    /// Looks up a cell by encoding and classifier label.
    pub fn cell(&self, encoding: EncodingChoice, classifier: &str) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.encoding == encoding && c.classifier == classifier)
    }

    /// Writes one row per encoding×classifier with all fold scores and the
    /// mean, full precision, empty fields for skipped folds.
    pub fn write_scores_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut header = String::from("encoding,classifier,mean");
        for r in 0..self.n_repeats {
            for f in 0..self.n_folds {
                let _ = write!(header, ",r{r}f{f}");
            }
        }
        writeln!(out, "{header}")?;
        for cell in &self.cells {
            let mut line = format!("{},{}", cell.encoding.name(), cell.classifier);
            if cell.mean.is_nan() {
                line.push(',');
            } else {
                let _ = write!(line, ",{}", cell.mean);
            }
            for score in &cell.fold_scores {
                match score {
                    Some(v) => {
                        let _ = write!(line, ",{v}");
                    }
                    None => line.push(','),
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Writes a Markdown summary: one mean-AUROC table (classifiers × the
    /// compared encodings, `*` marking each row's best value) and one
    /// Wilcoxon table, with the one-sided orientation documented up front.
    pub fn write_markdown(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "# Benchmark report")?;
        writeln!(out)?;
        writeln!(
            out,
            "- folds: {}, repeats: {}, seed: {}",
            self.n_folds, self.n_repeats, self.seed
        )?;
        writeln!(
            out,
            "- Wilcoxon alternative is one-sided: \"the first-listed encoding outscores \
             the second\"; p < 0.5 favours the first encoding, p > 0.5 the second."
        )?;
        writeln!(out)?;

        let mut encodings: Vec<EncodingChoice> = Vec::new();
        let mut classifiers: Vec<&str> = Vec::new();
        for cell in &self.cells {
            if !encodings.contains(&cell.encoding) {
                encodings.push(cell.encoding);
            }
            if !classifiers.contains(&cell.classifier.as_str()) {
                classifiers.push(&cell.classifier);
            }
        }

        writeln!(out, "## Mean AUROC")?;
        writeln!(out)?;
        let mut header = String::from("| classifier |");
        let mut rule = String::from("|---|");
        for enc in &encodings {
            let _ = write!(header, " {} |", enc.name());
            rule.push_str("---|");
        }
        writeln!(out, "{header}")?;
        writeln!(out, "{rule}")?;
        for clf in &classifiers {
            let means: Vec<f64> = encodings
                .iter()
                .map(|&enc| self.cell(enc, clf).map_or(f64::NAN, |c| c.mean))
                .collect();
            let best = means
                .iter()
                .copied()
                .filter(|m| !m.is_nan())
                .fold(f64::NEG_INFINITY, f64::max);
            let mut line = format!("| {clf} |");
            for &mean in &means {
                if mean.is_nan() {
                    line.push_str(" n/a |");
                } else if mean == best {
                    let _ = write!(line, " {mean:.4}* |");
                } else {
                    let _ = write!(line, " {mean:.4} |");
                }
            }
            writeln!(out, "{line}")?;
        }
        writeln!(out)?;

        if !self.comparisons.is_empty() {
            writeln!(out, "## Wilcoxon signed-rank (one-sided)")?;
            writeln!(out)?;
            writeln!(out, "| classifier | comparison | statistic | p-value |")?;
            writeln!(out, "|---|---|---|---|")?;
            for cmp in &self.comparisons {
                let pair = format!("{} > {}", cmp.first.name(), cmp.second.name());
                match (&cmp.outcome, &cmp.note) {
                    (Some(w), _) => {
                        writeln!(
                            out,
                            "| {} | {} | {} | {:.6} |",
                            cmp.classifier, pair, w.statistic, w.p_value
                        )?;
                    }
                    (None, note) => {
                        writeln!(
                            out,
                            "| {} | {} | n/a | n/a ({}) |",
                            cmp.classifier,
                            pair,
                            note.as_deref().unwrap_or("degenerate")
                        )?;
                    }
                }
            }
            writeln!(out)?;
        }

        if !self.warnings.is_empty() {
            writeln!(out, "## Warnings")?;
            writeln!(out)?;
            for w in &self.warnings {
                writeln!(out, "- {w}")?;
            }
        }
        Ok(())
    }
}

/// Per-cell result: AUROC (or a skip) for each encoding×classifier, plus any
/// warnings, in configuration order.
struct CellOutcome {
    scores: Vec<Option<f64>>,
    warnings: Vec<String>,
}

/// Runs the full protocol on one dataset: for every repeat×fold, fit scaling
/// and encoding parameters on the training partition only, encode both
/// partitions, fit each classifier and score the test rows, and reduce each
/// encoding×classifier's fold AUROCs by the mean. Folds whose test partition
/// contains a single class are skipped and recorded. Finally, every pair of
/// encodings is compared per classifier with the one-sided Wilcoxon test
/// (alternative: the earlier-listed encoding scores higher).
pub fn run_benchmark(
    dataset: &Dataset,
    encodings: &[EncodingChoice],
    classifiers: &[ClassifierSpec],
    plan: &FoldPlan,
) -> Result<EvaluationReport, EvalError> {
    if encodings.is_empty() || classifiers.is_empty() {
        return Err(EvalError::EmptyConfiguration);
    }
    let assignment = stratified_folds(&dataset.labels, dataset.n_classes(), plan)?;
    let mut warnings: Vec<String> = assignment
        .degenerate_classes
        .iter()
        .map(|&c| {
            format!(
                "class {:?} has fewer rows than folds; it is absent from some partitions",
                dataset.class_names[c]
            )
        })
        .collect();

    let cell_ids: Vec<(usize, usize)> = (0..plan.n_repeats)
        .flat_map(|r| (0..plan.n_folds).map(move |f| (r, f)))
        .collect();
    let outcomes: Result<Vec<CellOutcome>, EvalError> = cell_ids
        .par_iter()
        .map(|&(repeat, fold)| {
            let (train_idx, test_idx) = assignment.split(repeat, fold);
            evaluate_cell(dataset, encodings, classifiers, repeat, fold, &train_idx, &test_idx)
        })
        .collect();
    let outcomes = outcomes?;

    let n_cells = plan.n_repeats * plan.n_folds;
    let mut cells = Vec::with_capacity(encodings.len() * classifiers.len());
    for (e, &encoding) in encodings.iter().enumerate() {
        for (c, classifier) in classifiers.iter().enumerate() {
            let slot = e * classifiers.len() + c;
            let fold_scores: Vec<Option<f64>> =
                (0..n_cells).map(|cell| outcomes[cell].scores[slot]).collect();
            let present: Vec<f64> = fold_scores.iter().flatten().copied().collect();
            let mean = if present.is_empty() {
                f64::NAN
            } else {
                present.iter().sum::<f64>() / present.len() as f64
            };
            cells.push(ReportCell {
                encoding,
                classifier: classifier.label().to_owned(),
                fold_scores,
                mean,
            });
        }
    }
    for outcome in outcomes {
        warnings.extend(outcome.warnings);
    }

    let mut comparisons = Vec::new();
    for classifier in classifiers {
        for (i, &first) in encodings.iter().enumerate() {
            for &second in &encodings[i + 1..] {
                let a = cells
                    .iter()
                    .find(|c| c.encoding == first && c.classifier == classifier.label())
                    .expect("cell exists");
                let b = cells
                    .iter()
                    .find(|c| c.encoding == second && c.classifier == classifier.label())
                    .expect("cell exists");
                let paired: Vec<(f64, f64)> = a
                    .fold_scores
                    .iter()
                    .zip(&b.fold_scores)
                    .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                    .collect();
                let xs: Vec<f64> = paired.iter().map(|(x, _)| *x).collect();
                let ys: Vec<f64> = paired.iter().map(|(_, y)| *y).collect();
                let (outcome, note) = match wilcoxon_one_sided(&xs, &ys) {
                    Ok(result) => (Some(result), None),
                    Err(EvalError::TooFewPairs { n }) => {
                        (None, Some(format!("only {n} nonzero paired differences")))
                    }
                    Err(other) => return Err(other),
                };
                comparisons.push(Comparison {
                    classifier: classifier.label().to_owned(),
                    first,
                    second,
                    outcome,
                    note,
                });
            }
        }
    }

    Ok(EvaluationReport {
        n_folds: plan.n_folds,
        n_repeats: plan.n_repeats,
        seed: plan.seed,
        cells,
        comparisons,
        warnings,
    })
}

fn evaluate_cell(
    dataset: &Dataset,
    encodings: &[EncodingChoice],
    classifiers: &[ClassifierSpec],
    repeat: usize,
    fold: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<CellOutcome, EvalError> {
    let n_slots = encodings.len() * classifiers.len();
    let mut outcome = CellOutcome {
        scores: vec![None; n_slots],
        warnings: Vec::new(),
    };

    let test_labels: Vec<usize> = test_idx.iter().map(|&r| dataset.labels[r]).collect();
    let mut present = test_labels.clone();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        outcome.warnings.push(format!(
            "repeat {repeat} fold {fold}: single-class test partition, AUROC skipped"
        ));
        return Ok(outcome);
    }

    let train_ds = dataset.subset(train_idx);
    let test_ds = dataset.subset(test_idx);
    let train_labels = &train_ds.labels;
    let n_classes = dataset.n_classes();

    for (e, &encoding) in encodings.iter().enumerate() {
        let fitted = FittedEncoding::fit(&train_ds, encoding)?;
        let enc_train = fitted.encode(&train_ds)?;
        let enc_test = fitted.encode(&test_ds)?;
        for (c, classifier) in classifiers.iter().enumerate() {
            let slot = e * classifiers.len() + c;
            let scored =
                classifier.fit_and_score(&enc_train, train_labels, n_classes, &enc_test);
            match scored {
                Ok(scores) => {
                    outcome.scores[slot] = Some(auroc_multiclass(&scores, &test_labels)?);
                }
                Err(EvalError::Neighbors(NeighborsError::ClassTooSmall { class })) => {
                    outcome.warnings.push(format!(
                        "repeat {repeat} fold {fold}: {} on {} skipped, class {class} \
                         missing from the training partition",
                        classifier.label(),
                        encoding.name()
                    ));
                }
                Err(other) => return Err(other),
            }
        }
    }
    Ok(outcome)
}
