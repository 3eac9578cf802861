//! Metrics and the experiment protocol: confusion statistics, ROC/AUC,
//! stratified k-fold cross-validation and train-ratio sweeps.
//!
//! Ratios that divide by zero are reported as `None` ("undefined"), never as
//! 0 or 1.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{self, Dataset, Label, MinMaxScaler};
use crate::inference::classify_batch;
use crate::numeric::real_string;
use crate::training::{train, HyperParams};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("no evaluated instances")]
    Empty,
    #[error("ROC needs at least one positive and one negative instance")]
    SingleClass,
    #[error("{} predictions for {} instances", .predicted, .truth)]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<crate::Error>,
    },
    #[error("sweep needs at least one ratio")]
    NoRatios,
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write report: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<Self, EvaluationError> {
        if truth.len() != predicted.len() {
            return Err(EvaluationError::LengthMismatch {
                truth: truth.len(),
                predicted: predicted.len(),
            });
        }
        let mut cm = Self::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Positive, Label::Positive) => cm.tp += 1,
                (Label::Negative, Label::Positive) => cm.fp += 1,
                (Label::Negative, Label::Negative) => cm.tn += 1,
                (Label::Positive, Label::Negative) => cm.fn_ += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }
}

/// Threshold-based statistics of a confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<ClassMetrics, EvaluationError> {
    if cm.total() == 0 {
        return Err(EvaluationError::Empty);
    }
    let sensitivity = ratio(cm.tp, cm.tp + cm.fn_);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let f1 = match (precision, sensitivity) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(ClassMetrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        sensitivity,
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        precision,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub auc: f64,
    /// `(fpr, tpr)` vertices from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Trapezoidal area under `points`.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }
}

/// ROC curve and Mann–Whitney AUC: the probability that a positive outscores a
/// negative, with ties counting one half.
pub fn roc_auc(scores: &[(f64, Label)]) -> Result<RocCurve, EvaluationError> {
    let n_pos = scores.iter().filter(|s| s.1 == Label::Positive).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvaluationError::SingleClass);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Sweep thresholds from high to low; each tie group is one vertex.
    // `twice_u` accumulates 2U so half credits stay integral.
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut twice_u: u128 = 0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start;
        let (mut group_pos, mut group_neg) = (0usize, 0usize);
        while end < sorted.len() && sorted[end].0.total_cmp(&sorted[start].0).is_eq() {
            match sorted[end].1 {
                Label::Positive => group_pos += 1,
                Label::Negative => group_neg += 1,
            }
            end += 1;
        }
        // Positives in this group beat every negative scored strictly lower.
        let neg_below = n_neg - fp - group_neg;
        twice_u += 2 * (group_pos as u128) * (neg_below as u128) + (group_pos as u128) * (group_neg as u128);
        tp += group_pos;
        fp += group_neg;
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        start = end;
    }
    let auc = twice_u as f64 / (2.0 * n_pos as f64 * n_neg as f64);
    Ok(RocCurve { auc, points })
}

/// Full report for one evaluation (a fold, a pooled run, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub n: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: ClassMetrics,
    /// `None` when the evaluated set holds a single class.
    pub auc: Option<f64>,
    pub roc_points: Vec<(f64, f64)>,
}

/// A predicted label and the graded score behind it (higher = more `+1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub label: Label,
    pub score: f64,
}

pub fn report(truth: &[Label], predicted: &[Scored]) -> Result<MetricReport, EvaluationError> {
    let labels: Vec<Label> = predicted.iter().map(|p| p.label).collect();
    let confusion = ConfusionMatrix::from_labels(truth, &labels)?;
    let metrics = compute_metrics(&confusion)?;
    let scores: Vec<(f64, Label)> = predicted.iter().zip(truth).map(|(p, &t)| (p.score, t)).collect();
    let (auc, roc_points) = match roc_auc(&scores) {
        Ok(curve) => (Some(curve.auc), curve.points),
        Err(EvaluationError::SingleClass) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        n: truth.len(),
        confusion,
        metrics,
        auc,
        roc_points,
    })
}

/// Something that can be trained on one dataset and score another.
pub trait FitPredict: Sync {
    fn fit_predict(&self, train: &Dataset, test: &Dataset, seed: u64) -> crate::Result<Vec<Scored>>;
}

/// The spanning-tree classifier, optionally behind min-max scaling fitted on
/// the training side.
#[derive(Debug, Clone)]
pub struct SptClassifier {
    pub params: HyperParams,
    pub min_max_scale: bool,
}

impl SptClassifier {
    pub fn new(params: HyperParams) -> Self {
        Self {
            params,
            min_max_scale: false,
        }
    }
}

impl FitPredict for SptClassifier {
    fn fit_predict(&self, train_set: &Dataset, test: &Dataset, seed: u64) -> crate::Result<Vec<Scored>> {
        let (train_set, test) = if self.min_max_scale {
            let scaler = MinMaxScaler::fit(train_set);
            (scaler.transform(train_set), scaler.transform(test))
        } else {
            (train_set.clone(), test.clone())
        };
        let split = dataset::make_class_split(&train_set, self.params.s_fraction, seed)?;
        let model = train(&split, &self.params)?;
        let rows: Vec<Vec<f64>> = test.instances().iter().map(|i| i.features.clone()).collect();
        Ok(classify_batch(&rows, &model)?
            .into_iter()
            .map(|p| Scored {
                label: p.label,
                score: p.vote_share(),
            })
            .collect())
    }
}

/// Mean, min and max of a metric over the runs where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Spread {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let defined: Vec<f64> = values.into_iter().flatten().collect();
        if defined.is_empty() {
            return Self {
                mean: None,
                min: None,
                max: None,
            };
        }
        Self {
            mean: Some(defined.iter().sum::<f64>() / defined.len() as f64),
            min: defined.iter().copied().reduce(f64::min),
            max: defined.iter().copied().reduce(f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSpread {
    pub accuracy: Spread,
    pub sensitivity: Spread,
    pub specificity: Spread,
    pub precision: Spread,
    pub f1: Spread,
    pub auc: Spread,
}

impl MetricSpread {
    fn of(reports: &[&MetricReport]) -> Self {
        let pick = |f: fn(&MetricReport) -> Option<f64>| Spread::of(reports.iter().map(|r| f(r)));
        Self {
            accuracy: pick(|r| r.metrics.accuracy),
            sensitivity: pick(|r| r.metrics.sensitivity),
            specificity: pick(|r| r.metrics.specificity),
            precision: pick(|r| r.metrics.precision),
            f1: pick(|r| r.metrics.f1),
            auc: pick(|r| r.auc),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub folds: Vec<MetricReport>,
    /// Unweighted mean / min / max over folds.
    pub spread: MetricSpread,
    /// All test predictions pooled into one confusion matrix and ROC curve.
    pub pooled: MetricReport,
}

pub fn cross_validate(d: &Dataset, params: &HyperParams, k: usize) -> crate::Result<CrossValidation> {
    params.validate()?;
    cross_validate_with(d, k, params.seed, &SptClassifier::new(params.clone()))
}

/// Stratified k-fold evaluation of any classifier. Fold `f` trains with seed
/// `seed + f`.
pub fn cross_validate_with<C: FitPredict>(
    d: &Dataset,
    k: usize,
    seed: u64,
    classifier: &C,
) -> crate::Result<CrossValidation> {
    let folds = dataset::kfold(d, k, seed)?;
    let outcomes = folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let wrap = |e: crate::Error| {
                crate::Error::from(EvaluationError::Fold {
                    fold: f,
                    source: Box::new(e),
                })
            };
            let scored = classifier
                .fit_predict(&fold.train, &fold.test, seed.wrapping_add(f as u64))
                .map_err(wrap)?;
            let truth: Vec<Label> = fold.test.instances().iter().map(|i| i.label).collect();
            Ok((truth, scored))
        })
        .collect::<crate::Result<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(outcomes.len());
    let mut all_truth = Vec::new();
    let mut all_scored = Vec::new();
    for (truth, scored) in outcomes {
        reports.push(report(&truth, &scored)?);
        all_truth.extend(truth);
        all_scored.extend(scored);
    }
    let pooled = report(&all_truth, &all_scored)?;
    let refs: Vec<&MetricReport> = reports.iter().collect();
    Ok(CrossValidation {
        spread: MetricSpread::of(&refs),
        folds: reports,
        pooled,
    })
}

/// Resampled splits evaluated at each train ratio.
pub const SWEEP_REPETITIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub accuracy: Spread,
    /// Set when this ratio could not be evaluated; other rows still run.
    pub error: Option<String>,
}

pub fn train_ratio_sweep(d: &Dataset, params: &HyperParams, ratios: &[f64]) -> crate::Result<Vec<SweepRow>> {
    params.validate()?;
    train_ratio_sweep_with(d, ratios, params.seed, &SptClassifier::new(params.clone()))
}

/// Repetition `r` at each ratio splits with seed `seed + r`.
pub fn train_ratio_sweep_with<C: FitPredict>(
    d: &Dataset,
    ratios: &[f64],
    seed: u64,
    classifier: &C,
) -> crate::Result<Vec<SweepRow>> {
    if ratios.is_empty() {
        return Err(EvaluationError::NoRatios.into());
    }
    Ok(ratios
        .par_iter()
        .map(|&ratio| {
            let accuracies = (0..SWEEP_REPETITIONS)
                .into_par_iter()
                .map(|r| {
                    let rep_seed = seed.wrapping_add(r as u64);
                    let (train_set, test) = dataset::split_train_test(d, ratio, rep_seed)?;
                    let scored = classifier.fit_predict(&train_set, &test, rep_seed)?;
                    let truth: Vec<Label> = test.instances().iter().map(|i| i.label).collect();
                    Ok(report(&truth, &scored)?.metrics.accuracy)
                })
                .collect::<crate::Result<Vec<_>>>();
            match accuracies {
                Ok(acc) => SweepRow {
                    ratio,
                    accuracy: Spread::of(acc),
                    error: None,
                },
                Err(e) => SweepRow {
                    ratio,
                    accuracy: Spread::of([]),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Report files

fn cell(value: Option<f64>) -> String {
    value.map(real_string::encode).unwrap_or_else(|| "undefined".into())
}

const METRIC_COLUMNS: [&str; 6] = ["accuracy", "sensitivity", "specificity", "precision", "f1", "auc"];

fn metric_cells(r: &MetricReport) -> Vec<String> {
    [
        r.metrics.accuracy,
        r.metrics.sensitivity,
        r.metrics.specificity,
        r.metrics.precision,
        r.metrics.f1,
        r.auc,
    ]
    .into_iter()
    .map(cell)
    .collect()
}

fn spread_cells(s: &MetricSpread, pick: fn(&Spread) -> Option<f64>) -> Vec<String> {
    [&s.accuracy, &s.sensitivity, &s.specificity, &s.precision, &s.f1, &s.auc]
        .into_iter()
        .map(|x| cell(pick(x)))
        .collect()
}

/// One row per fold, then `mean`, `min`, `max` and `pooled` rows.
pub fn write_cv_csv<W: Write>(out: W, dataset: &str, cv: &CrossValidation) -> Result<(), EvaluationError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["dataset", "fold", "n", "tp", "fp", "tn", "fn"];
    header.extend(METRIC_COLUMNS);
    w.write_record(&header)?;
    let counts = |r: &MetricReport| {
        let c = r.confusion;
        [r.n, c.tp, c.fp, c.tn, c.fn_].map(|v| v.to_string())
    };
    for (f, r) in cv.folds.iter().enumerate() {
        let mut row = vec![dataset.to_string(), f.to_string()];
        row.extend(counts(r));
        row.extend(metric_cells(r));
        w.write_record(&row)?;
    }
    let blank = || vec![String::new(); 5];
    for (name, pick) in [
        ("mean", (|s: &Spread| s.mean) as fn(&Spread) -> Option<f64>),
        ("min", |s: &Spread| s.min),
        ("max", |s: &Spread| s.max),
    ] {
        let mut row = vec![dataset.to_string(), name.to_string()];
        row.extend(blank());
        row.extend(spread_cells(&cv.spread, pick));
        w.write_record(&row)?;
    }
    let mut row = vec![dataset.to_string(), "pooled".to_string()];
    row.extend(counts(&cv.pooled));
    row.extend(metric_cells(&cv.pooled));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

/// Tab-separated `(run, fpr, tpr)` vertices.
pub fn write_roc_tsv<W: Write>(mut out: W, runs: &[(String, &[(f64, f64)])]) -> Result<(), EvaluationError> {
    writeln!(out, "run\tfpr\ttpr")?;
    for (run, points) in runs {
        for (fpr, tpr) in points.iter() {
            writeln!(out, "{run}\t{}\t{}", real_string::encode(*fpr), real_string::encode(*tpr))?;
        }
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, dataset: &str, rows: &[SweepRow]) -> Result<(), EvaluationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "ratio", "mean_accuracy", "min_accuracy", "max_accuracy", "error"])?;
    for row in rows {
        w.write_record([
            dataset.to_string(),
            real_string::encode(row.ratio),
            cell(row.accuracy.mean),
            cell(row.accuracy.min),
            cell(row.accuracy.max),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
