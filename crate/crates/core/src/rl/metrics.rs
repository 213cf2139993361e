//! Evaluation metrics: confusion matrix, macro precision/recall/F1,
//! reward-based accuracy, and stratified k-fold aggregation.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::env::{argmax, RewardStructure};
use crate::error::{CoreError, Result};
use crate::features::FeatureMatrix;
use crate::net::{forward, HybridNetParams, Mode};
use crate::rng::{stream_rng, Stream};

/// Metric suite in percent units. `fold_mean`/`fold_std` are present when
/// k-fold evaluation was requested.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub reward_based_accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    /// Classes whose precision or recall denominator was zero (contributed 0).
    pub degenerate_classes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold_mean: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold_std: Option<BTreeMap<String, f64>>,
}

/// Confusion matrix with rows = true class, columns = predicted class.
pub fn confusion_counts(labels: &[usize], preds: &[usize], n_classes: usize) -> Array2<usize> {
    let mut confusion = Array2::zeros((n_classes, n_classes));
    for (l, p) in labels.iter().zip(preds) {
        confusion[(*l, *p)] += 1;
    }
    confusion
}

struct MacroScores {
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    degenerate: Vec<usize>,
}

fn macro_scores(confusion: &Array2<usize>) -> MacroScores {
    let n_classes = confusion.nrows();
    let total: usize = confusion.iter().sum();
    let trace: usize = (0..n_classes).map(|i| confusion[(i, i)]).sum();
    let accuracy = 100.0 * trace as f64 / total as f64;

    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut f1_sum = 0.0;
    let mut degenerate = Vec::new();
    for c in 0..n_classes {
        let tp = confusion[(c, c)] as f64;
        let pred_c: f64 = (0..n_classes).map(|r| confusion[(r, c)] as f64).sum();
        let true_c: f64 = (0..n_classes).map(|k| confusion[(c, k)] as f64).sum();
        let mut flagged = false;
        let precision = if pred_c > 0.0 {
            tp / pred_c
        } else {
            flagged = true;
            0.0
        };
        let recall = if true_c > 0.0 {
            tp / true_c
        } else {
            flagged = true;
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if flagged {
            degenerate.push(c);
        }
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }
    let k = n_classes as f64;
    MacroScores {
        accuracy,
        precision: 100.0 * precision_sum / k,
        recall: 100.0 * recall_sum / k,
        f1: 100.0 * f1_sum / k,
        degenerate,
    }
}

/// Reward-based accuracy from the fraction of correct predictions:
/// `100 (p r_correct + (1 - p) r_incorrect)`.
pub fn reward_based_accuracy_from_fraction(p: f64, reward: &RewardStructure) -> f64 {
    100.0 * (p * reward.r_correct + (1.0 - p) * reward.r_incorrect)
}

/// Reward-based accuracy from a confusion matrix.
pub fn reward_based_accuracy(confusion: &Array2<usize>, reward: &RewardStructure) -> Result<f64> {
    let total: usize = confusion.iter().sum();
    if total == 0 {
        return Err(CoreError::Argument("empty confusion matrix".into()));
    }
    let trace: usize = (0..confusion.nrows()).map(|i| confusion[(i, i)]).sum();
    Ok(reward_based_accuracy_from_fraction(
        trace as f64 / total as f64,
        reward,
    ))
}

/// Metrics for a fixed set of predictions.
pub fn evaluate_predictions(
    labels: &[usize],
    preds: &[usize],
    n_classes: usize,
    reward: &RewardStructure,
) -> Result<Metrics> {
    if labels.is_empty() || labels.len() != preds.len() {
        return Err(CoreError::Argument(
            "need equally many labels and predictions, at least one".into(),
        ));
    }
    let confusion = confusion_counts(labels, preds, n_classes);
    let scores = macro_scores(&confusion);
    let rba = reward_based_accuracy(&confusion, reward)?;
    Ok(Metrics {
        accuracy: scores.accuracy,
        f1: scores.f1,
        precision: scores.precision,
        recall: scores.recall,
        reward_based_accuracy: rba,
        confusion: confusion
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
        degenerate_classes: scores.degenerate,
        fold_mean: None,
        fold_std: None,
    })
}

/// Seeded stratified fold assignment: returns `fold_of[trial]` in `0..k`.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(CoreError::Argument("need at least 2 folds".into()));
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    for class in 0..n_classes {
        let count = labels.iter().filter(|l| **l == class).count();
        if count < k {
            return Err(CoreError::Argument(format!(
                "class {class} has {count} trials, fewer than {k} folds"
            )));
        }
    }
    let mut rng = stream_rng(seed, Stream::Folds);
    let mut fold_of = vec![0usize; labels.len()];
    for class in 0..n_classes {
        let mut idxs: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        idxs.shuffle(&mut rng);
        for (pos, idx) in idxs.into_iter().enumerate() {
            fold_of[idx] = pos % k;
        }
    }
    Ok(fold_of)
}

/// Greedy-policy predictions of the network over the feature matrix.
pub fn greedy_predictions(net: &HybridNetParams, fm: &FeatureMatrix) -> Result<Vec<usize>> {
    let mut preds = Vec::with_capacity(fm.n_trials());
    for row in fm.values.rows() {
        let (q, _) = forward(net, &row.to_vec(), Mode::Eval)?;
        preds.push(argmax(&q));
    }
    Ok(preds)
}

/// Evaluate the network on `fm` with greedy actions. With `k_folds`, metrics
/// additionally aggregate as mean and population std over seeded stratified
/// folds of the same data.
pub fn evaluate(
    net: &HybridNetParams,
    fm: &FeatureMatrix,
    reward: &RewardStructure,
    k_folds: Option<usize>,
    seed: u64,
) -> Result<Metrics> {
    if fm.n_trials() == 0 {
        return Err(CoreError::Argument("empty feature matrix".into()));
    }
    let n_classes = net.n_actions();
    let preds = greedy_predictions(net, fm)?;
    let mut metrics = evaluate_predictions(&fm.labels, &preds, n_classes, reward)?;

    if let Some(k) = k_folds {
        let fold_of = stratified_folds(&fm.labels, k, seed)?;
        let mut per_fold: Vec<Metrics> = Vec::with_capacity(k);
        for fold in 0..k {
            let idxs: Vec<usize> = (0..fm.n_trials()).filter(|i| fold_of[*i] == fold).collect();
            let labels: Vec<usize> = idxs.iter().map(|&i| fm.labels[i]).collect();
            let fold_preds: Vec<usize> = idxs.iter().map(|&i| preds[i]).collect();
            per_fold.push(evaluate_predictions(
                &labels,
                &fold_preds,
                n_classes,
                reward,
            )?);
        }
        let field = |f: fn(&Metrics) -> f64| -> (f64, f64) {
            let vals: Vec<f64> = per_fold.iter().map(f).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            (mean, var.sqrt())
        };
        let mut fold_mean = BTreeMap::new();
        let mut fold_std = BTreeMap::new();
        for (name, getter) in [
            ("accuracy", (|m: &Metrics| m.accuracy) as fn(&Metrics) -> f64),
            ("f1", |m: &Metrics| m.f1),
            ("precision", |m: &Metrics| m.precision),
            ("recall", |m: &Metrics| m.recall),
            ("reward_based_accuracy", |m: &Metrics| {
                m.reward_based_accuracy
            }),
        ] {
            let (mean, std) = field(getter);
            fold_mean.insert(name.to_string(), mean);
            fold_std.insert(name.to_string(), std);
        }
        metrics.fold_mean = Some(fold_mean);
        metrics.fold_std = Some(fold_std);
    }
    Ok(metrics)
}
