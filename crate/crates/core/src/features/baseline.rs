//! One-vs-rest linear baseline trained with hinge-loss subgradient descent.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;

use super::assemble::FeatureMatrix;
use crate::error::{CoreError, Result};
use crate::rng::{stream_rng, Stream};

/// Linear one-vs-rest classifier: per-class weight row plus bias.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LinearModel {
    pub fn n_classes(&self) -> usize {
        self.weights.nrows()
    }
}

/// Train with hinge loss and L2 penalty `l2`, visiting trials in a fresh
/// seeded shuffle each epoch. Deterministic given the seed.
pub fn train_linear_baseline(
    fm: &FeatureMatrix,
    epochs: usize,
    lr: f64,
    l2: f64,
    seed: u64,
) -> Result<LinearModel> {
    fm.validate()?;
    let n_classes = fm.n_classes();
    if n_classes < 2 {
        return Err(CoreError::Argument(format!(
            "need at least 2 classes, found {n_classes}"
        )));
    }
    let n_features = fm.n_features();
    let mut weights = Array2::<f64>::zeros((n_classes, n_features));
    let mut bias = Array1::<f64>::zeros(n_classes);
    let mut order: Vec<usize> = (0..fm.n_trials()).collect();
    let mut rng = stream_rng(seed, Stream::Shuffle);

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = fm.values.row(i);
            for c in 0..n_classes {
                let y = if fm.labels[i] == c { 1.0 } else { -1.0 };
                let margin = y * (weights.row(c).dot(&x) + bias[c]);
                let mut w = weights.row_mut(c);
                if margin < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(x.iter()) {
                        *wj += lr * (y * xj - l2 * *wj);
                    }
                    bias[c] += lr * y;
                } else {
                    for wj in w.iter_mut() {
                        *wj -= lr * l2 * *wj;
                    }
                }
            }
        }
    }
    Ok(LinearModel { weights, bias })
}

/// Argmax of per-class scores; ties break to the lowest class index.
pub fn predict(model: &LinearModel, fm: &FeatureMatrix) -> Result<Vec<usize>> {
    if model.weights.ncols() != fm.n_features() {
        return Err(CoreError::Argument(format!(
            "model expects {} features, matrix has {}",
            model.weights.ncols(),
            fm.n_features()
        )));
    }
    Ok(fm
        .values
        .rows()
        .into_iter()
        .map(|x| {
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for c in 0..model.n_classes() {
                let score = model.weights.row(c).dot(&x) + model.bias[c];
                if score > best_score {
                    best_score = score;
                    best = c;
                }
            }
            best
        })
        .collect())
}
