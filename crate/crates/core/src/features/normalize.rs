//! Feature normalization with fit/apply separation.
//!
//! `normalize_fit` learns per-feature statistics and transforms the input;
//! `normalize_apply` reuses stored statistics, so test data is always scaled
//! with training parameters. Constant features map to zero and are flagged.

use serde::{Deserialize, Serialize};

use super::assemble::FeatureMatrix;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    MinMax,
    ZScore,
}

/// Fitted normalization statistics. For min-max `stat_a`/`stat_b` are
/// min/max; for z-score they are mean and population standard deviation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub method: NormMethod,
    pub stat_a: Vec<f64>,
    pub stat_b: Vec<f64>,
    pub constant: Vec<bool>,
}

impl NormalizationParams {
    pub fn n_features(&self) -> usize {
        self.stat_a.len()
    }
}

fn transform(fm: &FeatureMatrix, params: &NormalizationParams) -> FeatureMatrix {
    let mut values = fm.values.clone();
    for (j, mut col) in values.columns_mut().into_iter().enumerate() {
        if params.constant[j] {
            col.fill(0.0);
            continue;
        }
        match params.method {
            NormMethod::MinMax => {
                let (lo, hi) = (params.stat_a[j], params.stat_b[j]);
                col.mapv_inplace(|v| (v - lo) / (hi - lo));
            }
            NormMethod::ZScore => {
                let (mean, std) = (params.stat_a[j], params.stat_b[j]);
                col.mapv_inplace(|v| (v - mean) / std);
            }
        }
    }
    FeatureMatrix {
        values,
        feature_names: fm.feature_names.clone(),
        labels: fm.labels.clone(),
        norm_state: Some(params.clone()),
    }
}

/// Learn statistics from `fm` and return the transformed matrix plus the
/// parameters for later application.
pub fn normalize_fit(
    fm: &FeatureMatrix,
    method: NormMethod,
) -> Result<(FeatureMatrix, NormalizationParams)> {
    fm.validate()?;
    if fm.n_trials() == 0 {
        return Err(CoreError::Argument("cannot fit on an empty matrix".into()));
    }
    let n = fm.n_features();
    let rows = fm.n_trials() as f64;
    let mut stat_a = Vec::with_capacity(n);
    let mut stat_b = Vec::with_capacity(n);
    let mut constant = Vec::with_capacity(n);

    for col in fm.values.columns() {
        match method {
            NormMethod::MinMax => {
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                constant.push(hi == lo);
                stat_a.push(lo);
                stat_b.push(hi);
            }
            NormMethod::ZScore => {
                let mean = col.sum() / rows;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / rows;
                let std = var.sqrt();
                constant.push(std == 0.0);
                stat_a.push(mean);
                stat_b.push(std);
            }
        }
    }

    let params = NormalizationParams {
        method,
        stat_a,
        stat_b,
        constant,
    };
    Ok((transform(fm, &params), params))
}

/// Apply previously fitted statistics to `fm`.
pub fn normalize_apply(fm: &FeatureMatrix, params: &NormalizationParams) -> Result<FeatureMatrix> {
    fm.validate()?;
    if params.n_features() != fm.n_features() {
        return Err(CoreError::State(format!(
            "normalization was fitted on {} features but matrix has {}",
            params.n_features(),
            fm.n_features()
        )));
    }
    Ok(transform(fm, params))
}
