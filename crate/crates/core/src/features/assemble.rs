//! Assembly of the per-trial feature vector.
//!
//! For every class model and every CSP component of the trial the pipeline
//! stacks six features: kurtosis, skewness, RMS, the absolute difference
//! between the component and its own time reversal, and the alpha and beta
//! band powers of its Welch PSD. Column order is model-major, then component,
//! then feature, and `feature_names` documents the layout as
//! `c{component}_m{model}_{feature}`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::csp::{csp_transform, CspModel};
use super::normalize::NormalizationParams;
use super::stats::{abs_diff, kurtosis, rms, skewness};
use super::welch::{band_power, welch_psd, WelchConfig};
use crate::error::{CoreError, Result};
use crate::signal::{EegRecording, FrequencyBand, Trial};

const FEATS_PER_COMPONENT: usize = 6;
const FEAT_NAMES: [&str; FEATS_PER_COMPONENT] = [
    "kurtosis",
    "skewness",
    "rms",
    "abs_diff",
    "alpha_power",
    "beta_power",
];

/// The two PSD bands stacked into the feature vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandPair {
    pub alpha: FrequencyBand,
    pub beta: FrequencyBand,
}

impl Default for BandPair {
    fn default() -> Self {
        BandPair {
            alpha: FrequencyBand::alpha(),
            beta: FrequencyBand::beta(),
        }
    }
}

/// Trials-by-features matrix with named columns and labels.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub feature_names: Vec<String>,
    pub labels: Vec<usize>,
    pub norm_state: Option<NormalizationParams>,
}

impl FeatureMatrix {
    pub fn n_trials(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.nrows() != self.labels.len() {
            return Err(CoreError::Argument(format!(
                "{} rows but {} labels",
                self.values.nrows(),
                self.labels.len()
            )));
        }
        if self.feature_names.len() != self.values.ncols() {
            return Err(CoreError::Argument(format!(
                "{} feature names but {} columns",
                self.feature_names.len(),
                self.values.ncols()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Numeric("non-finite feature value".into()));
        }
        Ok(())
    }

    /// Select a subset of rows (trial indices), preserving names and norm state.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let values = Array2::from_shape_fn((rows.len(), self.n_features()), |(i, j)| {
            self.values[(rows[i], j)]
        });
        FeatureMatrix {
            values,
            feature_names: self.feature_names.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            norm_state: self.norm_state.clone(),
        }
    }
}

/// Column names for `n_models` class models with `n_components` each.
pub fn feature_names(n_models: usize, n_components: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(n_models * n_components * FEATS_PER_COMPONENT);
    for m in 0..n_models {
        for c in 0..n_components {
            for f in FEAT_NAMES {
                names.push(format!("c{c}_m{m}_{f}"));
            }
        }
    }
    names
}

/// Feature vector for one trial. Errors carry trial/model/component context.
pub fn trial_feature_row(
    trial: &Trial,
    trial_idx: usize,
    models: &[CspModel],
    fs: f64,
    welch: &WelchConfig,
    bands: &BandPair,
) -> Result<Vec<f64>> {
    let mut row = Vec::new();
    for model in models {
        let components = csp_transform(model, trial)
            .map_err(|e| e.with_context(&format!("trial {trial_idx}, model {}", model.class_index)))?;
        for (c, comp) in components.rows().into_iter().enumerate() {
            let ctx = format!(
                "trial {trial_idx}, model {}, component {c}",
                model.class_index
            );
            let x = comp.to_vec();
            let reversed: Vec<f64> = x.iter().rev().copied().collect();
            let (seg, nfft) = welch.resolve(x.len());

            row.push(kurtosis(&x).map_err(|e| e.with_context(&ctx))?);
            row.push(skewness(&x).map_err(|e| e.with_context(&ctx))?);
            row.push(rms(&x).map_err(|e| e.with_context(&ctx))?);
            row.push(abs_diff(&x, &reversed).map_err(|e| e.with_context(&ctx))?);

            let psd = welch_psd(&x, fs, seg, welch.overlap_frac, nfft, welch.averaging)
                .map_err(|e| e.with_context(&ctx))?;
            row.push(band_power(&psd, &bands.alpha).map_err(|e| e.with_context(&ctx))?);
            row.push(band_power(&psd, &bands.beta).map_err(|e| e.with_context(&ctx))?);
        }
    }
    Ok(row)
}

/// Assemble the full feature matrix for a recording.
pub fn assemble_features(
    rec: &EegRecording,
    models: &[CspModel],
    welch: &WelchConfig,
    bands: &BandPair,
) -> Result<FeatureMatrix> {
    if models.is_empty() {
        return Err(CoreError::Argument("no CSP models supplied".into()));
    }
    let n_components = models[0].filters.nrows();
    if models.iter().any(|m| m.filters.nrows() != n_components) {
        return Err(CoreError::Argument(
            "CSP models disagree on component count".into(),
        ));
    }

    let names = feature_names(models.len(), n_components);
    let mut values = Array2::zeros((rec.trials.len(), names.len()));
    let mut labels = Vec::with_capacity(rec.trials.len());
    for (idx, trial) in rec.trials.iter().enumerate() {
        let row = trial_feature_row(trial, idx, models, rec.sampling_rate_hz, welch, bands)?;
        if row.len() != names.len() {
            return Err(CoreError::Argument(format!(
                "trial {idx}: produced {} features, expected {}",
                row.len(),
                names.len()
            )));
        }
        for (j, v) in row.into_iter().enumerate() {
            values[(idx, j)] = v;
        }
        labels.push(trial.label);
    }

    let fm = FeatureMatrix {
        values,
        feature_names: names,
        labels,
        norm_state: None,
    };
    fm.validate()?;
    Ok(fm)
}
