//! One-vs-rest common spatial patterns.
//!
//! For each class the spatial filters maximize the Rayleigh quotient
//! `w' S_class w / w' S_rest w`, solved as the generalized eigenproblem of
//! `(S_class, S_class + S_rest)` by whitening the composite and
//! eigendecomposing the whitened class covariance. Per-trial covariances are
//! trace-normalized before averaging, and both averages are ridge-regularized
//! with `eps_scale * trace / channels * I`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mat::{from_na, to_na};
use crate::signal::{EegRecording, Trial};

/// Fitted spatial filters for one class against the rest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CspModel {
    pub class_index: usize,
    /// n_components x channels; row i is the filter for eigenvalue i.
    #[serde(with = "crate::mat::array2")]
    pub filters: Array2<f64>,
    /// Generalized eigenvalues in [0, 1], sorted descending.
    pub eigenvalues: Vec<f64>,
    pub regularization_eps: f64,
    /// True when every eigenvalue is 0.5 within tolerance, i.e. the class is
    /// spatially indistinguishable from the rest.
    pub degenerate: bool,
}

fn trace_normalized_cov(trial: &Trial, idx: usize) -> Result<Array2<f64>> {
    let x = &trial.samples;
    let cov = x.dot(&x.t());
    let trace: f64 = cov.diag().sum();
    if !(trace > 0.0) {
        return Err(CoreError::Argument(format!(
            "trial {idx}: zero-power trial has no covariance"
        )));
    }
    Ok(cov / trace)
}

fn regularize(mut cov: Array2<f64>, eps_scale: f64) -> Array2<f64> {
    let n = cov.nrows();
    let trace: f64 = cov.diag().sum();
    let ridge = eps_scale * trace / n as f64;
    for i in 0..n {
        cov[(i, i)] += ridge;
    }
    cov
}

/// Symmetric eigendecomposition sorted by descending eigenvalue.
fn sym_eig_desc(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let na = to_na(m);
    let sym = (&na + na.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    // columns are eigenvectors, reordered to match
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Fit one CSP model per class.
pub fn csp_fit_ovr(
    rec: &EegRecording,
    n_components: usize,
    eps_scale: f64,
) -> Result<Vec<CspModel>> {
    rec.validate()?;
    let n_ch = rec.n_channels();
    if n_components == 0 || n_components > n_ch {
        return Err(CoreError::Argument(format!(
            "n_components {n_components} out of range for {n_ch} channels"
        )));
    }

    // per-trial normalized covariances, computed once
    let mut covs = Vec::with_capacity(rec.trials.len());
    for (idx, trial) in rec.trials.iter().enumerate() {
        covs.push(trace_normalized_cov(trial, idx)?);
    }

    let mut models = Vec::with_capacity(rec.n_classes());
    for class in 0..rec.n_classes() {
        let own: Vec<usize> = rec.class_trials(class);
        if own.len() < 2 {
            return Err(CoreError::Argument(format!(
                "class {class} has {} trials, need at least 2",
                own.len()
            )));
        }
        let rest: Vec<usize> = (0..rec.trials.len()).filter(|i| !own.contains(i)).collect();
        if rest.is_empty() {
            return Err(CoreError::Argument(format!(
                "class {class}: no trials outside the class"
            )));
        }

        let avg = |idxs: &[usize]| {
            let mut acc = Array2::<f64>::zeros((n_ch, n_ch));
            for &i in idxs {
                acc = acc + &covs[i];
            }
            acc / idxs.len() as f64
        };
        let sigma_class = regularize(avg(&own), eps_scale);
        let sigma_rest = regularize(avg(&rest), eps_scale);
        let composite = &sigma_class + &sigma_rest;

        let (comp_vals, comp_vecs) = sym_eig_desc(&composite);
        if comp_vals.iter().any(|v| *v <= 0.0) {
            return Err(CoreError::Numeric(format!(
                "class {class}: regularized composite covariance is not positive definite \
                 (min eigenvalue {:.3e})",
                comp_vals.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }

        // whitening W = L^{-1/2} Q^T so that W * composite * W^T = I
        let na_vecs = to_na(&comp_vecs);
        let mut whit = na_vecs.transpose();
        for (i, v) in comp_vals.iter().enumerate() {
            let s = 1.0 / v.sqrt();
            for j in 0..n_ch {
                whit[(i, j)] *= s;
            }
        }
        let whit = from_na(&whit);

        let projected = whit.dot(&sigma_class).dot(&whit.t());
        let (mut eigenvalues, rot) = sym_eig_desc(&projected);
        for v in eigenvalues.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }

        // filters: rows of R^T W, one per eigenvalue
        let filters_full = from_na(&to_na(&rot).transpose()).dot(&whit);
        let filters = filters_full
            .slice(ndarray::s![..n_components, ..])
            .to_owned();
        let eigenvalues: Vec<f64> = eigenvalues.into_iter().take(n_components).collect();
        let degenerate = eigenvalues.iter().all(|l| (l - 0.5).abs() < 1e-6);

        models.push(CspModel {
            class_index: class,
            filters,
            eigenvalues,
            regularization_eps: eps_scale,
            degenerate,
        });
    }
    Ok(models)
}

/// Project a trial into CSP component space: `filters x samples`, preserving
/// the time dimension.
pub fn csp_transform(model: &CspModel, trial: &Trial) -> Result<Array2<f64>> {
    if trial.n_channels() != model.filters.ncols() {
        return Err(CoreError::Argument(format!(
            "trial has {} channels but model was fitted on {}",
            trial.n_channels(),
            model.filters.ncols()
        )));
    }
    Ok(model.filters.dot(&trial.samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    /// Build a recording whose class covariances approach the given diagonals
    /// by planting independent channel noise with per-class variances.
    fn diag_recording(var_a: [f64; 2], var_b: [f64; 2], trials: usize, seed: u64) -> EegRecording {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let n = 4000;
        let mut make = |label: usize, var: [f64; 2]| Trial {
            samples: Array2::from_shape_fn((2, n), |(c, _)| {
                let u: f64 = rng.sample(rand_distr::StandardNormal);
                u * var[c].sqrt()
            }),
            label,
            onset_s: 0.0,
        };
        let mut all = Vec::new();
        for _ in 0..trials {
            all.push(make(0, var_a));
            all.push(make(1, var_b));
        }
        EegRecording {
            sampling_rate_hz: 250.0,
            channel_names: vec!["c0".into(), "c1".into()],
            class_labels: vec!["a".into(), "b".into()],
            trials: all,
        }
    }

    #[test]
    fn planted_diagonal_case_recovers_axis() {
        let rec = diag_recording([4.0, 1.0], [1.0, 4.0], 30, 3);
        let models = csp_fit_ovr(&rec, 2, 1e-6).unwrap();
        let top = models[0].eigenvalues[0];
        assert!((top - 0.8).abs() < 0.02, "top eigenvalue {top}");
        let w = models[0].filters.row(0);
        let cosine = w[0].abs() / (w[0] * w[0] + w[1] * w[1]).sqrt();
        assert!(cosine >= 0.999, "cosine {cosine}");
        assert!(!models[0].degenerate);
    }

    #[test]
    fn identical_classes_flagged_degenerate() {
        let rec = diag_recording([1.0, 1.0], [1.0, 1.0], 40, 4);
        let models = csp_fit_ovr(&rec, 2, 1e-6).unwrap();
        for l in &models[0].eigenvalues {
            assert!((l - 0.5).abs() < 0.02, "eigenvalue {l}");
        }
    }

    #[test]
    fn eigenvalue_complementarity_two_classes() {
        let rec = diag_recording([3.0, 1.0], [1.0, 2.0], 20, 5);
        let models = csp_fit_ovr(&rec, 2, 1e-6).unwrap();
        let a = &models[0].eigenvalues;
        let b = &models[1].eigenvalues;
        for i in 0..2 {
            assert!(
                (a[i] + b[1 - i] - 1.0).abs() < 1e-9,
                "complementarity violated: {a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn transform_identity_and_single_filter() {
        let trial = Trial {
            samples: array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
            label: 0,
            onset_s: 0.0,
        };
        let ident = CspModel {
            class_index: 0,
            filters: array![[1.0, 0.0], [0.0, 1.0]],
            eigenvalues: vec![0.8, 0.2],
            regularization_eps: 0.0,
            degenerate: false,
        };
        assert_eq!(csp_transform(&ident, &trial).unwrap(), trial.samples);

        let e1 = CspModel {
            filters: array![[1.0, 0.0]],
            eigenvalues: vec![0.8],
            ..ident
        };
        let out = csp_transform(&e1, &trial).unwrap();
        assert_eq!(out.row(0).to_vec(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn transform_rejects_channel_mismatch() {
        let model = CspModel {
            class_index: 0,
            filters: array![[1.0, 0.0, 0.0]],
            eigenvalues: vec![0.9],
            regularization_eps: 0.0,
            degenerate: false,
        };
        let trial = Trial {
            samples: array![[1.0, 2.0], [3.0, 4.0]],
            label: 0,
            onset_s: 0.0,
        };
        assert!(csp_transform(&model, &trial).is_err());
    }

    #[test]
    fn class_with_single_trial_rejected() {
        let mut rec = diag_recording([1.0, 1.0], [1.0, 1.0], 2, 6);
        // keep both class-0 trials but only one class-1 trial
        let mut seen_class1 = 0;
        rec.trials.retain(|t| {
            if t.label == 1 {
                seen_class1 += 1;
                seen_class1 <= 1
            } else {
                true
            }
        });
        let err = csp_fit_ovr(&rec, 1, 1e-6).unwrap_err();
        assert!(matches!(err, CoreError::Argument(_)), "{err}");
        assert!(err.to_string().contains("class 1"), "{err}");
    }

    #[test]
    fn json_round_trip_keeps_filters() {
        let model = CspModel {
            class_index: 1,
            filters: array![[0.25, -0.5], [1.5, 2.0]],
            eigenvalues: vec![0.7, 0.3],
            regularization_eps: 1e-6,
            degenerate: false,
        };
        let text = serde_json::to_string(&model).unwrap();
        let back: CspModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back.filters, model.filters);
        assert_eq!(back.eigenvalues, model.eigenvalues);
    }

    #[test]
    fn model_variance_ratio_favors_own_class() {
        let rec = diag_recording([4.0, 1.0], [1.0, 4.0], 20, 7);
        let models = csp_fit_ovr(&rec, 1, 1e-6).unwrap();
        let m = &models[0];
        let mut own = 0.0;
        let mut rest = 0.0;
        for trial in &rec.trials {
            let comp = csp_transform(m, trial).unwrap();
            let row = comp.row(0);
            let var = row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64;
            if trial.label == 0 {
                own += var;
            } else {
                rest += var;
            }
        }
        assert!(own / rest >= 1.0, "variance ratio {}", own / rest);
    }
}
