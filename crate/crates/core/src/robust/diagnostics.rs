//! Projection diagnostics: the stationary distribution, the mean-squared
//! projected robust Bellman error, and an empirical contraction estimate of
//! the projected robust operator.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::bellman::robust_bellman;
use super::mdp::{LinearFeatures, RobustMdp, UncertaintySet};
use crate::error::{CoreError, Result};
use crate::mat::to_na;
use crate::rng::{stream_rng, Stream};

/// Stationary distribution of a row-stochastic matrix, by linear solve of
/// `nu' P = nu'` with the normalization constraint in place of the last
/// (redundant) balance equation.
pub fn stationary_distribution(p: &Array2<f64>) -> Result<Array1<f64>> {
    let n = p.nrows();
    let mut a = to_na(&p.t().to_owned());
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(n);
    b[n - 1] = 1.0;
    let nu = a
        .lu()
        .solve(&b)
        .ok_or_else(|| CoreError::Numeric("stationary distribution solve failed".into()))?;
    if nu.iter().any(|v| *v < -1e-9) {
        return Err(CoreError::Numeric(
            "stationary distribution has negative mass; chain may be reducible".into(),
        ));
    }
    Ok(Array1::from_iter(nu.iter().copied().map(|v| v.max(0.0))))
}

/// Projection onto the feature span in the `nu`-weighted inner product:
/// `Pi = Psi (Psi' D Psi)^{-1} Psi' D`. A tiny ridge keeps the gram
/// invertible when saturated policies leave some states with (numerically)
/// zero stationary mass; those states then carry no weight in the norm
/// anyway.
fn projection_matrix(features: &LinearFeatures, nu: &Array1<f64>) -> Result<Array2<f64>> {
    let psi = &features.value_features;
    let n = psi.nrows();
    let d = psi.ncols();
    let mut psi_d = Array2::zeros((d, n));
    for i in 0..d {
        for s in 0..n {
            psi_d[(i, s)] = psi[(s, i)] * nu[s];
        }
    }
    let gram = psi_d.dot(psi); // Psi' D Psi
    let inv = to_na(&gram).try_inverse().or_else(|| {
        let trace: f64 = gram.diag().sum();
        let ridge = 1e-12 * trace.max(1.0);
        let mut damped = gram.clone();
        for i in 0..d {
            damped[(i, i)] += ridge;
        }
        to_na(&damped).try_inverse()
    });
    let inv = inv.ok_or_else(|| CoreError::Numeric("Psi' D Psi is singular".into()))?;
    let mut inv_nd = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            inv_nd[(i, j)] = inv[(i, j)];
        }
    }
    Ok(psi.dot(&inv_nd).dot(&psi_d))
}

fn weighted_norm_sq(x: &Array1<f64>, nu: &Array1<f64>) -> f64 {
    x.iter().zip(nu.iter()).map(|(v, w)| w * v * v).sum()
}

/// Mean-squared projected robust Bellman error of the critic weights `w`:
/// `|| Pi (T V_w) - V_w ||^2_nu` with `nu` the stationary distribution of the
/// nominal chain under `pi`.
pub fn mspbre(
    w: &Array1<f64>,
    pi: &Array2<f64>,
    mdp: &RobustMdp,
    set: &UncertaintySet,
    features: &LinearFeatures,
) -> Result<f64> {
    let nu = stationary_distribution(&mdp.kernel_under(pi))?;
    let proj = projection_matrix(features, &nu)?;
    let v_w = features.value_features.dot(w);
    let backed = robust_bellman(&v_w, mdp, set, pi)?;
    let diff = proj.dot(&backed) - &v_w;
    Ok(weighted_norm_sq(&diff, &nu))
}

/// Result of the contraction probe sweep.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    /// Max observed `||Pi T V - Pi T V'||_nu / ||V - V'||_nu`.
    pub factor: f64,
    pub delta: f64,
    /// Radius bound from the theory for this uncertainty set, when available.
    pub threshold: Option<f64>,
    /// Whether `delta` is below the threshold.
    pub threshold_satisfied: Option<bool>,
}

/// Estimate the Lipschitz factor of `Pi T^pi` in the `nu`-weighted norm by
/// sampling `n_probes` random value-vector pairs. Also reports the
/// small-radius threshold for the set: `1 - gamma/(2 gamma)` for the
/// contamination set and `lambda_min(Psi' D Psi) (1 - gamma)/gamma` for the
/// span-regularized set.
pub fn contraction_check(
    mdp: &RobustMdp,
    set: &UncertaintySet,
    features: &LinearFeatures,
    pi: &Array2<f64>,
    n_probes: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let nu = stationary_distribution(&mdp.kernel_under(pi))?;
    let proj = projection_matrix(features, &nu)?;

    let mut rng = stream_rng(seed, Stream::Probe);
    let scale = 1.0 / (1.0 - mdp.gamma);
    let mut factor = 0.0f64;
    for _ in 0..n_probes.max(1) {
        let v1 = Array1::from_shape_fn(mdp.n_states, |_| rng.gen_range(-scale..scale));
        let v2 = Array1::from_shape_fn(mdp.n_states, |_| rng.gen_range(-scale..scale));
        let denom = weighted_norm_sq(&(&v1 - &v2), &nu).sqrt();
        if denom < 1e-12 {
            continue;
        }
        let t1 = proj.dot(&robust_bellman(&v1, mdp, set, pi)?);
        let t2 = proj.dot(&robust_bellman(&v2, mdp, set, pi)?);
        let num = weighted_norm_sq(&(&t1 - &t2), &nu).sqrt();
        factor = factor.max(num / denom);
    }

    let threshold = match set {
        UncertaintySet::Contamination { .. } => Some(1.0 - mdp.gamma / (2.0 * mdp.gamma)),
        UncertaintySet::Ipm { .. } => {
            let psi = &features.value_features;
            let mut psi_d = Array2::zeros((psi.ncols(), psi.nrows()));
            for i in 0..psi.ncols() {
                for s in 0..psi.nrows() {
                    psi_d[(i, s)] = psi[(s, i)] * nu[s];
                }
            }
            let gram = psi_d.dot(psi);
            let eig = to_na(&gram).symmetric_eigen();
            let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            Some(lambda_min * (1.0 - mdp.gamma) / mdp.gamma)
        }
    };
    let threshold_satisfied = threshold.map(|t| set.delta() < t);

    Ok(ContractionReport {
        factor,
        delta: set.delta(),
        threshold,
        threshold_satisfied,
    })
}
