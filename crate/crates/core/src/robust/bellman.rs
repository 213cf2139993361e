//! Worst-case Bellman backups, robust policy evaluation, and robust value
//! iteration.

use ndarray::{Array1, Array2, ArrayView1};

use super::mdp::{RobustMdp, UncertaintySet};
use crate::error::{CoreError, Result};

/// Worst-case expected next value `inf_{p in P} p' V` over the uncertainty
/// set anchored at the nominal row. Reduces to `p' V` at `delta = 0`.
pub fn worst_case_value(p_row: &ArrayView1<f64>, v: &ArrayView1<f64>, set: &UncertaintySet) -> f64 {
    let nominal: f64 = p_row.dot(v);
    match set {
        UncertaintySet::Contamination { delta } => {
            if *delta == 0.0 {
                return nominal;
            }
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            (1.0 - delta) * nominal + delta * min
        }
        UncertaintySet::Ipm { delta } => {
            if *delta == 0.0 {
                return nominal;
            }
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            nominal - delta * (max - min) / 2.0
        }
    }
}

/// Unbiased single-sample estimate of [`worst_case_value`] given the sampled
/// next state's value and the full value vector.
pub fn empirical_worst_case(next_value: f64, v: &ArrayView1<f64>, set: &UncertaintySet) -> f64 {
    match set {
        UncertaintySet::Contamination { delta } => {
            if *delta == 0.0 {
                return next_value;
            }
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            (1.0 - delta) * next_value + delta * min
        }
        UncertaintySet::Ipm { delta } => {
            if *delta == 0.0 {
                return next_value;
            }
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            next_value - delta * (max - min) / 2.0
        }
    }
}

/// Robust Bellman operator for a fixed policy:
/// `(T V)(s) = sum_a pi(a|s) [r(s,a) + gamma inf_p p' V]`.
pub fn robust_bellman(
    v: &Array1<f64>,
    mdp: &RobustMdp,
    set: &UncertaintySet,
    pi: &Array2<f64>,
) -> Result<Array1<f64>> {
    mdp.validate_policy(pi)?;
    set.validate()?;
    let mut out = Array1::zeros(mdp.n_states);
    for s in 0..mdp.n_states {
        let mut acc = 0.0;
        for a in 0..mdp.n_actions {
            let w = pi[(s, a)];
            if w == 0.0 {
                continue;
            }
            let row = mdp.kernel.slice(ndarray::s![s, a, ..]);
            acc += w * (mdp.reward[(s, a)] + mdp.gamma * worst_case_value(&row, &v.view(), set));
        }
        out[s] = acc;
    }
    Ok(out)
}

/// Optimal robust Bellman operator (max over actions).
pub fn robust_bellman_optimal(v: &Array1<f64>, mdp: &RobustMdp, set: &UncertaintySet) -> Array1<f64> {
    Array1::from_shape_fn(mdp.n_states, |s| {
        (0..mdp.n_actions)
            .map(|a| {
                let row = mdp.kernel.slice(ndarray::s![s, a, ..]);
                mdp.reward[(s, a)] + mdp.gamma * worst_case_value(&row, &v.view(), set)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Robust optimal value by value iteration to within `tol` in sup-norm.
pub fn robust_value_iteration(
    mdp: &RobustMdp,
    set: &UncertaintySet,
    tol: f64,
) -> Result<Array1<f64>> {
    if !(tol > 0.0) {
        return Err(CoreError::Argument("tol must be positive".into()));
    }
    mdp.validate()?;
    set.validate()?;
    let mut v = Array1::zeros(mdp.n_states);
    // residual threshold that bounds the distance to the fixed point by tol
    let threshold = tol * (1.0 - mdp.gamma) / mdp.gamma.max(1e-12);
    for _ in 0..1_000_000 {
        let next = robust_bellman_optimal(&v, mdp, set);
        let residual = next
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = next;
        if residual <= threshold {
            return Ok(v);
        }
    }
    Err(CoreError::Numeric(
        "robust value iteration failed to converge".into(),
    ))
}

/// Robust value of a fixed policy by fixed-point iteration of `T^pi`.
pub fn robust_policy_evaluation(
    mdp: &RobustMdp,
    set: &UncertaintySet,
    pi: &Array2<f64>,
    tol: f64,
) -> Result<Array1<f64>> {
    if !(tol > 0.0) {
        return Err(CoreError::Argument("tol must be positive".into()));
    }
    let mut v = Array1::zeros(mdp.n_states);
    let threshold = tol * (1.0 - mdp.gamma) / mdp.gamma.max(1e-12);
    for _ in 0..1_000_000 {
        let next = robust_bellman(&v, mdp, set, pi)?;
        let residual = next
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        v = next;
        if residual <= threshold {
            return Ok(v);
        }
    }
    Err(CoreError::Numeric(
        "robust policy evaluation failed to converge".into(),
    ))
}
