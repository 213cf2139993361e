//! Robust linear temporal-difference critic.
//!
//! Simulates the nominal chain under the policy and applies TD updates with
//! the empirical robust Bellman target: the sampled next-state value passes
//! through the single-sample worst-case correction, which is unbiased for
//! the robust backup. Step sizes follow `alpha_k = a / (b + k)`.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::bellman::empirical_worst_case;
use super::mdp::{LinearFeatures, RobustMdp, UncertaintySet};
use crate::error::Result;
use crate::rng::{stream_rng, Stream};

/// `alpha_k = a / (b + k)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepSizeRule {
    pub a: f64,
    pub b: f64,
}

impl Default for StepSizeRule {
    fn default() -> Self {
        StepSizeRule { a: 60.0, b: 600.0 }
    }
}

impl StepSizeRule {
    pub fn alpha(&self, k: usize) -> f64 {
        self.a / (self.b + k as f64)
    }
}

/// Critic weights after `steps` TD updates.
#[derive(Debug, Clone)]
pub struct CriticState {
    pub w: Array1<f64>,
    pub steps: usize,
    pub rule: StepSizeRule,
}

impl CriticState {
    /// Value estimates `Psi w` over all states.
    pub fn values(&self, features: &LinearFeatures) -> Array1<f64> {
        features.value_features.dot(&self.w)
    }
}

pub(crate) fn sample_categorical(probs: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Run `k_steps` robust TD updates under policy `pi` on the nominal chain.
pub fn rltd(
    pi: &Array2<f64>,
    mdp: &RobustMdp,
    set: &UncertaintySet,
    features: &LinearFeatures,
    k_steps: usize,
    rule: StepSizeRule,
    seed: u64,
) -> Result<CriticState> {
    mdp.validate_policy(pi)?;
    set.validate()?;
    let mut rng = stream_rng(seed, Stream::Critic);
    let d = features.value_dim();
    let mut w = Array1::zeros(d);

    let rho: Vec<f64> = mdp.rho.to_vec();
    let mut state = sample_categorical(&rho, &mut rng);

    for k in 0..k_steps {
        let action = sample_categorical(pi.row(state).as_slice().expect("contiguous"), &mut rng);
        let reward = mdp.reward[(state, action)];
        let kernel_row = mdp.kernel.slice(ndarray::s![state, action, ..]);
        let next = sample_categorical(kernel_row.as_slice().expect("contiguous"), &mut rng);

        let values = features.value_features.dot(&w);
        let target = reward + mdp.gamma * empirical_worst_case(values[next], &values.view(), set);
        let psi = features.value_features.row(state);
        let prediction = psi.dot(&w);
        let alpha = rule.alpha(k);
        let err = target - prediction;
        for (wi, fi) in w.iter_mut().zip(psi.iter()) {
            *wi += alpha * err * fi;
        }
        state = next;
    }

    Ok(CriticState {
        w,
        steps: k_steps,
        rule,
    })
}
