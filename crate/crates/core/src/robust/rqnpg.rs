//! Robust Q natural policy gradient actor.
//!
//! The robust Q estimate at each pair is `r(s,a) + gamma inf_p p' V_w` with
//! `V_w` the critic's value. State-action pairs are sampled from the nominal
//! discounted occupancy (geometric-horizon rollouts); the compatible linear
//! regression of Q onto the policy features is solved either by stochastic
//! iteration with `zeta_n = c1/(c2 + n)` or exactly by least squares, and the
//! actor takes the preconditioned step `theta <- theta + eta u`.

use ndarray::{Array1, Array2};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::mdp::{LinearFeatures, RobustMdp, UncertaintySet};
use super::rltd::{sample_categorical, CriticState};
use super::worst_case_value;
use crate::error::{CoreError, Result};
use crate::mat::to_na;
use crate::rng::{stream_rng, Stream};
use rand::Rng;

/// Log-linear policy parameters.
#[derive(Debug, Clone)]
pub struct ActorState {
    pub theta: Array1<f64>,
}

impl ActorState {
    pub fn uniform(policy_dim: usize) -> Self {
        ActorState {
            theta: Array1::zeros(policy_dim),
        }
    }

    /// `pi(a|s) = exp(phi(s,a)' theta) / sum_a' exp(phi(s,a')' theta)`.
    pub fn policy(&self, features: &LinearFeatures, n_states: usize, n_actions: usize) -> Array2<f64> {
        log_linear_policy(&self.theta, features, n_states, n_actions)
    }
}

/// Softmax policy over the linear scores.
pub fn log_linear_policy(
    theta: &Array1<f64>,
    features: &LinearFeatures,
    n_states: usize,
    n_actions: usize,
) -> Array2<f64> {
    let mut pi = Array2::zeros((n_states, n_actions));
    for s in 0..n_states {
        let scores: Vec<f64> = (0..n_actions)
            .map(|a| features.policy_row(s, a, n_actions).dot(theta))
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (a, sc) in scores.iter().enumerate() {
            let e = (sc - max).exp();
            pi[(s, a)] = e;
            total += e;
        }
        for a in 0..n_actions {
            pi[(s, a)] /= total;
        }
    }
    pi
}

/// Robust Q table `r(s,a) + gamma inf_p p' V` from a value vector.
pub fn robust_q_from_values(
    values: &Array1<f64>,
    mdp: &RobustMdp,
    set: &UncertaintySet,
) -> Array2<f64> {
    Array2::from_shape_fn((mdp.n_states, mdp.n_actions), |(s, a)| {
        let row = mdp.kernel.slice(ndarray::s![s, a, ..]);
        mdp.reward[(s, a)] + mdp.gamma * worst_case_value(&row, &values.view(), set)
    })
}

/// How the compatible regression is solved.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegressionMode {
    /// `u <- u + zeta_n (q - u'phi) phi` with `zeta_n = c1/(c2 + n)`.
    Stochastic { c1: f64, c2: f64 },
    /// Normal-equations solve over the sampled pairs.
    Exact,
}

impl Default for RegressionMode {
    fn default() -> Self {
        RegressionMode::Stochastic { c1: 10.0, c2: 10.0 }
    }
}

/// Sample `n` state-action pairs from the discounted occupancy of `pi` on the
/// nominal model: rollouts from `rho` terminate with probability `1 - gamma`
/// per step, and the pair at termination is recorded.
pub fn sample_occupancy(
    pi: &Array2<f64>,
    mdp: &RobustMdp,
    n: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<(usize, usize)> {
    let rho: Vec<f64> = mdp.rho.to_vec();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = sample_categorical(&rho, rng);
        loop {
            let a = sample_categorical(pi.row(s).as_slice().expect("contiguous"), rng);
            if rng.gen_range(0.0..1.0) >= mdp.gamma {
                out.push((s, a));
                break;
            }
            let row = mdp.kernel.slice(ndarray::s![s, a, ..]);
            s = sample_categorical(row.as_slice().expect("contiguous"), rng);
        }
    }
    out
}

fn fit_regression(
    q: &Array2<f64>,
    samples: &[(usize, usize)],
    features: &LinearFeatures,
    n_actions: usize,
    mode: RegressionMode,
) -> Result<Array1<f64>> {
    let d = features.policy_dim();
    match mode {
        RegressionMode::Stochastic { c1, c2 } => {
            let mut u = Array1::zeros(d);
            for (n, (s, a)) in samples.iter().enumerate() {
                let phi = features.policy_row(*s, *a, n_actions);
                let zeta = c1 / (c2 + (n + 1) as f64);
                let err = q[(*s, *a)] - phi.dot(&u);
                for (ui, fi) in u.iter_mut().zip(phi.iter()) {
                    *ui += zeta * err * fi;
                }
            }
            Ok(u)
        }
        RegressionMode::Exact => {
            let mut gram = Array2::<f64>::zeros((d, d));
            let mut rhs = Array1::<f64>::zeros(d);
            for (s, a) in samples {
                let phi = features.policy_row(*s, *a, n_actions);
                for i in 0..d {
                    rhs[i] += q[(*s, *a)] * phi[i];
                    for j in 0..d {
                        gram[(i, j)] += phi[i] * phi[j];
                    }
                }
            }
            // ridge for unvisited directions
            for i in 0..d {
                gram[(i, i)] += 1e-10;
            }
            let sol = to_na(&gram)
                .lu()
                .solve(&nalgebra::DVector::from_iterator(d, rhs.iter().copied()))
                .ok_or_else(|| CoreError::Numeric("regression solve failed".into()))?;
            Ok(Array1::from_iter(sol.iter().copied()))
        }
    }
}

/// One actor update from the critic's value estimate.
#[allow(clippy::too_many_arguments)]
pub fn rqnpg(
    actor: &ActorState,
    critic: &CriticState,
    mdp: &RobustMdp,
    set: &UncertaintySet,
    features: &LinearFeatures,
    n_samples: usize,
    eta: f64,
    mode: RegressionMode,
    seed: u64,
) -> Result<ActorState> {
    let values = critic.values(features);
    let q = robust_q_from_values(&values, mdp, set);
    rqnpg_with_q(actor, &q, mdp, features, n_samples, eta, mode, seed)
}

/// Actor update with an externally supplied Q table (used by oracles).
#[allow(clippy::too_many_arguments)]
pub fn rqnpg_with_q(
    actor: &ActorState,
    q: &Array2<f64>,
    mdp: &RobustMdp,
    features: &LinearFeatures,
    n_samples: usize,
    eta: f64,
    mode: RegressionMode,
    seed: u64,
) -> Result<ActorState> {
    if n_samples < features.policy_dim() {
        return Err(CoreError::Argument(format!(
            "need at least {} occupancy samples for a {}-dimensional regression, got {n_samples}",
            features.policy_dim(),
            features.policy_dim()
        )));
    }
    if eta == 0.0 {
        return Ok(actor.clone());
    }
    let pi = actor.policy(features, mdp.n_states, mdp.n_actions);
    let mut rng = stream_rng(seed, Stream::Actor);
    let samples = sample_occupancy(&pi, mdp, n_samples, &mut rng);
    let u = fit_regression(q, &samples, features, mdp.n_actions, mode)?;
    Ok(ActorState {
        theta: &actor.theta + &(u * eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robust::rltd::StepSizeRule;
    use ndarray::{array, Array3};

    /// One-state two-armed bandit with rewards (1, 0).
    fn bandit() -> RobustMdp {
        let mut kernel = Array3::zeros((1, 2, 1));
        kernel[(0, 0, 0)] = 1.0;
        kernel[(0, 1, 0)] = 1.0;
        RobustMdp {
            n_states: 1,
            n_actions: 2,
            kernel,
            reward: array![[1.0, 0.0]],
            gamma: 0.5,
            rho: array![1.0],
        }
    }

    #[test]
    fn eta_zero_leaves_theta_unchanged() {
        let mdp = bandit();
        let features = LinearFeatures::tabular(1, 2);
        let actor = ActorState::uniform(2);
        let critic = CriticState {
            w: array![0.0],
            steps: 0,
            rule: StepSizeRule::default(),
        };
        let set = UncertaintySet::Contamination { delta: 0.0 };
        let next = rqnpg(
            &actor, &critic, &mdp, &set, &features, 100, 0.0,
            RegressionMode::default(), 1,
        )
        .unwrap();
        assert_eq!(next.theta, actor.theta);
    }

    #[test]
    fn too_few_samples_rejected() {
        let mdp = bandit();
        let features = LinearFeatures::tabular(1, 2);
        let actor = ActorState::uniform(2);
        let q = array![[1.0, 0.0]];
        assert!(rqnpg_with_q(
            &actor, &q, &mdp, &features, 1, 0.1,
            RegressionMode::default(), 1
        )
        .is_err());
    }

    #[test]
    fn bandit_probability_of_better_arm_rises_monotonically() {
        let mdp = bandit();
        let features = LinearFeatures::tabular(1, 2);
        let set = UncertaintySet::Contamination { delta: 0.0 };
        let mut actor = ActorState::uniform(2);
        let critic = CriticState {
            w: array![1.0],
            steps: 0,
            rule: StepSizeRule::default(),
        };
        let mut prev = 0.5;
        for t in 0..25 {
            actor = rqnpg(
                &actor, &critic, &mdp, &set, &features, 2_000, 0.5,
                RegressionMode::default(), 100 + t,
            )
            .unwrap();
            let pi = actor.policy(&features, 1, 2);
            assert!(
                pi[(0, 0)] > prev - 1e-9,
                "iteration {t}: {} after {prev}",
                pi[(0, 0)]
            );
            prev = pi[(0, 0)];
        }
        assert!(prev > 0.95, "arm-0 probability only reached {prev}");
    }

    #[test]
    fn exact_regression_recovers_q_at_visited_pairs() {
        let mdp = bandit();
        let features = LinearFeatures::tabular(1, 2);
        let q = array![[0.8, -0.3]];
        let samples = vec![(0, 0), (0, 1), (0, 0), (0, 1)];
        let u = fit_regression(&q, &samples, &features, 2, RegressionMode::Exact).unwrap();
        assert!((u[0] - 0.8).abs() < 1e-8);
        assert!((u[1] + 0.3).abs() < 1e-8);
    }

    #[test]
    fn stochastic_regression_approaches_q_with_deterministic_targets() {
        let mdp = bandit();
        let features = LinearFeatures::tabular(1, 2);
        let q = array![[0.9, 0.1]];
        let pi = mdp.uniform_policy();
        let mut rng = stream_rng(3, Stream::Actor);
        let samples = sample_occupancy(&pi, &mdp, 20_000, &mut rng);
        let u = fit_regression(&q, &samples, &features, 2, RegressionMode::default()).unwrap();
        assert!((u[0] - 0.9).abs() < 1e-6, "u0 {}", u[0]);
        assert!((u[1] - 0.1).abs() < 1e-6, "u1 {}", u[1]);
    }

    #[test]
    fn npg_equals_multiplicative_weights_on_bandit() {
        // with tabular features, exact Q, and exact regression, one step is
        // theta_a += eta Q(a): softmax then matches the closed form
        let mdp = bandit();
        let features = LinearFeatures::tabular(1, 2);
        let q = robust_q_from_values(
            &array![2.0],
            &mdp,
            &UncertaintySet::Contamination { delta: 0.0 },
        );
        let eta = 0.1;
        let mut actor = ActorState::uniform(2);
        let mut closed = [0.5f64, 0.5];
        for t in 0..5 {
            actor = rqnpg_with_q(
                &actor, &q, &mdp, &features, 20_000, eta,
                RegressionMode::Exact, 40 + t,
            )
            .unwrap();
            // closed-form multiplicative weights
            let w0 = closed[0] * (eta * q[(0, 0)]).exp();
            let w1 = closed[1] * (eta * q[(0, 1)]).exp();
            closed = [w0 / (w0 + w1), w1 / (w0 + w1)];
            let pi = actor.policy(&features, 1, 2);
            assert!(
                (pi[(0, 0)] - closed[0]).abs() < 1e-9,
                "step {t}: {} vs {}",
                pi[(0, 0)],
                closed[0]
            );
        }
    }
}
