//! Robust MDP data model.

use ndarray::{Array1, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Tabular MDP with a nominal kernel; robustness enters through an attached
/// [`UncertaintySet`] at evaluation time.
#[derive(Debug, Clone)]
pub struct RobustMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// Nominal kernel, indexed `[s, a, s']`; every row sums to one.
    pub kernel: Array3<f64>,
    /// Reward `r(s, a)`.
    pub reward: Array2<f64>,
    pub gamma: f64,
    /// Start distribution over states.
    pub rho: Array1<f64>,
}

impl RobustMdp {
    pub fn validate(&self) -> Result<()> {
        if self.kernel.shape() != [self.n_states, self.n_actions, self.n_states] {
            return Err(CoreError::Argument(format!(
                "kernel shape {:?} does not match {}x{}x{}",
                self.kernel.shape(),
                self.n_states,
                self.n_actions,
                self.n_states
            )));
        }
        if self.reward.shape() != [self.n_states, self.n_actions] {
            return Err(CoreError::Argument("reward shape mismatch".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(CoreError::Argument(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.kernel.slice(ndarray::s![s, a, ..]);
                if row.iter().any(|p| *p < 0.0) {
                    return Err(CoreError::Argument(format!(
                        "negative transition probability at ({s}, {a})"
                    )));
                }
                if (row.sum() - 1.0).abs() > 1e-12 {
                    return Err(CoreError::Argument(format!(
                        "kernel row ({s}, {a}) sums to {}",
                        row.sum()
                    )));
                }
            }
        }
        if (self.rho.sum() - 1.0).abs() > 1e-9 || self.rho.iter().any(|p| *p < 0.0) {
            return Err(CoreError::Argument("rho is not a distribution".into()));
        }
        Ok(())
    }

    /// State-transition matrix of the nominal chain under policy `pi`
    /// (rows = current state).
    pub fn kernel_under(&self, pi: &Array2<f64>) -> Array2<f64> {
        let mut p = Array2::zeros((self.n_states, self.n_states));
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let w = pi[(s, a)];
                if w == 0.0 {
                    continue;
                }
                for s2 in 0..self.n_states {
                    p[(s, s2)] += w * self.kernel[(s, a, s2)];
                }
            }
        }
        p
    }

    /// Expected one-step reward per state under `pi`.
    pub fn reward_under(&self, pi: &Array2<f64>) -> Array1<f64> {
        Array1::from_shape_fn(self.n_states, |s| {
            (0..self.n_actions)
                .map(|a| pi[(s, a)] * self.reward[(s, a)])
                .sum()
        })
    }

    /// Uniform policy.
    pub fn uniform_policy(&self) -> Array2<f64> {
        Array2::from_elem(
            (self.n_states, self.n_actions),
            1.0 / self.n_actions as f64,
        )
    }

    /// Check that `pi` is row-stochastic for this MDP.
    pub fn validate_policy(&self, pi: &Array2<f64>) -> Result<()> {
        if pi.shape() != [self.n_states, self.n_actions] {
            return Err(CoreError::Argument("policy shape mismatch".into()));
        }
        for (s, row) in pi.rows().into_iter().enumerate() {
            if row.iter().any(|p| *p < 0.0) || (row.sum() - 1.0).abs() > 1e-9 {
                return Err(CoreError::Argument(format!(
                    "policy row {s} is not a distribution"
                )));
            }
        }
        Ok(())
    }
}

/// JSON fixture mirror of [`RobustMdp`].
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpFixture {
    pub n_states: usize,
    pub n_actions: usize,
    pub kernel: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
    pub gamma: f64,
    pub rho: Vec<f64>,
}

impl RobustMdp {
    pub fn from_fixture_json(text: &str) -> Result<Self> {
        let fx: MdpFixture =
            serde_json::from_str(text).map_err(|e| CoreError::Format(format!("fixture: {e}")))?;
        let mut kernel = Array3::zeros((fx.n_states, fx.n_actions, fx.n_states));
        for (s, by_action) in fx.kernel.iter().enumerate() {
            for (a, row) in by_action.iter().enumerate() {
                for (s2, p) in row.iter().enumerate() {
                    if s >= fx.n_states || a >= fx.n_actions || s2 >= fx.n_states {
                        return Err(CoreError::Format("kernel too large".into()));
                    }
                    kernel[(s, a, s2)] = *p;
                }
            }
        }
        let mut reward = Array2::zeros((fx.n_states, fx.n_actions));
        for (s, row) in fx.reward.iter().enumerate() {
            for (a, r) in row.iter().enumerate() {
                reward[(s, a)] = *r;
            }
        }
        let mdp = RobustMdp {
            n_states: fx.n_states,
            n_actions: fx.n_actions,
            kernel,
            reward,
            gamma: fx.gamma,
            rho: Array1::from_vec(fx.rho),
        };
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn to_fixture_json(&self) -> String {
        let fx = MdpFixture {
            n_states: self.n_states,
            n_actions: self.n_actions,
            kernel: (0..self.n_states)
                .map(|s| {
                    (0..self.n_actions)
                        .map(|a| {
                            (0..self.n_states)
                                .map(|s2| self.kernel[(s, a, s2)])
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            reward: (0..self.n_states)
                .map(|s| (0..self.n_actions).map(|a| self.reward[(s, a)]).collect())
                .collect(),
            gamma: self.gamma,
            rho: self.rho.to_vec(),
        };
        serde_json::to_string_pretty(&fx).expect("serializable")
    }
}

/// Transition-kernel uncertainty around the nominal model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum UncertaintySet {
    /// `{(1 - delta) p + delta q : q any distribution}`; worst case mixes the
    /// nominal row with a point mass on the worst state.
    Contamination { delta: f64 },
    /// Span-regularized perturbation: subtracts `delta * span(V) / 2` from the
    /// nominal expectation.
    Ipm { delta: f64 },
}

impl UncertaintySet {
    pub fn delta(&self) -> f64 {
        match self {
            UncertaintySet::Contamination { delta } | UncertaintySet::Ipm { delta } => *delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UncertaintySet::Contamination { delta } => {
                if !(0.0..=1.0).contains(delta) {
                    return Err(CoreError::Argument(format!(
                        "contamination delta must be in [0, 1], got {delta}"
                    )));
                }
            }
            UncertaintySet::Ipm { delta } => {
                if *delta < 0.0 {
                    return Err(CoreError::Argument("ipm delta must be >= 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// Linear function approximation: value features per state and policy
/// features per state-action pair.
#[derive(Debug, Clone)]
pub struct LinearFeatures {
    /// n_states x d value features (rows are psi(s)).
    pub value_features: Array2<f64>,
    /// (n_states * n_actions) x d' policy features, row index `s * A + a`.
    pub policy_features: Array2<f64>,
}

impl LinearFeatures {
    /// One-hot features: exact representation for desk-scale fixtures.
    pub fn tabular(n_states: usize, n_actions: usize) -> Self {
        let value_features = Array2::eye(n_states);
        let policy_features = Array2::eye(n_states * n_actions);
        LinearFeatures {
            value_features,
            policy_features,
        }
    }

    pub fn value_dim(&self) -> usize {
        self.value_features.ncols()
    }

    pub fn policy_dim(&self) -> usize {
        self.policy_features.ncols()
    }

    pub fn policy_row(&self, s: usize, a: usize, n_actions: usize) -> ndarray::ArrayView1<'_, f64> {
        self.policy_features.row(s * n_actions + a)
    }
}
