//! Diagnostic environments with known optimal values.

use ndarray::Array1;

use super::env::{Environment, StepOutcome};
use crate::error::{CoreError, Result};

/// Deterministic chain of `n` states with one-hot state vectors. Action 1
/// moves right, action 0 moves left (saturating at 0). Reaching the last
/// state pays 1 and ends the episode; every other transition pays 0.
///
/// Ground truth under discount `gamma` (terminal value 0):
/// `V*(s) = gamma^(n-2-s)` for `s < n-1`.
#[derive(Debug, Clone)]
pub struct ChainEnv {
    n_states: usize,
    state: usize,
    done: bool,
}

impl ChainEnv {
    pub fn new(n_states: usize) -> Result<Self> {
        if n_states < 2 {
            return Err(CoreError::Argument("chain needs at least 2 states".into()));
        }
        Ok(ChainEnv {
            n_states,
            state: 0,
            done: true,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    fn one_hot(&self, s: usize) -> Array1<f64> {
        let mut v = Array1::zeros(self.n_states);
        v[s] = 1.0;
        v
    }

    /// Exact `Q*` by value iteration, rows = non-terminal states, cols =
    /// actions (left, right).
    pub fn q_star(&self, gamma: f64, tol: f64) -> Vec<[f64; 2]> {
        let n = self.n_states;
        let terminal = n - 1;
        let mut v = vec![0.0; n];
        loop {
            let mut delta: f64 = 0.0;
            for s in 0..terminal {
                let left = s.saturating_sub(1);
                let q_left = gamma * v[left];
                let right = s + 1;
                let q_right = if right == terminal {
                    1.0
                } else {
                    gamma * v[right]
                };
                let new = q_left.max(q_right);
                delta = delta.max((new - v[s]).abs());
                v[s] = new;
            }
            if delta < tol {
                break;
            }
        }
        (0..terminal)
            .map(|s| {
                let left = s.saturating_sub(1);
                let right = s + 1;
                let q_left = gamma * v[left];
                let q_right = if right == terminal {
                    1.0
                } else {
                    gamma * v[right]
                };
                [q_left, q_right]
            })
            .collect()
    }
}

impl Environment for ChainEnv {
    fn n_actions(&self) -> usize {
        2
    }

    fn state_dim(&self) -> usize {
        self.n_states
    }

    fn reset(&mut self, _seed: u64) -> Result<Array1<f64>> {
        self.state = 0;
        self.done = false;
        Ok(self.one_hot(0))
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(CoreError::State("step after episode end".into()));
        }
        if action > 1 {
            return Err(CoreError::Argument(format!("chain has 2 actions, got {action}")));
        }
        let next = if action == 1 {
            self.state + 1
        } else {
            self.state.saturating_sub(1)
        };
        let terminal = self.n_states - 1;
        let reward = if next == terminal { 1.0 } else { 0.0 };
        self.state = next;
        if next == terminal {
            self.done = true;
            Ok(StepOutcome {
                reward,
                next_state: None,
                done: true,
            })
        } else {
            Ok(StepOutcome {
                reward,
                next_state: Some(self.one_hot(next)),
                done: false,
            })
        }
    }
}
