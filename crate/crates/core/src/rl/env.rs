//! Episodic environment contract and the classification environment.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rng::{stream_rng, Stream};

/// Payoffs for correct and incorrect predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardStructure {
    pub r_correct: f64,
    pub r_incorrect: f64,
}

impl RewardStructure {
    pub fn new(r_correct: f64, r_incorrect: f64) -> Result<Self> {
        if !(r_correct > r_incorrect) {
            return Err(CoreError::Argument(format!(
                "reward structure needs r_correct > r_incorrect, got ({r_correct}, {r_incorrect})"
            )));
        }
        Ok(RewardStructure {
            r_correct,
            r_incorrect,
        })
    }

    /// The five benchmark payoff pairs.
    pub fn benchmark_set() -> Vec<RewardStructure> {
        [
            (1.0, -1.0),
            (2.0, -2.0),
            (3.0, -1.0),
            (0.25, -2.5),
            (1.0, 0.0),
        ]
        .into_iter()
        .map(|(c, i)| RewardStructure {
            r_correct: c,
            r_incorrect: i,
        })
        .collect()
    }

    pub fn label(&self) -> String {
        format!("{} to {}", self.r_correct, self.r_incorrect)
    }
}

/// Result of one environment step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub reward: f64,
    pub next_state: Option<Array1<f64>>,
    pub done: bool,
}

/// Episodic environment: `reset` begins an episode and returns the first
/// state vector; `step` consumes an action.
pub trait Environment {
    fn n_actions(&self) -> usize;
    fn state_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Array1<f64>>;
    fn step(&mut self, action: usize) -> Result<StepOutcome>;
}

/// Maps dataset trials to states and class predictions to actions. One
/// episode visits `episode_len` trials in a seeded shuffled order; the reward
/// is `r_correct` when the action matches the trial label.
#[derive(Debug, Clone)]
pub struct ClassificationEnv {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    reward: RewardStructure,
    episode_len: usize,
    order: Vec<usize>,
    cursor: usize,
    started: bool,
}

impl ClassificationEnv {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
        reward: RewardStructure,
        episode_len: Option<usize>,
    ) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(CoreError::Argument("empty dataset".into()));
        }
        if features.nrows() != labels.len() {
            return Err(CoreError::Argument(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if labels.iter().any(|l| *l >= n_classes) {
            return Err(CoreError::Argument("label out of class range".into()));
        }
        let episode_len = episode_len.unwrap_or(features.nrows());
        if episode_len == 0 || episode_len > features.nrows() {
            return Err(CoreError::Argument(format!(
                "episode_len {episode_len} invalid for {} trials",
                features.nrows()
            )));
        }
        let order = (0..features.nrows()).collect();
        Ok(ClassificationEnv {
            features,
            labels,
            n_classes,
            reward,
            episode_len,
            order,
            cursor: 0,
            started: false,
        })
    }

    pub fn n_trials(&self) -> usize {
        self.features.nrows()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn visit_order(&self) -> &[usize] {
        &self.order
    }

    fn state_at(&self, pos: usize) -> Array1<f64> {
        self.features.row(self.order[pos]).to_owned()
    }

    /// Label of the trial the cursor points at.
    pub fn current_label(&self) -> usize {
        self.labels[self.order[self.cursor]]
    }
}

impl Environment for ClassificationEnv {
    fn n_actions(&self) -> usize {
        self.n_classes
    }

    fn state_dim(&self) -> usize {
        self.features.ncols()
    }

    fn reset(&mut self, seed: u64) -> Result<Array1<f64>> {
        let mut rng = stream_rng(seed, Stream::Shuffle);
        self.order.shuffle(&mut rng);
        self.cursor = 0;
        self.started = true;
        Ok(self.state_at(0))
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if !self.started {
            return Err(CoreError::State("step before reset".into()));
        }
        if self.cursor >= self.episode_len {
            return Err(CoreError::State("step after episode end".into()));
        }
        if action >= self.n_classes {
            return Err(CoreError::Argument(format!(
                "action {action} out of range for {} classes",
                self.n_classes
            )));
        }
        let reward = if action == self.current_label() {
            self.reward.r_correct
        } else {
            self.reward.r_incorrect
        };
        self.cursor += 1;
        let done = self.cursor >= self.episode_len;
        let next_state = if done {
            None
        } else {
            Some(self.state_at(self.cursor))
        };
        Ok(StepOutcome {
            reward,
            next_state,
            done,
        })
    }
}

/// Epsilon-greedy action selection; ties in the greedy branch break to the
/// lowest index.
pub fn epsilon_greedy(q_values: &Array1<f64>, epsilon: f64, rng: &mut ChaCha12Rng) -> Result<usize> {
    if q_values.is_empty() {
        return Err(CoreError::Argument("empty Q vector".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(CoreError::Argument(format!(
            "epsilon must be in [0, 1], got {epsilon}"
        )));
    }
    if epsilon > 0.0 && rng.gen_range(0.0..1.0) < epsilon {
        return Ok(rng.gen_range(0..q_values.len()));
    }
    Ok(argmax(q_values))
}

/// Lowest-index argmax.
pub fn argmax(q: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

/// One-step TD target: `reward + gamma * max(q_next)`, or just `reward` on a
/// terminal transition.
pub fn td_target(reward: f64, q_next: &Array1<f64>, gamma: f64, done: bool) -> f64 {
    if done {
        reward
    } else {
        let max_next = q_next.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        reward + gamma * max_next
    }
}
