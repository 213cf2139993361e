//! Online one-step DQN training.
//!
//! No replay buffer and no target network: each environment step runs a
//! forward pass, an epsilon-greedy action, a squared TD error on the taken
//! action only, one gradient step, and an STDP update of the LIF synapses
//! from that step's spike timings. Epsilon decays linearly over the total
//! step budget; the learning rate decays multiplicatively at phase
//! boundaries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::{epsilon_greedy, td_target, Environment};
use crate::error::{CoreError, Result};
use crate::net::{apply_stdp, backward, forward, HybridNetParams, Mode, Optimizer, OptimizerKind};
use crate::rng::{stream_rng, Stream};

/// Phased training schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSchedule {
    /// Step counts per phase, e.g. `[4000, 500, 500]`.
    pub phase_steps: Vec<usize>,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    /// Multiplicative decay applied at each phase boundary: `lr *= 1 - lr_decay`.
    pub lr_decay: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.phase_steps.is_empty() || self.phase_steps.iter().any(|s| *s == 0) {
            return Err(CoreError::Argument(
                "phase_steps must be nonempty and positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.epsilon_end)
            || !(0.0..=1.0).contains(&self.epsilon_start)
            || self.epsilon_end > self.epsilon_start
        {
            return Err(CoreError::Argument(format!(
                "need 0 <= epsilon_end <= epsilon_start <= 1, got ({}, {})",
                self.epsilon_start, self.epsilon_end
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(CoreError::Argument(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.learning_rate >= 0.0) || !(0.0..=1.0).contains(&self.lr_decay) {
            return Err(CoreError::Argument(
                "learning_rate must be >= 0 and lr_decay in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.phase_steps.iter().sum()
    }

    /// Linear decay from `epsilon_start` to `epsilon_end` over the budget.
    pub fn epsilon_at(&self, step: usize) -> f64 {
        let total = self.total_steps();
        if total <= 1 {
            return self.epsilon_end;
        }
        let frac = step as f64 / (total - 1) as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac.min(1.0)
    }

    pub fn phase_of(&self, step: usize) -> usize {
        let mut acc = 0;
        for (p, s) in self.phase_steps.iter().enumerate() {
            acc += s;
            if step < acc {
                return p;
            }
        }
        self.phase_steps.len() - 1
    }
}

/// One row of the training history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryRow {
    pub step: usize,
    pub phase: usize,
    pub epsilon: f64,
    pub action: usize,
    pub reward: f64,
    pub loss: f64,
}

/// Run the phased DQN loop; `net` is trained in place and the per-step
/// history returned. Deterministic given the schedule seed.
pub fn train_dqn(
    net: &mut HybridNetParams,
    env: &mut dyn Environment,
    schedule: &TrainSchedule,
) -> Result<Vec<HistoryRow>> {
    schedule.validate()?;
    if net.n_actions() != env.n_actions() {
        return Err(CoreError::Argument(format!(
            "network has {} actions but environment expects {}",
            net.n_actions(),
            env.n_actions()
        )));
    }

    let mut explore_rng = stream_rng(schedule.seed, Stream::Exploration);
    let mut shuffle_rng = stream_rng(schedule.seed, Stream::Shuffle);
    let mut optimizer = Optimizer::new(schedule.optimizer);
    let mut lr = schedule.learning_rate;
    let mut history = Vec::with_capacity(schedule.total_steps());

    let mut state = env.reset(shuffle_rng.gen())?;
    let mut phase = 0usize;

    for step in 0..schedule.total_steps() {
        let now_phase = schedule.phase_of(step);
        if now_phase != phase {
            phase = now_phase;
            lr *= 1.0 - schedule.lr_decay;
        }
        let epsilon = schedule.epsilon_at(step);

        let (q_values, trace) = forward(net, state.as_slice().expect("contiguous"), Mode::Train)?;
        let trace = trace.expect("train mode");
        let action = epsilon_greedy(&q_values, epsilon, &mut explore_rng)?;
        let outcome = env.step(action)?;

        let target = if outcome.done {
            td_target(outcome.reward, &q_values, schedule.gamma, true)
        } else {
            let next = outcome.next_state.as_ref().expect("not done");
            let (q_next, _) = forward(net, next.as_slice().expect("contiguous"), Mode::Eval)?;
            td_target(outcome.reward, &q_next, schedule.gamma, false)
        };

        let err = q_values[action] - target;
        let loss = err * err;
        if !loss.is_finite() {
            return Err(CoreError::Numeric(format!(
                "non-finite loss at step {step}"
            )));
        }

        let mut d_q = ndarray::Array1::zeros(net.n_actions());
        d_q[action] = 2.0 * err;
        let grads = backward(net, &trace, &d_q)?;
        optimizer.step(net, &grads, lr);
        apply_stdp(net, &trace);

        history.push(HistoryRow {
            step,
            phase,
            epsilon,
            action,
            reward: outcome.reward,
            loss,
        });

        state = if outcome.done {
            env.reset(shuffle_rng.gen())?
        } else {
            outcome.next_state.expect("not done")
        };
    }

    Ok(history)
}
