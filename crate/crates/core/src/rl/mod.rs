//! Classification as an episodic reinforcement-learning task, plus the online
//! DQN training loop and the evaluation metric suite.

mod env;
pub mod fixtures;
mod metrics;
mod train;

pub use env::{epsilon_greedy, td_target, ClassificationEnv, Environment, RewardStructure, StepOutcome};
pub use metrics::{
    confusion_counts, evaluate, evaluate_predictions, reward_based_accuracy,
    reward_based_accuracy_from_fraction, stratified_folds, Metrics,
};
pub use train::{train_dqn, HistoryRow, TrainSchedule};

use rand::seq::SliceRandom;

use crate::rng::{stream_rng, Stream};

/// Seeded stratified split: per class, `train_frac` of the trials go to the
/// training set (rounded, but always leaving at least one trial per side when
/// the class has two or more). Returns (train indices, test indices), both in
/// ascending order.
pub fn stratified_split(labels: &[usize], train_frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = stream_rng(seed, Stream::Split);
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..n_classes {
        let mut idxs: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        idxs.shuffle(&mut rng);
        let mut k = (idxs.len() as f64 * train_frac).round() as usize;
        if idxs.len() >= 2 {
            k = k.clamp(1, idxs.len() - 1);
        } else {
            k = idxs.len().min(k.max(1));
        }
        train.extend_from_slice(&idxs[..k.min(idxs.len())]);
        test.extend_from_slice(&idxs[k.min(idxs.len())..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
