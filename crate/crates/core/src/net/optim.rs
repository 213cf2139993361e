//! Gradient application: plain SGD and an adaptive-moment option.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HybridNetParams, NetGradients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// First/second moment accumulators per block, keyed by block name.
#[derive(Debug, Clone, Default)]
pub struct AdamState {
    pub step: usize,
    m: BTreeMap<String, Vec<f64>>,
    v: BTreeMap<String, Vec<f64>>,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Optimizer with owned state.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd,
    Adam(AdamState),
}

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam(AdamState::default()),
        }
    }

    /// Apply `grads` to the differentiable blocks of `net` at rate `lr`.
    pub fn step(&mut self, net: &mut HybridNetParams, grads: &NetGradients, lr: f64) {
        match self {
            Optimizer::Sgd => {
                let g = grads.blocks();
                for (i, (_, params)) in net.grad_blocks_mut().into_iter().enumerate() {
                    for (p, gv) in params.iter_mut().zip(g[i].1.iter()) {
                        *p -= lr * gv;
                    }
                }
            }
            Optimizer::Adam(state) => {
                state.step += 1;
                let t = state.step as f64;
                let bc1 = 1.0 - BETA1.powf(t);
                let bc2 = 1.0 - BETA2.powf(t);
                let g = grads.blocks();
                for (i, (name, params)) in net.grad_blocks_mut().into_iter().enumerate() {
                    let gv = g[i].1;
                    let m = state
                        .m
                        .entry(name.clone())
                        .or_insert_with(|| vec![0.0; gv.len()]);
                    let v = state
                        .v
                        .entry(name)
                        .or_insert_with(|| vec![0.0; gv.len()]);
                    for j in 0..gv.len() {
                        m[j] = BETA1 * m[j] + (1.0 - BETA1) * gv[j];
                        v[j] = BETA2 * v[j] + (1.0 - BETA2) * gv[j] * gv[j];
                        let mhat = m[j] / bc1;
                        let vhat = v[j] / bc2;
                        params[j] -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}
