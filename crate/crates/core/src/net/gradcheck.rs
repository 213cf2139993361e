//! Central-finite-difference gradient checking.

use ndarray::Array1;
use rand::Rng;

use super::{backward, forward, HybridNetParams, Mode};
use crate::error::Result;
use crate::rng::{stream_rng, Stream};

const FD_STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;

/// Per-block worst relative error between analytic and numeric gradients.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub per_block: Vec<(String, f64)>,
    pub worst_block: String,
    pub max_rel_err: f64,
    pub pass: bool,
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Check [`backward`] against central differences of the scalar probe loss
/// `sum(c_a * q_a)` with a seeded random `c`. Fails when any differentiable
/// block exceeds `1e-4` relative error.
pub fn grad_check(net: &HybridNetParams, features: &[f64], seed: u64) -> Result<GradCheckReport> {
    grad_check_inner(net, features, seed, None)
}

pub(crate) fn grad_check_inner(
    net: &HybridNetParams,
    features: &[f64],
    seed: u64,
    corrupt_block: Option<&str>,
) -> Result<GradCheckReport> {
    let mut rng = stream_rng(seed, Stream::Probe);
    let probe = Array1::from_shape_fn(net.n_actions(), |_| rng.gen_range(-1.0..1.0));

    let (_, trace) = forward(net, features, Mode::Train)?;
    let mut grads = backward(net, &trace.expect("train mode"), &probe)?;
    if let Some(name) = corrupt_block {
        for (bname, slice) in grads.blocks_mut() {
            if bname == name && !slice.is_empty() {
                slice[0] += 1.0;
            }
        }
    }

    let loss = |net: &HybridNetParams| -> Result<f64> {
        let (q, _) = forward(net, features, Mode::Eval)?;
        Ok(q.dot(&probe))
    };

    let mut work = net.clone();
    let mut per_block = Vec::new();
    let analytic = grads.blocks();
    let names: Vec<String> = analytic.iter().map(|(n, _)| n.clone()).collect();
    for (bi, name) in names.iter().enumerate() {
        let n_elems = analytic[bi].1.len();
        let mut worst = 0.0f64;
        for e in 0..n_elems {
            let orig = {
                let blocks = work.grad_blocks_mut();
                blocks[bi].1[e]
            };
            {
                let mut blocks = work.grad_blocks_mut();
                blocks[bi].1[e] = orig + FD_STEP;
            }
            let up = loss(&work)?;
            {
                let mut blocks = work.grad_blocks_mut();
                blocks[bi].1[e] = orig - FD_STEP;
            }
            let down = loss(&work)?;
            {
                let mut blocks = work.grad_blocks_mut();
                blocks[bi].1[e] = orig;
            }
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(analytic[bi].1[e], numeric));
        }
        per_block.push((name.clone(), worst));
    }

    let (worst_block, max_rel_err) = per_block
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(n, v)| (n.clone(), *v))
        .unwrap_or_else(|| ("<none>".into(), 0.0));

    Ok(GradCheckReport {
        per_block,
        worst_block,
        max_rel_err,
        pass: max_rel_err <= TOLERANCE,
    })
}
