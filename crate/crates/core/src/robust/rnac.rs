//! Outer robust natural actor-critic loop: alternating RLTD critic fits and
//! RQNPG actor updates, with per-iteration diagnostics against the exact
//! robust evaluation oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bellman::robust_policy_evaluation;
use super::diagnostics::{contraction_check, mspbre};
use super::mdp::{LinearFeatures, RobustMdp, UncertaintySet};
use super::rltd::{rltd, StepSizeRule};
use super::rqnpg::{rqnpg, ActorState, RegressionMode};
use crate::error::{CoreError, Result};
use crate::rng::{stream_rng, Stream};

/// Actor step-size schedule.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EtaSchedule {
    /// `eta_t = eta0 * growth^t`, capped.
    Geometric { eta0: f64, growth: f64, cap: f64 },
    Constant { eta: f64 },
}

impl Default for EtaSchedule {
    fn default() -> Self {
        EtaSchedule::Geometric {
            eta0: 0.1,
            growth: 1.5,
            cap: 10.0,
        }
    }
}

impl EtaSchedule {
    pub fn eta_at(&self, t: usize) -> f64 {
        match self {
            EtaSchedule::Geometric { eta0, growth, cap } => {
                (eta0 * growth.powi(t as i32)).min(*cap)
            }
            EtaSchedule::Constant { eta } => *eta,
        }
    }
}

/// Outer-loop configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RnacConfig {
    /// Outer iterations T.
    pub t_outer: usize,
    /// Critic chain length K per iteration.
    pub k_critic: usize,
    /// Actor occupancy samples N per iteration.
    pub n_actor: usize,
    pub eta: EtaSchedule,
    pub critic_rule: StepSizeRule,
    pub regression: RegressionMode,
    /// Probes per contraction estimate in the diagnostics.
    pub diag_probes: usize,
}

impl Default for RnacConfig {
    fn default() -> Self {
        RnacConfig {
            t_outer: 30,
            k_critic: 20_000,
            n_actor: 2_000,
            eta: EtaSchedule::default(),
            critic_rule: StepSizeRule::default(),
            regression: RegressionMode::default(),
            diag_probes: 50,
        }
    }
}

impl RnacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_critic == 0 || self.n_actor == 0 {
            return Err(CoreError::Argument(
                "k_critic and n_actor must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RnacDiagnosticsRow {
    pub t: usize,
    /// Robust value of the current policy at the start distribution, from the
    /// exact evaluation oracle.
    pub robust_value: f64,
    pub mspbre: f64,
    pub contraction_estimate: f64,
}

/// Run T alternating critic/actor updates; returns the final actor and the
/// per-iteration diagnostics (including the entry for the final policy).
pub fn rnac(
    mdp: &RobustMdp,
    set: &UncertaintySet,
    features: &LinearFeatures,
    cfg: &RnacConfig,
    seed: u64,
) -> Result<(ActorState, Vec<RnacDiagnosticsRow>)> {
    mdp.validate()?;
    set.validate()?;
    cfg.validate()?;

    let mut seed_rng = stream_rng(seed, Stream::Actor);
    let mut actor = ActorState::uniform(features.policy_dim());
    let mut diagnostics = Vec::with_capacity(cfg.t_outer + 1);

    for t in 0..=cfg.t_outer {
        let pi = actor.policy(features, mdp.n_states, mdp.n_actions);
        let critic_seed: u64 = seed_rng.gen();
        let actor_seed: u64 = seed_rng.gen();

        let critic = rltd(&pi, mdp, set, features, cfg.k_critic, cfg.critic_rule, critic_seed)?;

        let v_exact = robust_policy_evaluation(mdp, set, &pi, 1e-9)?;
        let robust_value = mdp.rho.dot(&v_exact);
        let err = mspbre(&critic.w, &pi, mdp, set, features)?;
        let contraction = contraction_check(mdp, set, features, &pi, cfg.diag_probes, critic_seed)?;
        diagnostics.push(RnacDiagnosticsRow {
            t,
            robust_value,
            mspbre: err,
            contraction_estimate: contraction.factor,
        });

        if t == cfg.t_outer {
            break;
        }
        actor = rqnpg(
            &actor,
            &critic,
            mdp,
            set,
            features,
            cfg.n_actor,
            cfg.eta.eta_at(t),
            cfg.regression,
            actor_seed,
        )?;
    }

    Ok((actor, diagnostics))
}
