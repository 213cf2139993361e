//! Tabular robust Markov decision processes: worst-case Bellman backups,
//! robust value iteration, the robust linear TD critic, the robust Q natural
//! policy gradient actor, the outer alternating loop, and contraction
//! diagnostics.

mod bellman;
mod diagnostics;
mod mdp;
mod rltd;
mod rnac;
mod rqnpg;

pub use bellman::{
    empirical_worst_case, robust_bellman, robust_policy_evaluation, robust_value_iteration,
    worst_case_value,
};
pub use diagnostics::{contraction_check, mspbre, stationary_distribution, ContractionReport};
pub use mdp::{LinearFeatures, RobustMdp, UncertaintySet};
pub use rltd::{rltd, CriticState, StepSizeRule};
pub use rnac::{rnac, EtaSchedule, RnacConfig, RnacDiagnosticsRow};
pub use rqnpg::{
    log_linear_policy, robust_q_from_values, rqnpg, rqnpg_with_q, ActorState, RegressionMode,
};
