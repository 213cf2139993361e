//! EEG motor-imagery decoding pipeline.
//!
//! The crate is organized around five subsystems:
//!
//! - [`signal`] — recording data model, manifest/CSV ingestion, epoch
//!   extraction, zero-phase band-pass filtering, and a synthetic ground-truth
//!   generator used by every oracle test.
//! - [`features`] — median-Welch PSD, band power, statistical moments,
//!   one-vs-rest CSP spatial filtering, feature assembly, normalization, and a
//!   hinge-loss linear baseline.
//! - [`net`] — the hybrid network: tokenizing embed, transformer-style encoder
//!   blocks, an LSTM cell, a leaky integrate-and-fire layer with STDP, a
//!   Q-value head, and manual reverse-mode gradients with a finite-difference
//!   checker.
//! - [`rl`] — classification cast as an episodic RL task plus the online DQN
//!   training loop, reward structures, and the metric suite.
//! - [`robust`] — tabular robust MDPs: worst-case Bellman backups, robust
//!   value iteration, the RLTD critic, the RQNPG actor, the outer RNAC loop,
//!   and contraction diagnostics.

pub mod error;
pub mod features;
pub mod mat;
pub mod net;
pub mod rl;
pub mod rng;
pub mod robust;
pub mod signal;

pub use error::{CoreError, Result};
pub use features::{
    assemble_features, band_power, csp_fit_ovr, csp_transform, normalize_apply, normalize_fit,
    welch_psd, Averaging, BandPair, CspModel, FeatureMatrix, NormMethod, NormalizationParams,
    PsdEstimate, WelchConfig,
};
pub use net::{
    backward, forward, grad_check, ForwardTrace, HybridNetParams, LifParams, LifState,
    LstmParams, LstmState, Mode, NetConfig, NetGradients, StdpParams,
};
pub use rl::{
    epsilon_greedy, evaluate, reward_based_accuracy, td_target, train_dqn, ClassificationEnv,
    Environment, Metrics, RewardStructure, TrainSchedule,
};
pub use robust::{
    rltd, rnac, robust_bellman, robust_value_iteration, rqnpg, worst_case_value, LinearFeatures,
    RnacConfig, RobustMdp, UncertaintySet,
};
pub use signal::{
    bandpass_filter, epoch_trials, generate_synthetic, load_recording, write_recording,
    EegRecording, FrequencyBand, GroundTruth, SyntheticSpec, Trial,
};
