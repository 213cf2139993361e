//! Spike-timing-dependent plasticity.
//!
//! `dW = A+ exp(-dt/tau+)` for `dt > 0`, `-A- exp(dt/tau-)` for `dt < 0`,
//! and zero for coincident spikes, where `dt = t_post - t_pre`. Updated
//! weights clamp to `[w_min, w_max]`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StdpParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus_ms: f64,
    pub tau_minus_ms: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        StdpParams {
            a_plus: 0.01,
            a_minus: 0.012,
            tau_plus_ms: 20.0,
            tau_minus_ms: 20.0,
            w_min: -1.0,
            w_max: 1.0,
        }
    }
}

/// Weight change for a pre/post timing difference `dt_ms`.
pub fn stdp_delta(dt_ms: f64, p: &StdpParams) -> f64 {
    if dt_ms > 0.0 {
        p.a_plus * (-dt_ms / p.tau_plus_ms).exp()
    } else if dt_ms < 0.0 {
        -p.a_minus * (dt_ms / p.tau_minus_ms).exp()
    } else {
        0.0
    }
}

/// Apply the STDP rule to weight `w`, clamping to the configured bounds.
pub fn stdp_update(w: f64, dt_ms: f64, p: &StdpParams) -> f64 {
    (w + stdp_delta(dt_ms, p)).clamp(p.w_min, p.w_max)
}
