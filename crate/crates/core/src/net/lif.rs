//! Leaky integrate-and-fire layer.
//!
//! Explicit Euler integration of `tau dV/dt = -V + R I(t)`. A neuron whose
//! potential reaches `v_thresh` after the update emits a spike and resets to
//! `v_reset`. Spike times are kept on the state for STDP.

use ndarray::{Array1, Array2};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct LifParams {
    pub tau_ms: f64,
    pub r_m: f64,
    pub v_thresh: f64,
    pub v_reset: f64,
    pub dt_ms: f64,
    /// Synaptic weights mapping the input vector to per-neuron current.
    pub input_weights: Array2<f64>,
}

impl LifParams {
    pub fn n_neurons(&self) -> usize {
        self.input_weights.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_ms > 0.0) {
            return Err(CoreError::Argument("tau_ms must be positive".into()));
        }
        if !(self.dt_ms > 0.0) {
            return Err(CoreError::Argument("dt_ms must be positive".into()));
        }
        if !(self.v_reset < self.v_thresh) {
            return Err(CoreError::Argument(
                "v_reset must lie below v_thresh".into(),
            ));
        }
        Ok(())
    }
}

/// Membrane potentials plus bookkeeping for STDP: the clock and the most
/// recent pre/post spike time per synapse end.
#[derive(Debug, Clone)]
pub struct LifState {
    pub v: Array1<f64>,
    pub t_ms: f64,
    pub last_pre_spike_ms: Vec<Option<f64>>,
    pub last_post_spike_ms: Vec<Option<f64>>,
}

impl LifState {
    pub fn new(p: &LifParams) -> Self {
        LifState {
            v: Array1::from_elem(p.n_neurons(), p.v_reset),
            t_ms: 0.0,
            last_pre_spike_ms: vec![None; p.input_weights.ncols()],
            last_post_spike_ms: vec![None; p.n_neurons()],
        }
    }
}

/// Advance the membrane by one Euler step of size `dt_ms`; returns the new
/// state and the spike flags.
pub fn lif_step(
    p: &LifParams,
    s: &LifState,
    input_current: &Array1<f64>,
    dt_ms: f64,
) -> Result<(LifState, Vec<bool>)> {
    if !(dt_ms > 0.0) {
        return Err(CoreError::Argument("dt_ms must be positive".into()));
    }
    if input_current.len() != p.n_neurons() {
        return Err(CoreError::Argument(format!(
            "current has {} entries for {} neurons",
            input_current.len(),
            p.n_neurons()
        )));
    }
    let mut next = s.clone();
    next.t_ms += dt_ms;
    let alpha = dt_ms / p.tau_ms;
    let mut spikes = vec![false; p.n_neurons()];
    for (n, v) in next.v.iter_mut().enumerate() {
        *v += alpha * (-*v + p.r_m * input_current[n]);
        if *v >= p.v_thresh {
            spikes[n] = true;
            *v = p.v_reset;
            next.last_post_spike_ms[n] = Some(next.t_ms);
        }
    }
    Ok((next, spikes))
}
