//! The hybrid network: tokenizing embed -> encoder blocks -> LSTM -> leaky
//! integrate-and-fire layer -> Q-value head.
//!
//! The forward pass runs one LSTM step per encoder token and one LIF step per
//! LSTM step (input current = `input_weights * h_t`); the Q head reads the
//! final-step membrane potentials. Training mode records a [`ForwardTrace`]
//! for reverse-mode differentiation and STDP timing. Backpropagation covers
//! the encoder, LSTM, and Q head exactly; the LIF membrane recursion is
//! differentiated through its linear dynamics with gradients blocked at reset
//! events, and the LIF input weights are updated only by STDP.

mod backward;
mod checkpoint;
mod encoder;
mod gradcheck;
mod lif;
mod lstm;
mod optim;
mod stdp;

pub use backward::backward;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use encoder::{
    attention, attention_with_weights, embed, encoder_forward, ffn, layer_norm, softmax_rows,
    EncoderLayerParams, EncoderParams, LN_EPS,
};
pub use gradcheck::{grad_check, GradCheckReport};
pub use lif::{lif_step, LifParams, LifState};
pub use lstm::{lstm_step, LstmParams, LstmState};
pub use optim::{AdamState, Optimizer, OptimizerKind};
pub use stdp::{stdp_delta, stdp_update, StdpParams};

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rng::{stream_rng, Stream};

/// Hyperparameters of the full stack.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub feature_dim: usize,
    pub tokens_per_trial: usize,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub lstm_hidden: usize,
    pub lif_neurons: usize,
    pub n_actions: usize,
    pub tau_ms: f64,
    pub r_m: f64,
    pub v_thresh: f64,
    pub v_reset: f64,
    pub dt_ms: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus_ms: f64,
    pub tau_minus_ms: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl NetConfig {
    /// Desk-scale defaults for `feature_dim` inputs and `n_actions` outputs.
    pub fn with_dims(feature_dim: usize, n_actions: usize) -> Self {
        NetConfig {
            feature_dim,
            tokens_per_trial: 8,
            d_model: 32,
            n_heads: 4,
            n_layers: 2,
            d_ff: 64,
            lstm_hidden: 32,
            lif_neurons: 32,
            n_actions,
            tau_ms: 20.0,
            r_m: 1.0,
            v_thresh: 1.0,
            v_reset: 0.0,
            dt_ms: 1.0,
            a_plus: 0.01,
            a_minus: 0.012,
            tau_plus_ms: 20.0,
            tau_minus_ms: 20.0,
            w_min: -1.0,
            w_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || self.d_model % self.n_heads != 0 {
            return Err(CoreError::Argument(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.tokens_per_trial == 0 || self.feature_dim % self.tokens_per_trial != 0 {
            return Err(CoreError::Argument(format!(
                "feature_dim {} must divide into tokens_per_trial {}",
                self.feature_dim, self.tokens_per_trial
            )));
        }
        if self.lstm_hidden == 0 || self.lif_neurons == 0 || self.n_actions == 0 {
            return Err(CoreError::Argument(
                "lstm_hidden, lif_neurons and n_actions must be positive".into(),
            ));
        }
        if !(self.tau_ms > 0.0 && self.dt_ms > 0.0) {
            return Err(CoreError::Argument("tau_ms and dt_ms must be positive".into()));
        }
        if !(self.v_reset < self.v_thresh) {
            return Err(CoreError::Argument("v_reset must lie below v_thresh".into()));
        }
        if !(self.w_min < self.w_max) {
            return Err(CoreError::Argument("w_min must lie below w_max".into()));
        }
        Ok(())
    }

    pub fn chunk_dim(&self) -> usize {
        self.feature_dim / self.tokens_per_trial
    }
}

/// Q-value head: a linear readout of the LIF membrane vector.
#[derive(Debug, Clone)]
pub struct QHead {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

/// All learnable parameters plus the fixed hyperparameters.
#[derive(Debug, Clone)]
pub struct HybridNetParams {
    pub config: NetConfig,
    pub encoder: EncoderParams,
    pub lstm: LstmParams,
    pub lif: LifParams,
    pub stdp: StdpParams,
    pub q_head: QHead,
}

/// Forward-pass mode: `Train` records the trace needed by [`backward`] and
/// the STDP timing bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything backward and STDP need from one training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub features: Vec<f64>,
    pub tokens: Array2<f64>,
    pub layers: Vec<encoder::LayerTrace>,
    pub encoded: Array2<f64>,
    pub lstm_steps: Vec<lstm::LstmStepTrace>,
    pub lstm_h: Vec<Array1<f64>>,
    pub lif_currents: Vec<Array1<f64>>,
    pub lif_spiked: Vec<Vec<bool>>,
    pub v_final: Array1<f64>,
    pub last_pre_spike_ms: Vec<Option<f64>>,
    pub last_post_spike_ms: Vec<Option<f64>>,
    pub q_values: Array1<f64>,
}

impl HybridNetParams {
    /// Seeded initialization: every weight matrix draws from
    /// `U(-sqrt(1/fan_in), sqrt(1/fan_in))`, biases start at zero, layer-norm
    /// gains at one. The draw order is fixed, so a given (config, seed) pair
    /// always produces the same parameters.
    pub fn init(config: &NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = stream_rng(seed, Stream::Init);
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| {
            let bound = (1.0 / fan_in as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
        };

        let chunk = config.chunk_dim();
        let d = config.d_model;
        let w_in = uniform(chunk, d, chunk);
        let pos = uniform(config.tokens_per_trial, d, d);
        let mut layers = Vec::with_capacity(config.n_layers);
        for _ in 0..config.n_layers {
            layers.push(EncoderLayerParams {
                wq: uniform(d, d, d),
                wk: uniform(d, d, d),
                wv: uniform(d, d, d),
                wo: uniform(d, d, d),
                ln1_gamma: Array1::ones(d),
                ln1_beta: Array1::zeros(d),
                w1: uniform(d, config.d_ff, d),
                b1: Array1::zeros(config.d_ff),
                w2: uniform(config.d_ff, d, config.d_ff),
                b2: Array1::zeros(d),
                ln2_gamma: Array1::ones(d),
                ln2_beta: Array1::zeros(d),
            });
        }
        let encoder = EncoderParams {
            d_model: d,
            n_heads: config.n_heads,
            d_ff: config.d_ff,
            tokens_per_trial: config.tokens_per_trial,
            max_seq: config.tokens_per_trial,
            w_in,
            b_in: Array1::zeros(d),
            pos,
            layers,
        };

        let h = config.lstm_hidden;
        let zdim = h + d;
        let lstm = LstmParams {
            w_f: uniform(h, zdim, zdim),
            w_i: uniform(h, zdim, zdim),
            w_c: uniform(h, zdim, zdim),
            w_o: uniform(h, zdim, zdim),
            b_f: Array1::zeros(h),
            b_i: Array1::zeros(h),
            b_c: Array1::zeros(h),
            b_o: Array1::zeros(h),
        };

        let lif = LifParams {
            tau_ms: config.tau_ms,
            r_m: config.r_m,
            v_thresh: config.v_thresh,
            v_reset: config.v_reset,
            dt_ms: config.dt_ms,
            input_weights: uniform(config.lif_neurons, h, h),
        };

        let stdp = StdpParams {
            a_plus: config.a_plus,
            a_minus: config.a_minus,
            tau_plus_ms: config.tau_plus_ms,
            tau_minus_ms: config.tau_minus_ms,
            w_min: config.w_min,
            w_max: config.w_max,
        };

        let q_head = QHead {
            w: uniform(config.n_actions, config.lif_neurons, config.lif_neurons),
            b: Array1::zeros(config.n_actions),
        };

        Ok(HybridNetParams {
            config: config.clone(),
            encoder,
            lstm,
            lif,
            stdp,
            q_head,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.q_head.w.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.config.feature_dim
    }
}

/// Run the stack on one feature vector. `Train` mode returns the trace.
pub fn forward(
    net: &HybridNetParams,
    features: &[f64],
    mode: Mode,
) -> Result<(Array1<f64>, Option<ForwardTrace>)> {
    if features.len() != net.config.feature_dim {
        return Err(CoreError::Argument(format!(
            "got {} features, network expects {}",
            features.len(),
            net.config.feature_dim
        )));
    }
    let tokens = embed(features, &net.encoder)?;
    let (encoded, layer_traces) = encoder::encoder_forward_traced(&tokens, &net.encoder)?;

    let hidden = net.lstm.hidden();
    let mut state = LstmState::zeros(hidden);
    let mut lstm_traces = Vec::with_capacity(encoded.nrows());
    let mut lstm_h = Vec::with_capacity(encoded.nrows());
    for row in encoded.rows() {
        let x = row.to_owned();
        let (next, tr) = lstm::lstm_step_traced(&net.lstm, &state, &x)?;
        lstm_traces.push(tr);
        lstm_h.push(next.h.clone());
        state = next;
    }

    net.lif.validate()?;
    if net.lif.input_weights.ncols() != hidden {
        return Err(CoreError::Argument(format!(
            "LIF expects {} inputs but LSTM hidden is {hidden}",
            net.lif.input_weights.ncols()
        )));
    }
    let mut lif_state = LifState::new(&net.lif);
    let mut currents = Vec::with_capacity(lstm_h.len());
    let mut spiked = Vec::with_capacity(lstm_h.len());
    for h in &lstm_h {
        // a positive hidden activation counts as a pre-synaptic spike at the
        // time of the step it drives
        let spike_time = lif_state.t_ms + net.lif.dt_ms;
        for (j, hv) in h.iter().enumerate() {
            if *hv > 0.0 {
                lif_state.last_pre_spike_ms[j] = Some(spike_time);
            }
        }
        let current = net.lif.input_weights.dot(h);
        let (next, fired) = lif_step(&net.lif, &lif_state, &current, net.lif.dt_ms)?;
        currents.push(current);
        spiked.push(fired);
        lif_state = next;
    }

    let v_final = lif_state.v.clone();
    let q_values = net.q_head.w.dot(&v_final) + &net.q_head.b;
    if q_values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Numeric("non-finite Q values".into()));
    }

    let trace = match mode {
        Mode::Eval => None,
        Mode::Train => Some(ForwardTrace {
            features: features.to_vec(),
            tokens,
            layers: layer_traces,
            encoded,
            lstm_steps: lstm_traces,
            lstm_h,
            lif_currents: currents,
            lif_spiked: spiked,
            v_final,
            last_pre_spike_ms: lif_state.last_pre_spike_ms.clone(),
            last_post_spike_ms: lif_state.last_post_spike_ms.clone(),
            q_values: q_values.clone(),
        }),
    };
    Ok((q_values, trace))
}

/// Gradients for the differentiable blocks. Shapes mirror the parameters;
/// the LIF input weights are absent on purpose (STDP owns them).
#[derive(Debug, Clone)]
pub struct NetGradients {
    pub encoder: EncoderParams,
    pub lstm: LstmParams,
    pub q_head: QHead,
}

impl NetGradients {
    pub fn zeros_like(net: &HybridNetParams) -> Self {
        let zero2 = |a: &Array2<f64>| Array2::zeros(a.raw_dim());
        let zero1 = |a: &Array1<f64>| Array1::zeros(a.raw_dim());
        let e = &net.encoder;
        NetGradients {
            encoder: EncoderParams {
                d_model: e.d_model,
                n_heads: e.n_heads,
                d_ff: e.d_ff,
                tokens_per_trial: e.tokens_per_trial,
                max_seq: e.max_seq,
                w_in: zero2(&e.w_in),
                b_in: zero1(&e.b_in),
                pos: zero2(&e.pos),
                layers: e
                    .layers
                    .iter()
                    .map(|l| EncoderLayerParams {
                        wq: zero2(&l.wq),
                        wk: zero2(&l.wk),
                        wv: zero2(&l.wv),
                        wo: zero2(&l.wo),
                        ln1_gamma: zero1(&l.ln1_gamma),
                        ln1_beta: zero1(&l.ln1_beta),
                        w1: zero2(&l.w1),
                        b1: zero1(&l.b1),
                        w2: zero2(&l.w2),
                        b2: zero1(&l.b2),
                        ln2_gamma: zero1(&l.ln2_gamma),
                        ln2_beta: zero1(&l.ln2_beta),
                    })
                    .collect(),
            },
            lstm: LstmParams {
                w_f: zero2(&net.lstm.w_f),
                w_i: zero2(&net.lstm.w_i),
                w_c: zero2(&net.lstm.w_c),
                w_o: zero2(&net.lstm.w_o),
                b_f: zero1(&net.lstm.b_f),
                b_i: zero1(&net.lstm.b_i),
                b_c: zero1(&net.lstm.b_c),
                b_o: zero1(&net.lstm.b_o),
            },
            q_head: QHead {
                w: zero2(&net.q_head.w),
                b: zero1(&net.q_head.b),
            },
        }
    }

    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        blocks_of(&self.encoder, &self.lstm, &self.q_head)
    }

    pub fn blocks_mut(&mut self) -> Vec<(String, &mut [f64])> {
        blocks_of_mut(&mut self.encoder, &mut self.lstm, &mut self.q_head)
    }

    /// Largest absolute gradient entry, used for loss sanity checks.
    pub fn max_abs(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|(_, s)| s.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

impl HybridNetParams {
    /// Differentiable parameter blocks in canonical order.
    pub fn grad_blocks_mut(&mut self) -> Vec<(String, &mut [f64])> {
        blocks_of_mut(&mut self.encoder, &mut self.lstm, &mut self.q_head)
    }

    /// Every learnable block (includes the STDP-owned LIF input weights).
    pub fn all_blocks(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out: Vec<(String, Vec<usize>, Vec<f64>)> = blocks_of(
            &self.encoder,
            &self.lstm,
            &self.q_head,
        )
        .into_iter()
        .map(|(name, s)| (name, vec![s.len()], s.to_vec()))
        .collect();
        // record true 2-D shapes for the matrices
        let mut shaped: Vec<(String, Vec<usize>, Vec<f64>)> = Vec::with_capacity(out.len() + 1);
        for (name, _, data) in out.drain(..) {
            let shape = self.block_shape(&name);
            shaped.push((name, shape, data));
        }
        shaped.push((
            "lif.input_weights".to_string(),
            vec![
                self.lif.input_weights.nrows(),
                self.lif.input_weights.ncols(),
            ],
            self.lif.input_weights.iter().copied().collect(),
        ));
        shaped
    }

    /// Overwrite one block from row-major data (used by checkpoint loading).
    pub fn set_block(&mut self, name: &str, data: &[f64]) -> Result<()> {
        if name == "lif.input_weights" {
            let slice = self
                .lif
                .input_weights
                .as_slice_mut()
                .expect("standard layout");
            if slice.len() != data.len() {
                return Err(CoreError::Format(format!(
                    "block {name}: {} values, expected {}",
                    data.len(),
                    slice.len()
                )));
            }
            slice.copy_from_slice(data);
            return Ok(());
        }
        for (bname, slice) in self.grad_blocks_mut() {
            if bname == name {
                if slice.len() != data.len() {
                    return Err(CoreError::Format(format!(
                        "block {name}: {} values, expected {}",
                        data.len(),
                        slice.len()
                    )));
                }
                slice.copy_from_slice(data);
                return Ok(());
            }
        }
        Err(CoreError::Format(format!("unknown parameter block {name}")))
    }

    fn block_shape(&self, name: &str) -> Vec<usize> {
        let dims2 = |a: &Array2<f64>| vec![a.nrows(), a.ncols()];
        let dims1 = |a: &Array1<f64>| vec![a.len()];
        match name {
            "encoder.w_in" => dims2(&self.encoder.w_in),
            "encoder.b_in" => dims1(&self.encoder.b_in),
            "encoder.pos" => dims2(&self.encoder.pos),
            "q_head.w" => dims2(&self.q_head.w),
            "q_head.b" => dims1(&self.q_head.b),
            "lstm.w_f" => dims2(&self.lstm.w_f),
            "lstm.w_i" => dims2(&self.lstm.w_i),
            "lstm.w_c" => dims2(&self.lstm.w_c),
            "lstm.w_o" => dims2(&self.lstm.w_o),
            "lstm.b_f" => dims1(&self.lstm.b_f),
            "lstm.b_i" => dims1(&self.lstm.b_i),
            "lstm.b_c" => dims1(&self.lstm.b_c),
            "lstm.b_o" => dims1(&self.lstm.b_o),
            other => {
                // encoder.layer{l}.{field}
                for (l, layer) in self.encoder.layers.iter().enumerate() {
                    let p = format!("encoder.layer{l}.");
                    if let Some(field) = other.strip_prefix(&p) {
                        return match field {
                            "wq" => dims2(&layer.wq),
                            "wk" => dims2(&layer.wk),
                            "wv" => dims2(&layer.wv),
                            "wo" => dims2(&layer.wo),
                            "ln1_gamma" => dims1(&layer.ln1_gamma),
                            "ln1_beta" => dims1(&layer.ln1_beta),
                            "w1" => dims2(&layer.w1),
                            "b1" => dims1(&layer.b1),
                            "w2" => dims2(&layer.w2),
                            "b2" => dims1(&layer.b2),
                            "ln2_gamma" => dims1(&layer.ln2_gamma),
                            "ln2_beta" => dims1(&layer.ln2_beta),
                            _ => vec![],
                        };
                    }
                }
                vec![]
            }
        }
    }
}

fn blocks_of<'a>(
    encoder: &'a EncoderParams,
    lstm: &'a LstmParams,
    q_head: &'a QHead,
) -> Vec<(String, &'a [f64])> {
    let s2 = |a: &'a Array2<f64>| a.as_slice().expect("standard layout");
    let s1 = |a: &'a Array1<f64>| a.as_slice().expect("standard layout");
    let mut out: Vec<(String, &[f64])> = vec![
        ("encoder.w_in".into(), s2(&encoder.w_in)),
        ("encoder.b_in".into(), s1(&encoder.b_in)),
        ("encoder.pos".into(), s2(&encoder.pos)),
    ];
    for (l, layer) in encoder.layers.iter().enumerate() {
        out.push((format!("encoder.layer{l}.wq"), s2(&layer.wq)));
        out.push((format!("encoder.layer{l}.wk"), s2(&layer.wk)));
        out.push((format!("encoder.layer{l}.wv"), s2(&layer.wv)));
        out.push((format!("encoder.layer{l}.wo"), s2(&layer.wo)));
        out.push((format!("encoder.layer{l}.ln1_gamma"), s1(&layer.ln1_gamma)));
        out.push((format!("encoder.layer{l}.ln1_beta"), s1(&layer.ln1_beta)));
        out.push((format!("encoder.layer{l}.w1"), s2(&layer.w1)));
        out.push((format!("encoder.layer{l}.b1"), s1(&layer.b1)));
        out.push((format!("encoder.layer{l}.w2"), s2(&layer.w2)));
        out.push((format!("encoder.layer{l}.b2"), s1(&layer.b2)));
        out.push((format!("encoder.layer{l}.ln2_gamma"), s1(&layer.ln2_gamma)));
        out.push((format!("encoder.layer{l}.ln2_beta"), s1(&layer.ln2_beta)));
    }
    out.push(("lstm.w_f".into(), s2(&lstm.w_f)));
    out.push(("lstm.w_i".into(), s2(&lstm.w_i)));
    out.push(("lstm.w_c".into(), s2(&lstm.w_c)));
    out.push(("lstm.w_o".into(), s2(&lstm.w_o)));
    out.push(("lstm.b_f".into(), s1(&lstm.b_f)));
    out.push(("lstm.b_i".into(), s1(&lstm.b_i)));
    out.push(("lstm.b_c".into(), s1(&lstm.b_c)));
    out.push(("lstm.b_o".into(), s1(&lstm.b_o)));
    out.push(("q_head.w".into(), s2(&q_head.w)));
    out.push(("q_head.b".into(), s1(&q_head.b)));
    out
}

fn blocks_of_mut<'a>(
    encoder: &'a mut EncoderParams,
    lstm: &'a mut LstmParams,
    q_head: &'a mut QHead,
) -> Vec<(String, &'a mut [f64])> {
    let mut out: Vec<(String, &mut [f64])> = Vec::new();
    out.push((
        "encoder.w_in".into(),
        encoder.w_in.as_slice_mut().expect("standard layout"),
    ));
    out.push((
        "encoder.b_in".into(),
        encoder.b_in.as_slice_mut().expect("standard layout"),
    ));
    out.push((
        "encoder.pos".into(),
        encoder.pos.as_slice_mut().expect("standard layout"),
    ));
    for (l, layer) in encoder.layers.iter_mut().enumerate() {
        let fields: [(&str, &mut [f64]); 12] = [
            ("wq", layer.wq.as_slice_mut().expect("layout")),
            ("wk", layer.wk.as_slice_mut().expect("layout")),
            ("wv", layer.wv.as_slice_mut().expect("layout")),
            ("wo", layer.wo.as_slice_mut().expect("layout")),
            ("ln1_gamma", layer.ln1_gamma.as_slice_mut().expect("layout")),
            ("ln1_beta", layer.ln1_beta.as_slice_mut().expect("layout")),
            ("w1", layer.w1.as_slice_mut().expect("layout")),
            ("b1", layer.b1.as_slice_mut().expect("layout")),
            ("w2", layer.w2.as_slice_mut().expect("layout")),
            ("b2", layer.b2.as_slice_mut().expect("layout")),
            ("ln2_gamma", layer.ln2_gamma.as_slice_mut().expect("layout")),
            ("ln2_beta", layer.ln2_beta.as_slice_mut().expect("layout")),
        ];
        for (name, slice) in fields {
            out.push((format!("encoder.layer{l}.{name}"), slice));
        }
    }
    out.push((
        "lstm.w_f".into(),
        lstm.w_f.as_slice_mut().expect("layout"),
    ));
    out.push((
        "lstm.w_i".into(),
        lstm.w_i.as_slice_mut().expect("layout"),
    ));
    out.push((
        "lstm.w_c".into(),
        lstm.w_c.as_slice_mut().expect("layout"),
    ));
    out.push((
        "lstm.w_o".into(),
        lstm.w_o.as_slice_mut().expect("layout"),
    ));
    out.push(("lstm.b_f".into(), lstm.b_f.as_slice_mut().expect("layout")));
    out.push(("lstm.b_i".into(), lstm.b_i.as_slice_mut().expect("layout")));
    out.push(("lstm.b_c".into(), lstm.b_c.as_slice_mut().expect("layout")));
    out.push(("lstm.b_o".into(), lstm.b_o.as_slice_mut().expect("layout")));
    out.push(("q_head.w".into(), q_head.w.as_slice_mut().expect("layout")));
    out.push(("q_head.b".into(), q_head.b.as_slice_mut().expect("layout")));
    out
}

/// Apply STDP to the LIF input weights using the spike timings recorded in
/// `trace`. Synapses without both a pre and a post spike are untouched.
pub fn apply_stdp(net: &mut HybridNetParams, trace: &ForwardTrace) {
    for (i, post) in trace.last_post_spike_ms.iter().enumerate() {
        let Some(t_post) = post else { continue };
        for (j, pre) in trace.last_pre_spike_ms.iter().enumerate() {
            let Some(t_pre) = pre else { continue };
            let dt = t_post - t_pre;
            let w = net.lif.input_weights[(i, j)];
            net.lif.input_weights[(i, j)] = stdp_update(w, dt, &net.stdp);
        }
    }
}
