//! Reverse-mode gradients for the hybrid network.
//!
//! The chain runs q_head -> LIF membrane recursion -> LSTM (through time) ->
//! encoder layers -> embed. The LIF step `V' = (1 - dt/tau) V + (dt/tau) R I`
//! is linear, so its gradient is exact; at steps where a neuron fired, the
//! reset replaces the potential with a constant and the gradient through that
//! neuron's chain is blocked, which is the derivative of the piecewise
//! forward almost everywhere. LIF input weights receive no gradient (STDP
//! owns them).

use ndarray::{Array1, Array2};

use super::encoder::{EncoderLayerParams, LayerTrace, LnTrace};
use super::lstm::LstmParams;
use super::{ForwardTrace, HybridNetParams, NetGradients};
use crate::error::{CoreError, Result};

/// Gradients of the encoder, LSTM, and Q head for an upstream gradient
/// `d_q` on the Q values.
pub fn backward(
    net: &HybridNetParams,
    trace: &ForwardTrace,
    d_q: &Array1<f64>,
) -> Result<NetGradients> {
    if d_q.len() != net.n_actions() {
        return Err(CoreError::Argument(format!(
            "upstream gradient has {} entries for {} actions",
            d_q.len(),
            net.n_actions()
        )));
    }
    let mut g = NetGradients::zeros_like(net);

    // q head: q = W v + b
    for a in 0..net.n_actions() {
        for (n, v) in trace.v_final.iter().enumerate() {
            g.q_head.w[(a, n)] += d_q[a] * v;
        }
        g.q_head.b[a] += d_q[a];
    }
    let mut d_v = net.q_head.w.t().dot(d_q);

    // LIF backward through time
    let seq = trace.lif_currents.len();
    let hidden = net.lstm.hidden();
    let neurons = net.lif.n_neurons();
    let decay = 1.0 - net.lif.dt_ms / net.lif.tau_ms;
    let drive = net.lif.dt_ms / net.lif.tau_ms * net.lif.r_m;
    let mut d_h_ext: Vec<Array1<f64>> = vec![Array1::zeros(hidden); seq];
    for t in (0..seq).rev() {
        let mut d_i = Array1::zeros(neurons);
        let mut d_v_prev = Array1::zeros(neurons);
        for n in 0..neurons {
            if !trace.lif_spiked[t][n] {
                d_i[n] = drive * d_v[n];
                d_v_prev[n] = decay * d_v[n];
            }
        }
        d_h_ext[t] = net.lif.input_weights.t().dot(&d_i);
        d_v = d_v_prev;
    }

    // LSTM backward through time
    let mut d_h_rec = Array1::zeros(hidden);
    let mut d_c_rec = Array1::zeros(hidden);
    let d_model = net.encoder.d_model;
    let mut d_encoded = Array2::zeros((seq, d_model));
    for t in (0..seq).rev() {
        let tr = &trace.lstm_steps[t];
        let d_h = &d_h_ext[t] + &d_h_rec;

        let d_o = &d_h * &tr.tanh_c;
        let d_c: Array1<f64> =
            &d_c_rec + &(&d_h * &tr.o * &tr.tanh_c.mapv(|v| 1.0 - v * v));
        let d_f = &d_c * &tr.c_prev;
        let d_i_gate = &d_c * &tr.c_tilde;
        let d_c_tilde = &d_c * &tr.i;
        d_c_rec = &d_c * &tr.f;

        let da_f = &d_f * &tr.f.mapv(|v| v * (1.0 - v));
        let da_i = &d_i_gate * &tr.i.mapv(|v| v * (1.0 - v));
        let da_o = &d_o * &tr.o.mapv(|v| v * (1.0 - v));
        let da_c = &d_c_tilde * &tr.c_tilde.mapv(|v| 1.0 - v * v);

        accumulate_outer(&mut g.lstm.w_f, &da_f, &tr.z);
        accumulate_outer(&mut g.lstm.w_i, &da_i, &tr.z);
        accumulate_outer(&mut g.lstm.w_c, &da_c, &tr.z);
        accumulate_outer(&mut g.lstm.w_o, &da_o, &tr.z);
        g.lstm.b_f += &da_f;
        g.lstm.b_i += &da_i;
        g.lstm.b_c += &da_c;
        g.lstm.b_o += &da_o;

        let d_z = gates_input_gradient(&net.lstm, &da_f, &da_i, &da_c, &da_o);
        d_h_rec = d_z.slice(ndarray::s![..hidden]).to_owned();
        d_encoded
            .row_mut(t)
            .assign(&d_z.slice(ndarray::s![hidden..]));
    }

    // encoder layers, last to first
    let mut d_x = d_encoded;
    for l in (0..net.encoder.layers.len()).rev() {
        d_x = encoder_layer_backward(
            &net.encoder.layers[l],
            &trace.layers[l],
            net.encoder.n_heads,
            &d_x,
            &mut g.encoder.layers[l],
        )?;
    }

    // embed: tok_t = chunk_t W_in + b_in + pos_t
    let chunk = net.encoder.chunk_dim();
    for t in 0..trace.tokens.nrows() {
        let d_tok = d_x.row(t);
        for j in 0..d_model {
            g.encoder.b_in[j] += d_tok[j];
            g.encoder.pos[(t, j)] += d_tok[j];
            for cdim in 0..chunk {
                g.encoder.w_in[(cdim, j)] += trace.features[t * chunk + cdim] * d_tok[j];
            }
        }
    }

    Ok(g)
}

fn accumulate_outer(w: &mut Array2<f64>, rows: &Array1<f64>, cols: &Array1<f64>) {
    for (r, rv) in rows.iter().enumerate() {
        if *rv == 0.0 {
            continue;
        }
        for (c, cv) in cols.iter().enumerate() {
            w[(r, c)] += rv * cv;
        }
    }
}

fn gates_input_gradient(
    p: &LstmParams,
    da_f: &Array1<f64>,
    da_i: &Array1<f64>,
    da_c: &Array1<f64>,
    da_o: &Array1<f64>,
) -> Array1<f64> {
    let mut d_z = p.w_f.t().dot(da_f);
    d_z += &p.w_i.t().dot(da_i);
    d_z += &p.w_c.t().dot(da_c);
    d_z += &p.w_o.t().dot(da_o);
    d_z
}

/// Layer-norm backward for one row. Returns the input gradient and adds the
/// gain/bias contributions.
fn ln_backward_row(
    d_y: &Array1<f64>,
    tr: &LnTrace,
    gamma: &Array1<f64>,
    d_gamma: &mut Array1<f64>,
    d_beta: &mut Array1<f64>,
) -> Array1<f64> {
    let n = d_y.len() as f64;
    let d_xhat = d_y * gamma;
    let mean_dxhat = d_xhat.sum() / n;
    let mean_dxhat_xhat = (&d_xhat * &tr.xhat).sum() / n;
    for j in 0..d_y.len() {
        d_gamma[j] += d_y[j] * tr.xhat[j];
        d_beta[j] += d_y[j];
    }
    Array1::from_shape_fn(d_y.len(), |j| {
        tr.inv_std * (d_xhat[j] - mean_dxhat - tr.xhat[j] * mean_dxhat_xhat)
    })
}

/// Row-wise softmax backward: `dS = A o (dA - rowsum(dA o A))`.
fn softmax_backward(attn: &Array2<f64>, d_attn: &Array2<f64>) -> Array2<f64> {
    let mut d_s = Array2::zeros(attn.raw_dim());
    for r in 0..attn.nrows() {
        let dot: f64 = (0..attn.ncols()).map(|c| d_attn[(r, c)] * attn[(r, c)]).sum();
        for c in 0..attn.ncols() {
            d_s[(r, c)] = attn[(r, c)] * (d_attn[(r, c)] - dot);
        }
    }
    d_s
}

/// Backward through one encoder layer; returns the gradient on the layer
/// input and accumulates parameter gradients into `g`.
fn encoder_layer_backward(
    layer: &EncoderLayerParams,
    tr: &LayerTrace,
    n_heads: usize,
    d_out: &Array2<f64>,
    g: &mut EncoderLayerParams,
) -> Result<Array2<f64>> {
    let seq = d_out.nrows();
    let d_model = d_out.ncols();
    let d_k = d_model / n_heads;

    // LN2 backward
    let mut d_res2 = Array2::zeros((seq, d_model));
    for t in 0..seq {
        let d_row = ln_backward_row(
            &d_out.row(t).to_owned(),
            &tr.ln2[t],
            &layer.ln2_gamma,
            &mut g.ln2_gamma,
            &mut g.ln2_beta,
        );
        d_res2.row_mut(t).assign(&d_row);
    }

    // res2 = ln1_out + ffn(ln1_out)
    let mut d_ln1_out = d_res2.clone();
    for t in 0..seq {
        let d_y = d_res2.row(t).to_owned();
        let ftr = &tr.ffn[t];
        // y = a1 W2 + b2
        let d_a1 = layer.w2.dot(&d_y); // (d_ff)
        accumulate_outer(&mut g.w2, &ftr.a1, &d_y);
        g.b2 += &d_y;
        // relu
        let d_z1 = Array1::from_shape_fn(ftr.z1.len(), |j| {
            if ftr.z1[j] > 0.0 {
                d_a1[j]
            } else {
                0.0
            }
        });
        // z1 = x W1 + b1, x = ln1_out row
        let x = tr.ln1_out.row(t).to_owned();
        accumulate_outer(&mut g.w1, &x, &d_z1);
        g.b1 += &d_z1;
        let d_x = layer.w1.dot(&d_z1);
        for j in 0..d_model {
            d_ln1_out[(t, j)] += d_x[j];
        }
    }

    // LN1 backward
    let mut d_res1 = Array2::zeros((seq, d_model));
    for t in 0..seq {
        let d_row = ln_backward_row(
            &d_ln1_out.row(t).to_owned(),
            &tr.ln1[t],
            &layer.ln1_gamma,
            &mut g.ln1_gamma,
            &mut g.ln1_beta,
        );
        d_res1.row_mut(t).assign(&d_row);
    }

    // res1 = x_in + context Wo
    let mut d_x_in = d_res1.clone();
    let d_attn_out = d_res1;
    // attn_out = context Wo
    let d_context = d_attn_out.dot(&layer.wo.t());
    g.wo += &tr.context.t().dot(&d_attn_out);

    // per-head attention backward
    let mut d_q_full = Array2::zeros((seq, d_model));
    let mut d_k_full = Array2::zeros((seq, d_model));
    let mut d_v_full = Array2::zeros((seq, d_model));
    for h in 0..n_heads {
        let cols = h * d_k..(h + 1) * d_k;
        let d_ctx_h = d_context.slice(ndarray::s![.., cols.clone()]).to_owned();
        let attn = &tr.attn[h];
        let vh = tr.v.slice(ndarray::s![.., cols.clone()]).to_owned();
        let qh = tr.q.slice(ndarray::s![.., cols.clone()]).to_owned();
        let kh = tr.k.slice(ndarray::s![.., cols.clone()]).to_owned();

        let d_vh = attn.t().dot(&d_ctx_h);
        let d_attn = d_ctx_h.dot(&vh.t());
        let d_s = softmax_backward(attn, &d_attn) / (d_k as f64).sqrt();
        let d_qh = d_s.dot(&kh);
        let d_kh = d_s.t().dot(&qh);

        d_q_full.slice_mut(ndarray::s![.., cols.clone()]).assign(&d_qh);
        d_k_full.slice_mut(ndarray::s![.., cols.clone()]).assign(&d_kh);
        d_v_full.slice_mut(ndarray::s![.., cols]).assign(&d_vh);
    }

    // Q = X Wq etc.
    g.wq += &tr.x_in.t().dot(&d_q_full);
    g.wk += &tr.x_in.t().dot(&d_k_full);
    g.wv += &tr.x_in.t().dot(&d_v_full);
    d_x_in += &d_q_full.dot(&layer.wq.t());
    d_x_in += &d_k_full.dot(&layer.wk.t());
    d_x_in += &d_v_full.dot(&layer.wv.t());

    Ok(d_x_in)
}
