//! Transformer-style encoder primitives: tokenizing embed, scaled dot-product
//! attention, layer normalization, and the position-wise feed-forward block.
//!
//! Every primitive has a traced variant that records the intermediates needed
//! by reverse-mode differentiation; the plain functions wrap the traced ones
//! so both paths share the arithmetic.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{CoreError, Result};

pub const LN_EPS: f64 = 1e-5;

/// Per-layer parameters: attention projections, two layer norms, and the
/// feed-forward weights.
#[derive(Debug, Clone)]
pub struct EncoderLayerParams {
    pub wq: Array2<f64>,
    pub wk: Array2<f64>,
    pub wv: Array2<f64>,
    pub wo: Array2<f64>,
    pub ln1_gamma: Array1<f64>,
    pub ln1_beta: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub ln2_gamma: Array1<f64>,
    pub ln2_beta: Array1<f64>,
}

/// Encoder parameters: input projection, learned positions, and the layers.
#[derive(Debug, Clone)]
pub struct EncoderParams {
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub tokens_per_trial: usize,
    pub max_seq: usize,
    /// chunk_dim x d_model input projection.
    pub w_in: Array2<f64>,
    pub b_in: Array1<f64>,
    /// max_seq x d_model learned positional encodings.
    pub pos: Array2<f64>,
    pub layers: Vec<EncoderLayerParams>,
}

impl EncoderParams {
    pub fn chunk_dim(&self) -> usize {
        self.w_in.nrows()
    }

    pub fn d_k(&self) -> usize {
        self.d_model / self.n_heads
    }
}

/// Reshape a feature vector into `tokens_per_trial` chunks, project each to
/// `d_model`, and add the learned positional encodings.
pub fn embed(features: &[f64], p: &EncoderParams) -> Result<Array2<f64>> {
    if p.tokens_per_trial == 0 || features.len() % p.tokens_per_trial != 0 {
        return Err(CoreError::Argument(format!(
            "feature length {} not divisible into {} tokens",
            features.len(),
            p.tokens_per_trial
        )));
    }
    let chunk = features.len() / p.tokens_per_trial;
    if chunk != p.chunk_dim() {
        return Err(CoreError::Argument(format!(
            "chunk size {chunk} does not match input projection rows {}",
            p.chunk_dim()
        )));
    }
    if p.tokens_per_trial > p.max_seq {
        return Err(CoreError::Argument(format!(
            "{} tokens exceed max_seq {}",
            p.tokens_per_trial, p.max_seq
        )));
    }

    let chunks = Array2::from_shape_vec((p.tokens_per_trial, chunk), features.to_vec())
        .map_err(|e| CoreError::Argument(e.to_string()))?;
    let mut tokens = chunks.dot(&p.w_in);
    for (t, mut row) in tokens.rows_mut().into_iter().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += p.b_in[j] + p.pos[(t, j)];
        }
    }
    Ok(tokens)
}

/// Row-wise max-subtracted softmax.
pub fn softmax_rows(scores: &Array2<f64>) -> Array2<f64> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Scaled dot-product attention returning the attention weights as well.
pub fn attention_with_weights(
    q: &Array2<f64>,
    k: &Array2<f64>,
    v: &Array2<f64>,
    d_k: usize,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if q.ncols() != k.ncols() {
        return Err(CoreError::Argument(format!(
            "Q has {} columns but K has {}",
            q.ncols(),
            k.ncols()
        )));
    }
    if k.nrows() != v.nrows() {
        return Err(CoreError::Argument(format!(
            "K has {} rows but V has {}",
            k.nrows(),
            v.nrows()
        )));
    }
    if d_k == 0 {
        return Err(CoreError::Argument("d_k must be positive".into()));
    }
    let scores = q.dot(&k.t()) / (d_k as f64).sqrt();
    let weights = softmax_rows(&scores);
    Ok((weights.dot(v), weights))
}

/// `softmax(Q K^T / sqrt(d_k)) V`.
pub fn attention(
    q: &Array2<f64>,
    k: &Array2<f64>,
    v: &Array2<f64>,
    d_k: usize,
) -> Result<Array2<f64>> {
    attention_with_weights(q, k, v, d_k).map(|(out, _)| out)
}

/// Layer-norm trace for one vector: normalized value and inverse std.
#[derive(Debug, Clone)]
pub struct LnTrace {
    pub xhat: Array1<f64>,
    pub inv_std: f64,
}

pub fn layer_norm_traced(
    x: &ArrayView1<f64>,
    gamma: &Array1<f64>,
    beta: &Array1<f64>,
) -> Result<(Array1<f64>, LnTrace)> {
    let n = x.len();
    if gamma.len() != n || beta.len() != n {
        return Err(CoreError::Argument(format!(
            "layer_norm shapes disagree: x {n}, gamma {}, beta {}",
            gamma.len(),
            beta.len()
        )));
    }
    let nf = n as f64;
    let mean = x.sum() / nf;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    let inv_std = 1.0 / (var + LN_EPS).sqrt();
    let xhat = Array1::from_iter(x.iter().map(|v| (v - mean) * inv_std));
    let y = Array1::from_shape_fn(n, |j| gamma[j] * xhat[j] + beta[j]);
    Ok((y, LnTrace { xhat, inv_std }))
}

/// `gamma * (x - mean)/sqrt(var + eps) + beta` with population statistics
/// over the feature dimension.
pub fn layer_norm(
    x: &ArrayView1<f64>,
    gamma: &Array1<f64>,
    beta: &Array1<f64>,
) -> Result<Array1<f64>> {
    layer_norm_traced(x, gamma, beta).map(|(y, _)| y)
}

/// Feed-forward trace: pre-activation of the first linear layer and the
/// ReLU output.
#[derive(Debug, Clone)]
pub struct FfnTrace {
    pub z1: Array1<f64>,
    pub a1: Array1<f64>,
}

pub fn ffn_traced(
    x: &ArrayView1<f64>,
    w1: &Array2<f64>,
    b1: &Array1<f64>,
    w2: &Array2<f64>,
    b2: &Array1<f64>,
) -> Result<(Array1<f64>, FfnTrace)> {
    if x.len() != w1.nrows() || w1.ncols() != b1.len() || w1.ncols() != w2.nrows()
        || w2.ncols() != b2.len()
    {
        return Err(CoreError::Argument(
            "ffn shape chain x->W1->W2 is inconsistent".into(),
        ));
    }
    let z1 = x.dot(w1) + b1;
    let a1 = z1.mapv(|v| v.max(0.0));
    let y = a1.dot(w2) + b2;
    Ok((y, FfnTrace { z1, a1 }))
}

/// `max(0, x W1 + b1) W2 + b2`.
pub fn ffn(
    x: &ArrayView1<f64>,
    w1: &Array2<f64>,
    b1: &Array1<f64>,
    w2: &Array2<f64>,
    b2: &Array1<f64>,
) -> Result<Array1<f64>> {
    ffn_traced(x, w1, b1, w2, b2).map(|(y, _)| y)
}

/// Intermediates of one encoder layer, kept for backward.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub x_in: Array2<f64>,
    pub q: Array2<f64>,
    pub k: Array2<f64>,
    pub v: Array2<f64>,
    /// Attention weights per head, each seq x seq.
    pub attn: Vec<Array2<f64>>,
    /// Concatenated per-head contexts, seq x d_model.
    pub context: Array2<f64>,
    pub res1: Array2<f64>,
    pub ln1: Vec<LnTrace>,
    pub ln1_out: Array2<f64>,
    pub ffn: Vec<FfnTrace>,
    pub res2: Array2<f64>,
    pub ln2: Vec<LnTrace>,
}

/// Multi-head self-attention over `x` (rows are positions).
pub fn multi_head_self_attention(
    x: &Array2<f64>,
    layer: &EncoderLayerParams,
    n_heads: usize,
) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>, Array2<f64>, Vec<Array2<f64>>, Array2<f64>)>
{
    let d_model = x.ncols();
    if d_model % n_heads != 0 {
        return Err(CoreError::Argument(format!(
            "d_model {d_model} not divisible by {n_heads} heads"
        )));
    }
    let d_k = d_model / n_heads;
    let q = x.dot(&layer.wq);
    let k = x.dot(&layer.wk);
    let v = x.dot(&layer.wv);

    let seq = x.nrows();
    let mut context = Array2::zeros((seq, d_model));
    let mut attn = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let cols = h * d_k..(h + 1) * d_k;
        let qh = q.slice(ndarray::s![.., cols.clone()]).to_owned();
        let kh = k.slice(ndarray::s![.., cols.clone()]).to_owned();
        let vh = v.slice(ndarray::s![.., cols.clone()]).to_owned();
        let (ctx, weights) = attention_with_weights(&qh, &kh, &vh, d_k)?;
        context.slice_mut(ndarray::s![.., cols]).assign(&ctx);
        attn.push(weights);
    }
    let out = context.dot(&layer.wo);
    Ok((out, q, k, v, attn, context))
}

/// One encoder layer with residual-then-layer-norm structure:
/// `x <- LN1(x + MHA(x))`, then `x <- LN2(x + FFN(x))`.
pub fn encoder_layer_traced(
    x: &Array2<f64>,
    layer: &EncoderLayerParams,
    n_heads: usize,
) -> Result<(Array2<f64>, LayerTrace)> {
    let (attn_out, q, k, v, attn, context) = multi_head_self_attention(x, layer, n_heads)?;
    let res1 = x + &attn_out;

    let seq = x.nrows();
    let mut ln1_out = Array2::zeros(res1.raw_dim());
    let mut ln1 = Vec::with_capacity(seq);
    for (t, row) in res1.rows().into_iter().enumerate() {
        let (y, tr) = layer_norm_traced(&row, &layer.ln1_gamma, &layer.ln1_beta)?;
        ln1_out.row_mut(t).assign(&y);
        ln1.push(tr);
    }

    let mut ffn_out = Array2::zeros(res1.raw_dim());
    let mut ffn_traces = Vec::with_capacity(seq);
    for (t, row) in ln1_out.rows().into_iter().enumerate() {
        let (y, tr) = ffn_traced(&row, &layer.w1, &layer.b1, &layer.w2, &layer.b2)?;
        ffn_out.row_mut(t).assign(&y);
        ffn_traces.push(tr);
    }
    let res2 = &ln1_out + &ffn_out;

    let mut out = Array2::zeros(res2.raw_dim());
    let mut ln2 = Vec::with_capacity(seq);
    for (t, row) in res2.rows().into_iter().enumerate() {
        let (y, tr) = layer_norm_traced(&row, &layer.ln2_gamma, &layer.ln2_beta)?;
        out.row_mut(t).assign(&y);
        ln2.push(tr);
    }

    let trace = LayerTrace {
        x_in: x.clone(),
        q,
        k,
        v,
        attn,
        context,
        res1,
        ln1,
        ln1_out,
        ffn: ffn_traces,
        res2,
        ln2,
    };
    Ok((out, trace))
}

/// Full encoder stack; the traced variant also returns per-layer traces.
pub fn encoder_forward_traced(
    tokens: &Array2<f64>,
    p: &EncoderParams,
) -> Result<(Array2<f64>, Vec<LayerTrace>)> {
    if tokens.nrows() > p.max_seq {
        return Err(CoreError::Argument(format!(
            "sequence of {} tokens exceeds max_seq {}",
            tokens.nrows(),
            p.max_seq
        )));
    }
    let mut x = tokens.clone();
    let mut traces = Vec::with_capacity(p.layers.len());
    for layer in &p.layers {
        let (next, trace) = encoder_layer_traced(&x, layer, p.n_heads)?;
        traces.push(trace);
        x = next;
    }
    Ok((x, traces))
}

/// Encode a token sequence (positions already added by [`embed`]).
pub fn encoder_forward(tokens: &Array2<f64>, p: &EncoderParams) -> Result<Array2<f64>> {
    encoder_forward_traced(tokens, p).map(|(y, _)| y)
}
