//! LSTM cell.
//!
//! Gates act on the concatenation `[h, x]`:
//! `f = sigmoid(W_f [h,x] + b_f)`, `i = sigmoid(W_i [h,x] + b_i)`,
//! `c~ = tanh(W_C [h,x] + b_C)`, `C' = f*C + i*c~`,
//! `o = sigmoid(W_o [h,x] + b_o)`, `h' = o * tanh(C')`.

use ndarray::{Array1, Array2};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct LstmParams {
    pub w_f: Array2<f64>,
    pub w_i: Array2<f64>,
    pub w_c: Array2<f64>,
    pub w_o: Array2<f64>,
    pub b_f: Array1<f64>,
    pub b_i: Array1<f64>,
    pub b_c: Array1<f64>,
    pub b_o: Array1<f64>,
}

impl LstmParams {
    pub fn hidden(&self) -> usize {
        self.w_f.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_f.ncols() - self.hidden()
    }
}

#[derive(Debug, Clone)]
pub struct LstmState {
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: Array1::zeros(hidden),
            c: Array1::zeros(hidden),
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gate activations and intermediates of one step, kept for backward.
#[derive(Debug, Clone)]
pub struct LstmStepTrace {
    /// Concatenated `[h_prev, x]`.
    pub z: Array1<f64>,
    pub f: Array1<f64>,
    pub i: Array1<f64>,
    pub c_tilde: Array1<f64>,
    pub o: Array1<f64>,
    pub c_prev: Array1<f64>,
    pub c: Array1<f64>,
    pub tanh_c: Array1<f64>,
}

pub fn lstm_step_traced(
    p: &LstmParams,
    s: &LstmState,
    x: &Array1<f64>,
) -> Result<(LstmState, LstmStepTrace)> {
    let hidden = p.hidden();
    if s.h.len() != hidden || s.c.len() != hidden {
        return Err(CoreError::Argument(format!(
            "state dimension {} does not match hidden {hidden}",
            s.h.len()
        )));
    }
    if x.len() != p.input_dim() {
        return Err(CoreError::Argument(format!(
            "input dimension {} does not match expected {}",
            x.len(),
            p.input_dim()
        )));
    }

    let mut z = Array1::zeros(hidden + x.len());
    z.slice_mut(ndarray::s![..hidden]).assign(&s.h);
    z.slice_mut(ndarray::s![hidden..]).assign(x);

    let f = (p.w_f.dot(&z) + &p.b_f).mapv(sigmoid);
    let i = (p.w_i.dot(&z) + &p.b_i).mapv(sigmoid);
    let c_tilde = (p.w_c.dot(&z) + &p.b_c).mapv(f64::tanh);
    let o = (p.w_o.dot(&z) + &p.b_o).mapv(sigmoid);
    let c = &f * &s.c + &i * &c_tilde;
    let tanh_c = c.mapv(f64::tanh);
    let h = &o * &tanh_c;

    let trace = LstmStepTrace {
        z,
        f,
        i,
        c_tilde,
        o,
        c_prev: s.c.clone(),
        c: c.clone(),
        tanh_c,
    };
    Ok((LstmState { h, c }, trace))
}

/// One LSTM step.
pub fn lstm_step(p: &LstmParams, s: &LstmState, x: &Array1<f64>) -> Result<LstmState> {
    lstm_step_traced(p, s, x).map(|(s, _)| s)
}
