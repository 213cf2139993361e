//! Zero-phase FIR band-pass filtering.
//!
//! The kernel is a Hamming-windowed sinc band-pass of odd length, applied
//! forward and then backward, so the effective magnitude response is the
//! squared kernel response and the phase is zero. The length scales with
//! `fs / lo_hz` for low-edge resolution and with `fs / (hi_hz - lo_hz)` so
//! the passband of narrow bands still reaches unity gain at its center
//! (Hamming transition width is about `3.3 * fs / taps`). Edges are
//! reflect-padded by one kernel length before filtering and cropped
//! afterwards.

use super::{EegRecording, FrequencyBand};
use crate::error::Result;

/// Design the linear-phase band-pass kernel for `band` at sampling rate `fs`.
pub fn design_bandpass(band: &FrequencyBand, fs: f64) -> Vec<f64> {
    let low_edge = (4.0 * fs / band.lo_hz).ceil() as usize;
    let bandwidth = (6.6 * fs / (band.hi_hz - band.lo_hz)).ceil() as usize;
    let order = low_edge.max(bandwidth);
    let len = if order % 2 == 0 { order + 1 } else { order };
    let half = (len / 2) as isize;
    let f1 = band.lo_hz / fs;
    let f2 = band.hi_hz / fs;

    let sinc = |x: f64| {
        if x == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
        }
    };

    let mut kernel = Vec::with_capacity(len);
    for n in 0..len as isize {
        let m = (n - half) as f64;
        let ideal = 2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m);
        let w = 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (len as f64 - 1.0)).cos();
        kernel.push(ideal * w);
    }
    kernel
}

/// Squared magnitude response of one forward+backward pass of `kernel` at
/// frequency `f_hz`, evaluated by direct DFT. This is the analytic gain the
/// zero-phase filter applies to a pure sinusoid.
pub fn kernel_power_response(kernel: &[f64], f_hz: f64, fs: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * f_hz / fs;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, h) in kernel.iter().enumerate() {
        re += h * (omega * n as f64).cos();
        im -= h * (omega * n as f64).sin();
    }
    let mag2 = re * re + im * im;
    mag2 * mag2
}

fn convolve_same(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let n = x.len() as isize;
    let mut y = vec![0.0; x.len()];
    for i in 0..n {
        let mut acc = 0.0;
        for (j, h) in kernel.iter().enumerate() {
            let k = i + j as isize - half;
            if k >= 0 && k < n {
                acc += h * x[k as usize];
            }
        }
        y[i as usize] = acc;
    }
    y
}

fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let pad = pad.min(n.saturating_sub(1));
    let mut out = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        out.push(x[i]);
    }
    out.extend_from_slice(x);
    for i in 1..=pad {
        out.push(x[n - 1 - i]);
    }
    out
}

/// Forward-backward application of `kernel` to `x`; output length equals
/// input length.
pub fn filtfilt(kernel: &[f64], x: &[f64]) -> Vec<f64> {
    let pad = kernel.len();
    let padded = reflect_pad(x, pad);
    let actual_pad = (padded.len() - x.len()) / 2;

    let forward = convolve_same(&padded, kernel);
    let mut rev: Vec<f64> = forward.into_iter().rev().collect();
    rev = convolve_same(&rev, kernel);
    rev.reverse();

    rev[actual_pad..actual_pad + x.len()].to_vec()
}

/// Zero-phase band-pass filter every channel of every trial.
pub fn bandpass_filter(rec: &EegRecording, band: &FrequencyBand) -> Result<EegRecording> {
    band.validate_for(rec.sampling_rate_hz)?;
    let kernel = design_bandpass(band, rec.sampling_rate_hz);

    let mut out = rec.clone();
    for trial in out.trials.iter_mut() {
        for mut row in trial.samples.rows_mut() {
            let filtered = filtfilt(&kernel, &row.to_vec());
            for (dst, src) in row.iter_mut().zip(filtered) {
                *dst = src;
            }
        }
    }
    Ok(out)
}
