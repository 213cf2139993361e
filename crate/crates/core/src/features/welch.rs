//! Median-Welch power spectral density estimation.
//!
//! The signal is split into overlapping segments; each segment is Hann
//! windowed, zero padded to `nfft`, transformed, and scaled to a one-sided
//! density (`signal-units^2 / Hz`, interior bins doubled, normalized by the
//! window power). Segments combine by element-wise median by default, which
//! is robust to transient artifacts; arithmetic mean is available as an
//! option.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::signal::FrequencyBand;

/// How per-segment periodograms are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    Median,
    Mean,
}

/// One-sided PSD estimate.
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub nfft: usize,
    pub segment_len: usize,
    pub overlap_frac: f64,
    pub averaging: Averaging,
}

/// Welch settings used by the feature pipeline. `segment_len` defaults to
/// `min(256, len)` and `nfft` to the segment length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: Option<usize>,
    pub overlap_frac: f64,
    pub nfft: Option<usize>,
    pub averaging: Averaging,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_len: None,
            overlap_frac: 0.5,
            nfft: None,
            averaging: Averaging::Median,
        }
    }
}

impl WelchConfig {
    pub fn resolve(&self, signal_len: usize) -> (usize, usize) {
        let seg = self.segment_len.unwrap_or_else(|| signal_len.min(256));
        let nfft = self.nfft.unwrap_or(seg).max(seg);
        (seg, nfft)
    }
}

/// Periodic Hann window.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos()))
        .collect()
}

/// Welch PSD of `x`.
pub fn welch_psd(
    x: &[f64],
    fs: f64,
    segment_len: usize,
    overlap_frac: f64,
    nfft: usize,
    averaging: Averaging,
) -> Result<PsdEstimate> {
    if segment_len == 0 || segment_len > x.len() {
        return Err(CoreError::Argument(format!(
            "segment_len {segment_len} invalid for signal of length {}",
            x.len()
        )));
    }
    if nfft < segment_len {
        return Err(CoreError::Argument(format!(
            "nfft {nfft} smaller than segment_len {segment_len}"
        )));
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(CoreError::Argument(format!(
            "overlap_frac must be in [0, 1), got {overlap_frac}"
        )));
    }
    if !(fs > 0.0) {
        return Err(CoreError::Argument("fs must be positive".into()));
    }

    let window = hann_window(segment_len);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let overlap = (segment_len as f64 * overlap_frac).floor() as usize;
    let step = segment_len - overlap;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(nfft);
    let n_bins = nfft / 2 + 1;

    let mut periodograms: Vec<Vec<f64>> = Vec::new();
    let mut start = 0;
    while start + segment_len <= x.len() {
        let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
        for (n, w) in window.iter().enumerate() {
            buf[n] = Complex64::new(x[start + n] * w, 0.0);
        }
        fft.process(&mut buf);

        let mut p = vec![0.0; n_bins];
        for (k, pk) in p.iter_mut().enumerate() {
            *pk = buf[k].norm_sqr() / (fs * window_power);
        }
        // one-sided: double everything except DC and (for even nfft) Nyquist
        let last_doubled = if nfft % 2 == 0 { n_bins - 1 } else { n_bins };
        for pk in p.iter_mut().take(last_doubled).skip(1) {
            *pk *= 2.0;
        }
        periodograms.push(p);
        start += step;
    }

    let combined = match averaging {
        Averaging::Mean => {
            let k = periodograms.len() as f64;
            (0..n_bins)
                .map(|j| periodograms.iter().map(|p| p[j]).sum::<f64>() / k)
                .collect()
        }
        Averaging::Median => (0..n_bins)
            .map(|j| {
                let mut col: Vec<f64> = periodograms.iter().map(|p| p[j]).collect();
                median_in_place(&mut col)
            })
            .collect(),
    };

    Ok(PsdEstimate {
        freqs_hz: (0..n_bins).map(|k| k as f64 * fs / nfft as f64).collect(),
        power: combined,
        nfft,
        segment_len,
        overlap_frac,
        averaging,
    })
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Trapezoidal integral of the PSD over `band`, with linear interpolation of
/// the integrand at the band edges.
pub fn band_power(psd: &PsdEstimate, band: &FrequencyBand) -> Result<f64> {
    let lo = band.lo_hz;
    let hi = band.hi_hz;
    let fmin = *psd.freqs_hz.first().ok_or_else(|| {
        CoreError::Argument("empty PSD".into())
    })?;
    let fmax = *psd.freqs_hz.last().unwrap();
    if !(lo < hi) {
        return Err(CoreError::Argument(format!(
            "band [{lo}, {hi}] is not increasing"
        )));
    }
    if lo < fmin || hi > fmax {
        return Err(CoreError::Argument(format!(
            "band [{lo}, {hi}] outside PSD range [{fmin}, {fmax}]"
        )));
    }

    let interp = |f: f64| -> f64 {
        let i = psd
            .freqs_hz
            .partition_point(|g| *g <= f)
            .min(psd.freqs_hz.len() - 1)
            .max(1);
        let (f0, f1) = (psd.freqs_hz[i - 1], psd.freqs_hz[i]);
        let (p0, p1) = (psd.power[i - 1], psd.power[i]);
        p0 + (p1 - p0) * (f - f0) / (f1 - f0)
    };

    // integration nodes: lo, all interior grid points, hi
    let mut nodes = vec![(lo, interp(lo))];
    for (f, p) in psd.freqs_hz.iter().zip(&psd.power) {
        if *f > lo && *f < hi {
            nodes.push((*f, *p));
        }
    }
    nodes.push((hi, interp(hi)));

    let mut total = 0.0;
    for pair in nodes.windows(2) {
        let (f0, p0) = pair[0];
        let (f1, p1) = pair[1];
        total += 0.5 * (p0 + p1) * (f1 - f0);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_gives_zero_power() {
        let x = vec![0.0; 512];
        let psd = welch_psd(&x, 250.0, 256, 0.5, 256, Averaging::Median).unwrap();
        assert!(psd.power.iter().all(|p| *p == 0.0));
        assert_eq!(psd.freqs_hz.len(), 129);
    }

    #[test]
    fn sine_peaks_at_analytic_bin() {
        let fs = 250.0;
        let n = 500;
        let x: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * 10.0 * t as f64 / fs).sin())
            .collect();
        let psd = welch_psd(&x, fs, 500, 0.0, 500, Averaging::Mean).unwrap();
        let peak = psd
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 20); // 10 Hz * 500 / 250
        assert_eq!(psd.freqs_hz[peak], 10.0);
    }

    #[test]
    fn odd_nfft_supported() {
        let x: Vec<f64> = (0..1000).map(|t| (t as f64 * 0.1).sin()).collect();
        let psd = welch_psd(&x, 250.0, 625, 0.5, 625, Averaging::Median).unwrap();
        assert_eq!(psd.freqs_hz.len(), 625 / 2 + 1);
    }

    #[test]
    fn invalid_arguments_rejected() {
        let x = vec![1.0; 100];
        assert!(welch_psd(&x, 250.0, 128, 0.5, 128, Averaging::Median).is_err());
        assert!(welch_psd(&x, 250.0, 64, 0.5, 32, Averaging::Median).is_err());
        assert!(welch_psd(&x, 250.0, 64, 1.0, 64, Averaging::Median).is_err());
    }

    #[test]
    fn band_power_of_constant_density_is_band_width() {
        let psd = PsdEstimate {
            freqs_hz: (0..=125).map(|k| k as f64).collect(),
            power: vec![1.0; 126],
            nfft: 250,
            segment_len: 250,
            overlap_frac: 0.0,
            averaging: Averaging::Mean,
        };
        let band = FrequencyBand::new("w", 8.0, 12.0);
        let got = band_power(&psd, &band).unwrap();
        assert!((got - 4.0).abs() < 1e-12);
    }

    #[test]
    fn band_power_handles_fractional_edges() {
        let psd = PsdEstimate {
            freqs_hz: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            power: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            nfft: 8,
            segment_len: 8,
            overlap_frac: 0.0,
            averaging: Averaging::Mean,
        };
        // integrand is f, integral of f df over [0.5, 3.5] = (3.5^2 - 0.5^2)/2 = 6.0
        let band = FrequencyBand::new("w", 0.5, 3.5);
        assert!((band_power(&psd, &band).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn band_outside_range_rejected() {
        let psd = PsdEstimate {
            freqs_hz: vec![0.0, 1.0, 2.0],
            power: vec![0.0, 0.0, 0.0],
            nfft: 4,
            segment_len: 4,
            overlap_frac: 0.0,
            averaging: Averaging::Mean,
        };
        assert!(band_power(&psd, &FrequencyBand::new("w", 1.0, 3.0)).is_err());
        assert!((band_power(&psd, &FrequencyBand::new("z", 0.5, 1.5)).unwrap()).abs() < 1e-12);
    }
}
