//! EEG data model, ingestion, epoching, filtering, and synthetic data.

mod epoch;
mod filter;
mod io;
mod synth;

pub use epoch::epoch_trials;
pub use filter::{bandpass_filter, design_bandpass, filtfilt, kernel_power_response};
pub use io::{load_recording, write_recording};
pub use synth::{default_synthetic_spec, generate_synthetic, GroundTruth, SyntheticSpec};

use ndarray::Array2;

use crate::error::{CoreError, Result};

/// One cued trial: a channels-by-time sample matrix in microvolts, the class
/// label, and the cue onset relative to sample 0.
#[derive(Debug, Clone)]
pub struct Trial {
    pub samples: Array2<f64>,
    pub label: usize,
    pub onset_s: f64,
}

impl Trial {
    pub fn n_channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }
}

/// A multichannel recording: sampling rate, channel names, labelled trials,
/// and the class-label vocabulary.
#[derive(Debug, Clone)]
pub struct EegRecording {
    pub sampling_rate_hz: f64,
    pub channel_names: Vec<String>,
    pub class_labels: Vec<String>,
    pub trials: Vec<Trial>,
}

impl EegRecording {
    pub fn n_channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sampling_rate_hz / 2.0
    }

    /// Check the structural invariants: positive sampling rate, uniform
    /// channel count, at least two samples per trial, in-range labels, and
    /// finite sample values.
    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_rate_hz > 0.0) {
            return Err(CoreError::Argument(format!(
                "sampling_rate_hz must be positive, got {}",
                self.sampling_rate_hz
            )));
        }
        for (idx, trial) in self.trials.iter().enumerate() {
            if trial.n_channels() != self.n_channels() {
                return Err(CoreError::Format(format!(
                    "trial {idx} has {} channels, expected {}",
                    trial.n_channels(),
                    self.n_channels()
                )));
            }
            if trial.n_samples() < 2 {
                return Err(CoreError::Format(format!(
                    "trial {idx} has {} samples, need at least 2",
                    trial.n_samples()
                )));
            }
            if trial.label >= self.n_classes() {
                return Err(CoreError::Format(format!(
                    "trial {idx} label {} out of range for {} classes",
                    trial.label,
                    self.n_classes()
                )));
            }
            if trial.samples.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::Format(format!(
                    "trial {idx} contains non-finite samples"
                )));
            }
        }
        Ok(())
    }

    /// Indices of trials belonging to `class`.
    pub fn class_trials(&self, class: usize) -> Vec<usize> {
        self.trials
            .iter()
            .enumerate()
            .filter(|(_, t)| t.label == class)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A named frequency band in Hz.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencyBand {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl FrequencyBand {
    pub fn new(name: &str, lo_hz: f64, hi_hz: f64) -> Self {
        FrequencyBand {
            name: name.to_string(),
            lo_hz,
            hi_hz,
        }
    }

    /// 0 < lo < hi, and hi below the Nyquist frequency of the target signal.
    pub fn validate_for(&self, sampling_rate_hz: f64) -> Result<()> {
        if !(self.lo_hz > 0.0 && self.lo_hz < self.hi_hz) {
            return Err(CoreError::Argument(format!(
                "band {}: need 0 < lo < hi, got [{}, {}]",
                self.name, self.lo_hz, self.hi_hz
            )));
        }
        if self.hi_hz >= sampling_rate_hz / 2.0 {
            return Err(CoreError::Argument(format!(
                "band {}: hi {} Hz at or above Nyquist {} Hz",
                self.name,
                self.hi_hz,
                sampling_rate_hz / 2.0
            )));
        }
        Ok(())
    }

    pub fn delta() -> Self {
        Self::new("delta", 1.0, 4.0)
    }

    pub fn theta() -> Self {
        Self::new("theta", 4.0, 8.0)
    }

    pub fn alpha() -> Self {
        Self::new("alpha", 8.0, 12.0)
    }

    pub fn beta() -> Self {
        Self::new("beta", 12.0, 25.0)
    }

    pub fn gamma() -> Self {
        Self::new("gamma", 25.0, 100.0)
    }

    /// The five canonical EEG bands.
    pub fn standard_bands() -> Vec<FrequencyBand> {
        vec![
            Self::delta(),
            Self::theta(),
            Self::alpha(),
            Self::beta(),
            Self::gamma(),
        ]
    }
}
