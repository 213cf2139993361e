//! Synthetic recordings with planted ground truth.
//!
//! Sources are band-limited unit-variance noise; class identity scales the
//! per-source band variance; channels are a fixed mixing of the sources plus
//! white noise. The generator returns the mixing matrix and the per-class
//! discriminative source indices so spatial-filter recovery can be scored
//! against a known answer.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{design_bandpass, filtfilt, EegRecording, FrequencyBand, Trial};
use crate::error::{CoreError, Result};
use crate::rng::{stream_rng, Stream};

/// Specification for a synthetic recording.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub n_channels: usize,
    pub n_classes: usize,
    pub trials_per_class: usize,
    pub fs_hz: f64,
    pub trial_len_s: f64,
    /// channels x sources; must have full column rank.
    pub mixing_matrix: Array2<f64>,
    /// classes x sources; variance gain of each source's band-limited power.
    pub class_band_gains: Array2<f64>,
    /// Band carrying the discriminative variance.
    pub band: FrequencyBand,
    pub noise_scale: f64,
    pub seed: u64,
}

/// What was planted: the mixing matrix, the strongest source per class, and
/// the seed used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(with = "crate::mat::array2")]
    pub mixing_matrix: Array2<f64>,
    pub class_sources: Vec<usize>,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        let n_sources = self.mixing_matrix.ncols();
        if self.mixing_matrix.nrows() != self.n_channels {
            return Err(CoreError::Argument(format!(
                "mixing matrix has {} rows, expected {} channels",
                self.mixing_matrix.nrows(),
                self.n_channels
            )));
        }
        if self.class_band_gains.shape() != [self.n_classes, n_sources] {
            return Err(CoreError::Argument(format!(
                "class_band_gains shape {:?}, expected [{}, {}]",
                self.class_band_gains.shape(),
                self.n_classes,
                n_sources
            )));
        }
        if self.class_band_gains.iter().any(|g| *g < 0.0) {
            return Err(CoreError::Argument("gains must be nonnegative".into()));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(CoreError::Argument("noise_scale must be >= 0".into()));
        }
        self.band.validate_for(self.fs_hz)?;

        let svd = crate::mat::to_na(&self.mixing_matrix).svd(false, false);
        let rank = svd.rank(1e-9);
        if rank < n_sources {
            return Err(CoreError::Argument(format!(
                "mixing matrix is rank-deficient: rank {rank} < {n_sources} sources"
            )));
        }
        Ok(())
    }
}

/// Generate a recording per `spec`. Fully deterministic given `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(EegRecording, GroundTruth)> {
    spec.validate()?;
    let n_sources = spec.mixing_matrix.ncols();
    let n_samples = (spec.fs_hz * spec.trial_len_s).round() as usize;
    if n_samples < 2 {
        return Err(CoreError::Argument(
            "trial_len_s too short for the sampling rate".into(),
        ));
    }
    let kernel = design_bandpass(&spec.band, spec.fs_hz);
    let mut rng = stream_rng(spec.seed, Stream::Synth);

    let mut trials = Vec::with_capacity(spec.n_classes * spec.trials_per_class);
    for class in 0..spec.n_classes {
        for _ in 0..spec.trials_per_class {
            // sources: band-limited noise, normalized to unit variance, then
            // scaled so the planted variance equals the class gain
            let mut sources = Array2::zeros((n_sources, n_samples));
            for j in 0..n_sources {
                let white: Vec<f64> = (0..n_samples)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let band_limited = filtfilt(&kernel, &white);
                let mean = band_limited.iter().sum::<f64>() / n_samples as f64;
                let var = band_limited
                    .iter()
                    .map(|v| (v - mean) * (v - mean))
                    .sum::<f64>()
                    / n_samples as f64;
                let scale = if var > 0.0 {
                    (spec.class_band_gains[(class, j)] / var).sqrt()
                } else {
                    0.0
                };
                for (t, v) in band_limited.iter().enumerate() {
                    sources[(j, t)] = (v - mean) * scale;
                }
            }

            let mut samples = spec.mixing_matrix.dot(&sources);
            if spec.noise_scale > 0.0 {
                for v in samples.iter_mut() {
                    *v += spec.noise_scale * rng.sample::<f64, _>(StandardNormal);
                }
            } else {
                // keep the draw sequence identical whether or not noise is on
                for _ in 0..samples.len() {
                    let _: f64 = rng.sample(StandardNormal);
                }
            }

            trials.push(Trial {
                samples,
                label: class,
                onset_s: 0.0,
            });
        }
    }

    let class_sources = (0..spec.n_classes)
        .map(|c| {
            let row = spec.class_band_gains.row(c);
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(j, _)| j)
                .unwrap_or(0)
        })
        .collect();

    let rec = EegRecording {
        sampling_rate_hz: spec.fs_hz,
        channel_names: (0..spec.n_channels).map(|c| format!("ch{c}")).collect(),
        class_labels: (0..spec.n_classes).map(|c| format!("class{c}")).collect(),
        trials,
    };
    rec.validate()?;
    Ok((
        rec,
        GroundTruth {
            mixing_matrix: spec.mixing_matrix.clone(),
            class_sources,
            seed: spec.seed,
        },
    ))
}

/// Convenience builder used by tests and the CLI: `n_classes` sources, class
/// `c` gets `gain_high` on source `c` and `gain_low` elsewhere, and a random
/// orthonormal mixing into `n_channels` channels.
pub fn default_synthetic_spec(
    n_channels: usize,
    n_classes: usize,
    trials_per_class: usize,
    fs_hz: f64,
    trial_len_s: f64,
    gain_high: f64,
    gain_low: f64,
    noise_scale: f64,
    seed: u64,
) -> SyntheticSpec {
    let mut rng = stream_rng(seed ^ 0x6d69_7869_6e67, Stream::Synth);
    let raw = Array2::from_shape_fn((n_channels, n_classes), |_| {
        rng.sample::<f64, _>(StandardNormal)
    });
    let mixing = orthonormal_columns(&raw);
    let gains = Array2::from_shape_fn((n_classes, n_classes), |(c, j)| {
        if c == j {
            gain_high
        } else {
            gain_low
        }
    });
    SyntheticSpec {
        n_channels,
        n_classes,
        trials_per_class,
        fs_hz,
        trial_len_s,
        mixing_matrix: mixing,
        class_band_gains: gains,
        band: FrequencyBand::alpha(),
        noise_scale,
        seed,
    }
}

/// Gram-Schmidt orthonormalization of the columns.
fn orthonormal_columns(a: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut q: Vec<Array1<f64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = a.column(j).to_owned();
        for prev in &q {
            let proj = v.dot(prev);
            v = &v - &(prev * proj);
        }
        let norm = v.dot(&v).sqrt();
        q.push(v / norm);
    }
    Array2::from_shape_fn((rows, cols), |(i, j)| q[j][i])
}
