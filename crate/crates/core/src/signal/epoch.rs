//! Epoch extraction relative to the cue onset.

use super::EegRecording;
use crate::error::{CoreError, Result};

/// Crop every trial to the window `[t_min_s, t_max_s]` measured from the
/// trial's `onset_s`, both endpoints inclusive.
///
/// The start index is `round(fs * (onset + t_min))` and the sample count is
/// `round(fs * (t_max - t_min)) + 1`, so at 250 Hz a 1 s - 7 s window yields
/// 1501 samples and a 2 s - 6 s window yields 1001.
pub fn epoch_trials(rec: &EegRecording, t_min_s: f64, t_max_s: f64) -> Result<EegRecording> {
    if !(t_min_s < t_max_s) {
        return Err(CoreError::Argument(format!(
            "epoch window must satisfy t_min < t_max, got [{t_min_s}, {t_max_s}]"
        )));
    }
    let fs = rec.sampling_rate_hz;
    let count = (fs * (t_max_s - t_min_s)).round() as usize + 1;

    let mut out = rec.clone();
    for (idx, trial) in out.trials.iter_mut().enumerate() {
        let start = (fs * (trial.onset_s + t_min_s)).round() as isize;
        let end = start + count as isize - 1;
        if start < 0 || end >= trial.n_samples() as isize {
            return Err(CoreError::Range(format!(
                "trial {idx}: window [{t_min_s}, {t_max_s}] maps to samples [{start}, {end}] \
                 outside 0..{}",
                trial.n_samples()
            )));
        }
        trial.samples = trial
            .samples
            .slice(ndarray::s![.., start as usize..=end as usize])
            .to_owned();
    }
    Ok(out)
}
