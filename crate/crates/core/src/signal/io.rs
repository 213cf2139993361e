//! Recording manifest + trial CSV ingestion.
//!
//! A recording on disk is a JSON manifest naming per-trial CSV files:
//!
//! ```json
//! {
//!   "sampling_rate_hz": 250.0,
//!   "channel_names": ["C3", "C4"],
//!   "class_labels": ["left", "right"],
//!   "trials": [{"file": "trials/trial_000.csv", "label": 0, "onset_s": 2.0}]
//! }
//! ```
//!
//! Trial files are CSV with a header row equal to the channel names and one
//! row per sample. Paths are resolved relative to the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EegRecording, Trial};
use crate::error::{CoreError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct ManifestTrial {
    file: String,
    label: usize,
    onset_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    sampling_rate_hz: f64,
    channel_names: Vec<String>,
    class_labels: Vec<String>,
    trials: Vec<ManifestTrial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<BTreeMap<String, String>>,
}

/// Load a recording from its JSON manifest. Trial order is preserved and the
/// result is validated against the recording invariants.
pub fn load_recording(manifest_path: &Path) -> Result<EegRecording> {
    let text =
        fs::read_to_string(manifest_path).map_err(|e| CoreError::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CoreError::Format(format!("manifest: {e}")))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut trials = Vec::with_capacity(manifest.trials.len());
    for (idx, entry) in manifest.trials.iter().enumerate() {
        let path = base.join(&entry.file);
        let samples = read_trial_csv(&path, &manifest.channel_names, idx)?;
        trials.push(Trial {
            samples,
            label: entry.label,
            onset_s: entry.onset_s,
        });
    }

    let rec = EegRecording {
        sampling_rate_hz: manifest.sampling_rate_hz,
        channel_names: manifest.channel_names,
        class_labels: manifest.class_labels,
        trials,
    };
    rec.validate()?;
    Ok(rec)
}

fn read_trial_csv(path: &Path, channel_names: &[String], trial_idx: usize) -> Result<Array2<f64>> {
    let file = fs::File::open(path).map_err(|e| CoreError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| CoreError::Format(format!("trial {trial_idx}: {e}")))?;
    if headers.len() != channel_names.len() {
        return Err(CoreError::Format(format!(
            "trial {trial_idx}: file has {} columns but channel_names lists {}",
            headers.len(),
            channel_names.len()
        )));
    }

    let n_channels = channel_names.len();
    let mut rows: Vec<f64> = Vec::new();
    let mut n_samples = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CoreError::Format(format!("trial {trial_idx}: {e}")))?;
        if record.len() != n_channels {
            return Err(CoreError::Format(format!(
                "trial {trial_idx}: row {row_idx} has {} columns, expected {n_channels}",
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CoreError::Format(format!(
                    "trial {trial_idx}: row {row_idx} value {field:?} is not a float"
                ))
            })?;
            if !v.is_finite() {
                return Err(CoreError::Format(format!(
                    "trial {trial_idx}: row {row_idx} contains non-finite sample"
                )));
            }
            rows.push(v);
        }
        n_samples += 1;
    }
    if n_samples < 2 {
        return Err(CoreError::Format(format!(
            "trial {trial_idx}: {n_samples} sample rows, need at least 2"
        )));
    }

    // CSV rows are time-major; the in-memory layout is channels x time
    // (row-major, so per-channel slices stay contiguous)
    let time_major = Array2::from_shape_vec((n_samples, n_channels), rows)
        .map_err(|e| CoreError::Format(format!("trial {trial_idx}: {e}")))?;
    Ok(Array2::from_shape_fn((n_channels, n_samples), |(c, t)| {
        time_major[(t, c)]
    }))
}

/// Write a recording as a manifest plus one CSV per trial under
/// `trials_dir_name` next to the manifest. Floats are written in shortest
/// round-trip form, so load-after-write reproduces values bitwise. The
/// optional provenance map goes into the manifest and, as a leading `#`
/// comment, into every trial CSV.
pub fn write_recording(
    rec: &EegRecording,
    manifest_path: &Path,
    trials_dir_name: &str,
    provenance: Option<&BTreeMap<String, String>>,
) -> Result<()> {
    rec.validate()?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let trials_dir = base.join(trials_dir_name);
    fs::create_dir_all(&trials_dir).map_err(|e| CoreError::io(&trials_dir, e))?;

    let comment = provenance.map(|p| {
        p.iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    });
    let mut entries = Vec::with_capacity(rec.trials.len());
    for (idx, trial) in rec.trials.iter().enumerate() {
        let rel = format!("{trials_dir_name}/trial_{idx:04}.csv");
        let path = base.join(&rel);
        write_trial_csv(&path, trial, &rec.channel_names, comment.as_deref())?;
        entries.push(ManifestTrial {
            file: rel,
            label: trial.label,
            onset_s: trial.onset_s,
        });
    }

    let manifest = Manifest {
        sampling_rate_hz: rec.sampling_rate_hz,
        channel_names: rec.channel_names.clone(),
        class_labels: rec.class_labels.clone(),
        trials: entries,
        provenance: provenance.cloned(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CoreError::Format(e.to_string()))?;
    fs::write(manifest_path, text).map_err(|e| CoreError::io(manifest_path, e))
}

fn write_trial_csv(
    path: &Path,
    trial: &Trial,
    channel_names: &[String],
    comment: Option<&str>,
) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| CoreError::io(path, e))?;
    if let Some(c) = comment {
        use std::io::Write;
        writeln!(file, "# {c}").map_err(|e| CoreError::io(path, e))?;
    }
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(channel_names)
        .map_err(|e| CoreError::Format(e.to_string()))?;
    for t in 0..trial.n_samples() {
        let row: Vec<String> = (0..trial.n_channels())
            .map(|c| format!("{}", trial.samples[(c, t)]))
            .collect();
        writer
            .write_record(&row)
            .map_err(|e| CoreError::Format(e.to_string()))?;
    }
    writer.flush().map_err(|e| CoreError::io(path, e))
}
