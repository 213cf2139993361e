//! Feature matrix CSV export/import.
//!
//! Header row is the feature names plus a trailing `label` column. An
//! optional leading `#` comment line can carry provenance; readers skip it.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::assemble::FeatureMatrix;
use crate::error::{CoreError, Result};

/// Write `fm` as CSV. `comment`, when given, is emitted first as a single
/// `# ...` line.
pub fn write_feature_csv(fm: &FeatureMatrix, path: &Path, comment: Option<&str>) -> Result<()> {
    fm.validate()?;
    let mut out = String::new();
    if let Some(c) = comment {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&fm.feature_names.join(","));
    out.push_str(",label\n");
    for (i, row) in fm.values.rows().into_iter().enumerate() {
        let mut line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        line.push(format!("{}", fm.labels[i]));
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| CoreError::io(path, e))
}

/// Read a feature CSV written by [`write_feature_csv`].
pub fn read_feature_csv(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Format(format!("{}: empty feature CSV", path.display())))?;
    let mut names: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    match names.pop() {
        Some(last) if last == "label" => {}
        _ => {
            return Err(CoreError::Format(format!(
                "{}: feature CSV must end with a label column",
                path.display()
            )))
        }
    }

    let mut rows: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(CoreError::Format(format!(
                "{}: row {i} has {} fields, expected {}",
                path.display(),
                fields.len(),
                names.len() + 1
            )));
        }
        for f in &fields[..names.len()] {
            let v: f64 = f
                .parse()
                .map_err(|_| CoreError::Format(format!("{}: row {i}: bad float {f:?}", path.display())))?;
            rows.push(v);
        }
        let label: usize = fields[names.len()].parse().map_err(|_| {
            CoreError::Format(format!("{}: row {i}: bad label", path.display()))
        })?;
        labels.push(label);
    }

    let values = Array2::from_shape_vec((labels.len(), names.len()), rows)
        .map_err(|e| CoreError::Format(e.to_string()))?;
    let fm = FeatureMatrix {
        values,
        feature_names: names,
        labels,
        norm_state: None,
    };
    fm.validate()?;
    Ok(fm)
}
