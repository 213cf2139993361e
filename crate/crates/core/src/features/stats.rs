//! Statistical moment features.

use crate::error::{CoreError, Result};

fn mean_and_sample_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Sample excess kurtosis:
/// `n(n+1)/((n-1)(n-2)(n-3)) * sum(((x - mean)/s)^4) - 3(n-1)^2/((n-2)(n-3))`
/// with `s` the (n-1)-denominator sample standard deviation.
pub fn kurtosis(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n <= 3 {
        return Err(CoreError::Argument(format!(
            "kurtosis needs at least 4 samples, got {n}"
        )));
    }
    let (mean, s) = mean_and_sample_std(x);
    if !(s > 0.0) {
        return Err(CoreError::Argument(
            "kurtosis undefined for zero-variance input".into(),
        ));
    }
    let nf = n as f64;
    let sum4: f64 = x.iter().map(|v| ((v - mean) / s).powi(4)).sum();
    Ok(nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * sum4
        - 3.0 * (nf - 1.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)))
}

/// Sample skewness: `n/((n-1)(n-2)) * sum(((x - mean)/s)^3)`.
pub fn skewness(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n <= 2 {
        return Err(CoreError::Argument(format!(
            "skewness needs at least 3 samples, got {n}"
        )));
    }
    let (mean, s) = mean_and_sample_std(x);
    if !(s > 0.0) {
        return Err(CoreError::Argument(
            "skewness undefined for zero-variance input".into(),
        ));
    }
    let nf = n as f64;
    let sum3: f64 = x.iter().map(|v| ((v - mean) / s).powi(3)).sum();
    Ok(nf / ((nf - 1.0) * (nf - 2.0)) * sum3)
}

/// Root mean square: `sqrt(sum(x^2) / n)`.
pub fn rms(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(CoreError::Argument("rms of empty vector".into()));
    }
    Ok((x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt())
}

/// Sum of absolute element-wise differences: `sum(|x_i - y_i|)`.
pub fn abs_diff(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || x.len() != y.len() {
        return Err(CoreError::Argument(format!(
            "abs_diff needs equal nonempty lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum())
}
