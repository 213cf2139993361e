//! Feature extraction: spectral estimation, statistical moments, one-vs-rest
//! CSP, feature assembly, normalization, and a linear baseline classifier.

mod assemble;
mod baseline;
mod csp;
mod io;
mod normalize;
mod stats;
mod welch;

pub use assemble::{assemble_features, feature_names, trial_feature_row, BandPair, FeatureMatrix};
pub use baseline::{predict, train_linear_baseline, LinearModel};
pub use csp::{csp_fit_ovr, csp_transform, CspModel};
pub use io::{read_feature_csv, write_feature_csv};
pub use normalize::{normalize_apply, normalize_fit, NormMethod, NormalizationParams};
pub use stats::{abs_diff, kurtosis, rms, skewness};
pub use welch::{band_power, hann_window, welch_psd, Averaging, PsdEstimate, WelchConfig};
