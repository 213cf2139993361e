//! Serde helpers for `ndarray` types.
//!
//! Matrices serialize as `{ "rows": r, "cols": c, "data": [row-major f64] }`
//! so every on-disk format (CSP models, normalization parameters, network
//! checkpoints, MDP fixtures) shares one stable layout.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Array2<f64>> for MatJson {
    fn from(a: &Array2<f64>) -> Self {
        MatJson {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }
}

impl MatJson {
    pub fn to_array(&self) -> Result<Array2<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(CoreError::Format(format!(
                "matrix payload has {} values, expected {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .map_err(|e| CoreError::Format(e.to_string()))
    }
}

/// `#[serde(with = "crate::mat::array2")]` for `Array2<f64>` fields.
pub mod array2 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &Array2<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatJson::from(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Array2<f64>, D::Error> {
        let m = MatJson::deserialize(d)?;
        m.to_array().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::mat::array1")]` for `Array1<f64>` fields.
pub mod array1 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &Array1<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        a.to_vec().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Array1<f64>, D::Error> {
        Ok(Array1::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// Convert an `ndarray` matrix to `nalgebra` for factorizations.
pub fn to_na(a: &Array2<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_iterator(a.nrows(), a.ncols(), a.iter().copied())
}

/// Convert an `nalgebra` matrix back to `ndarray`.
pub fn from_na(m: &nalgebra::DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}
