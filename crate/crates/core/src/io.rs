//! JSON helpers for complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::densesim::CMatrix;
use crate::error::{Error, Result};

/// `{"re": [[..]], "im": [[..]]}`; `im` may be omitted for real matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self {
            re: rows(|c| c.re),
            im: rows(|c| c.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let r = self.re.len();
        let c = self.re.first().map_or(0, Vec::len);
        if r == 0 || self.re.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged or empty real part".into()));
        }
        if !self.im.is_empty() && (self.im.len() != r || self.im.iter().any(|row| row.len() != c)) {
            return Err(Error::Parse("imaginary part does not match the real part".into()));
        }
        Ok(DMatrix::from_fn(r, c, |i, j| {
            let im = self.im.get(i).map_or(0.0, |row| row[j]);
            Complex64::new(self.re[i][j], im)
        }))
    }
}

/// `#[serde(with = "crate::io::cmatrix")]` for a single matrix.
pub mod cmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        MatrixJson::deserialize(d)?.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::io::cmatrix_vec")]` for a list of matrices.
pub mod cmatrix_vec {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMatrix>, D::Error> {
        Vec::<MatrixJson>::deserialize(d)?
            .iter()
            .map(|m| m.to_matrix().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_json_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64 - 0.5));
        let s = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        let real: MatrixJson = serde_json::from_str(r#"{"re": [[1, 0], [0, 1]]}"#).unwrap();
        assert_eq!(real.to_matrix().unwrap(), CMatrix::identity(2, 2));
        let bad: MatrixJson = serde_json::from_str(r#"{"re": [[1, 0], [0]]}"#).unwrap();
        assert!(bad.to_matrix().is_err());
    }
}
