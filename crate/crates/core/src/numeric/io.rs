//! JSON matrix files: `{"dim": N, "re": [[...]], "im": [[...]]}` with `im` optional.
//!
//! Rectangular blocks (Lanczos basis dumps) use the same shape without `dim`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let grid = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.rows()).map(|i| m.row(i).iter().map(f).collect()).collect()
        };
        Self {
            dim: m.is_square().then(|| m.rows()),
            re: grid(|z| z.re),
            im: Some(grid(|z| z.im)),
        }
    }
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(Error::Parse("matrix has no rows".into()));
        }
        let cols = self.re[0].len();
        if cols == 0 {
            return Err(Error::Parse("matrix has no columns".into()));
        }
        if let Some(d) = self.dim {
            if d != rows || d != cols {
                return Err(Error::Parse(format!("dim {d} does not match a {rows}x{cols} \"re\" array")));
            }
        }
        if let Some((i, r)) = self.re.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::Parse(format!("row {i} of \"re\" has {} entries, expected {cols}", r.len())));
        }
        let mut data: Vec<C64> = self.re.iter().flatten().map(|&x| C64::new(x, 0.0)).collect();
        if let Some(im) = &self.im {
            if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                return Err(Error::Parse("\"im\" shape differs from \"re\"".into()));
            }
            for (z, &y) in data.iter_mut().zip(im.iter().flatten()) {
                z.im = y;
            }
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix contains a non-finite entry".into()));
        }
        ComplexMatrix::from_vec(rows, cols, data)
    }
}

pub fn parse_matrix(json: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_matrix()
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from(m)).expect("matrix serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_only_file_parses() {
        let m = parse_matrix(r#"{"dim": 2, "re": [[0, 1], [1, 0]]}"#).unwrap();
        assert_eq!(m, crate::numeric::presets::pauli_x());
    }

    #[test]
    fn round_trip_keeps_values() {
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![C64::new(1.0, 0.0), C64::new(0.25, -1.5), C64::new(0.25, 1.5), C64::new(-3.0, 0.0)],
        )
        .unwrap();
        assert_eq!(parse_matrix(&matrix_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn malformed_files_are_rejected() {
        for bad in [
            r#"{"dim": 3, "re": [[0, 1], [1, 0]]}"#,
            r#"{"dim": 2, "re": [[0, 1], [1]]}"#,
            r#"{"dim": 2, "re": [[0, 1], [1, 0]], "im": [[0]]}"#,
            r#"{"re": []}"#,
            r#"{"dim": 2}"#,
            "not json",
        ] {
            assert!(matches!(parse_matrix(bad), Err(Error::Parse(_))), "{bad}");
        }
    }
}
