//! JSON envelopes for matrices and vectors, and the deterministic writer.
//!
//! Matrices travel as `{"rows": n, "cols": m, "data": [[re, im], ...]}` in
//! row-major order; vectors as a bare `[[re, im], ...]` list.

use std::io;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::Formatter;

use super::{ComplexMatrix, ComplexVector};
use crate::error::{PtError, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(PtError::Parse(format!(
                "matrix envelope declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(PtError::NonFinite);
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            Complex64::new(re, im)
        }))
    }
}

pub fn vector_to_pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_vector(pairs: &[[f64; 2]]) -> Result<ComplexVector> {
    if pairs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(PtError::NonFinite);
    }
    Ok(ComplexVector::from_iterator(
        pairs.len(),
        pairs.iter().map(|[re, im]| Complex64::new(*re, *im)),
    ))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let env: MatrixJson = serde_json::from_str(text).map_err(|e| PtError::Parse(e.to_string()))?;
    env.to_matrix()
}

/// `#[serde(with = "matrix_serde")]` adapter for `ComplexMatrix` fields.
pub mod matrix_serde {
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &ComplexMatrix,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ComplexMatrix, D::Error> {
        let env = MatrixJson::deserialize(d)?;
        env.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "vector_serde")]` adapter for `ComplexVector` fields.
pub mod vector_serde {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &ComplexVector,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        vector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ComplexVector, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        pairs_to_vector(&pairs).map_err(serde::de::Error::custom)
    }
}

/// Writes every float with 17 significant digits in exponent notation.
#[derive(Debug, Default, Clone, Copy)]
pub struct SignificantDigitsFormatter;

impl Formatter for SignificantDigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize with stable field order and fixed 17-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigitsFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| PtError::Parse(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| PtError::Parse(e.to_string()))
}
