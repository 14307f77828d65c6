//! Dense row-major arrays, the value type flowing through graphs, points and traces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element type of an array.
///
/// Integer arrays are stored as `f64` holding exact integral values; every
/// integer this crate deals with (counts, years, indices) is far below 2^53.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dtype {
    #[serde(rename = "float64")]
    Float,
    #[serde(rename = "int64")]
    Int,
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dtype::Float => f.write_str("float64"),
            Dtype::Int => f.write_str("int64"),
        }
    }
}

pub fn shape_size(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Broadcast shape of two operands: equal shapes, or one side scalar.
pub fn broadcast_shapes(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    if a == b {
        Some(a.to_vec())
    } else if a.is_empty() {
        Some(b.to_vec())
    } else if b.is_empty() {
        Some(a.to_vec())
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
    dtype: Dtype,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>, dtype: Dtype) -> Result<Self> {
        if shape_size(&shape) != data.len() {
            return Err(Error::ShapeMismatch {
                context: "array construction".into(),
                expected: shape,
                got: vec![data.len()],
            });
        }
        if dtype == Dtype::Int && data.iter().any(|v| v.fract() != 0.0) {
            return Err(Error::invalid("integer array holds non-integral values"));
        }
        Ok(Array { shape, data, dtype })
    }

    pub fn scalar(v: f64) -> Self {
        Array {
            shape: vec![],
            data: vec![v],
            dtype: Dtype::Float,
        }
    }

    pub fn int_scalar(v: i64) -> Self {
        Array {
            shape: vec![],
            data: vec![v as f64],
            dtype: Dtype::Int,
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Array {
            shape: vec![data.len()],
            data,
            dtype: Dtype::Float,
        }
    }

    pub fn int_vector(data: &[i64]) -> Self {
        Array {
            shape: vec![data.len()],
            data: data.iter().map(|&v| v as f64).collect(),
            dtype: Dtype::Int,
        }
    }

    pub fn zeros(shape: &[usize], dtype: Dtype) -> Self {
        Array {
            shape: shape.to_vec(),
            data: vec![0.0; shape_size(shape)],
            dtype,
        }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        Array {
            shape: shape.to_vec(),
            data: vec![value; shape_size(shape)],
            dtype: Dtype::Float,
        }
    }

    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<f64>, dtype: Dtype) -> Self {
        debug_assert_eq!(shape_size(&shape), data.len());
        Array { shape, data, dtype }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.shape.is_empty()
    }

    /// The single element of a size-one array.
    pub fn item(&self) -> Option<f64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    /// Reinterpret with a new dtype; integral values are required for `Int`.
    pub fn with_dtype(mut self, dtype: Dtype) -> Result<Self> {
        if dtype == Dtype::Int && self.data.iter().any(|v| v.fract() != 0.0 || !v.is_finite()) {
            return Err(Error::invalid("cannot cast non-integral values to int64"));
        }
        self.dtype = dtype;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Array {
        Array {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
            dtype: Dtype::Float,
        }
    }
}

impl From<f64> for Array {
    fn from(v: f64) -> Self {
        Array::scalar(v)
    }
}

impl From<Vec<f64>> for Array {
    fn from(v: Vec<f64>) -> Self {
        Array::vector(v)
    }
}

/// Suffixes for the flattened components of a variable: `""` for scalars,
/// `"__i"` for vectors and `"__i_j"` for higher ranks, row-major.
pub fn component_suffixes(shape: &[usize]) -> Vec<String> {
    if shape.is_empty() {
        return vec![String::new()];
    }
    let n = shape_size(shape);
    let mut out = Vec::with_capacity(n);
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..n {
        let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        out.push(format!("__{}", parts.join("_")));
        for axis in (0..shape.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < shape[axis] {
                break;
            }
            idx[axis] = 0;
        }
    }
    out
}
