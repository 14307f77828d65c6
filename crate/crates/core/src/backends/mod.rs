//! Trace storage.
//!
//! [`MemoryBackend`] keeps draws in memory. [`TextBackend`] writes a
//! directory that [`load`] reads back exactly:
//!
//! ```text
//! <dir>/meta.json     {"version":1,"vars":[{"name","shape","dtype"}],"chains":N,"draws":D}
//! <dir>/chain-<k>.csv header of flattened names (alpha, beta__0, beta__1, ...),
//!                     one row per draw
//! ```
//!
//! Floats are written in shortest round-trip form, so reloading is exact.

mod text;
mod trace;

use serde::{Deserialize, Serialize};

use crate::array::{component_suffixes, shape_size, Dtype};
use crate::error::Result;
use crate::point::Point;

pub use text::{load, save, TextBackend};
pub use trace::Trace;

/// Name, shape and dtype of a traced variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: Dtype,
}

impl VarSpec {
    pub fn new(name: &str, shape: &[usize], dtype: Dtype) -> Self {
        VarSpec {
            name: name.to_string(),
            shape: shape.to_vec(),
            dtype,
        }
    }

    pub fn size(&self) -> usize {
        shape_size(&self.shape)
    }

    /// Flattened component names, row-major.
    pub fn component_names(&self) -> Vec<String> {
        component_suffixes(&self.shape)
            .into_iter()
            .map(|s| format!("{}{s}", self.name))
            .collect()
    }
}

/// Destination for sampled points.
///
/// `record` calls for one chain arrive in draw order; calls for different
/// chains never interleave within a chain.
pub trait Backend {
    fn setup(&mut self, vars: &[VarSpec], chains: usize) -> Result<()>;
    fn record(&mut self, chain: usize, point: &Point) -> Result<()>;
    /// Flush storage and return the complete trace.
    fn finalize(&mut self) -> Result<Trace>;
}

/// In-memory storage.
#[derive(Default)]
pub struct MemoryBackend {
    trace: Option<Trace>,
}

impl MemoryBackend {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Backend for MemoryBackend {
    fn setup(&mut self, vars: &[VarSpec], chains: usize) -> Result<()> {
        self.trace = Some(Trace::empty(vars.to_vec(), chains));
        Ok(())
    }

    fn record(&mut self, chain: usize, point: &Point) -> Result<()> {
        match &mut self.trace {
            Some(t) => t.push(chain, point),
            None => Err(crate::error::Error::invalid("backend used before setup")),
        }
    }

    fn finalize(&mut self) -> Result<Trace> {
        self.trace
            .take()
            .ok_or_else(|| crate::error::Error::invalid("backend used before setup"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Array;

    #[test]
    fn memory_round_trip_is_exact() {
        let specs = vec![
            VarSpec::new("alpha", &[], Dtype::Float),
            VarSpec::new("beta", &[2], Dtype::Float),
        ];
        let mut b = MemoryBackend::new();
        b.setup(&specs, 1).unwrap();
        let v = 0.1 + 0.2;
        let p = Point::new()
            .with("alpha", Array::scalar(v))
            .with("beta", Array::vector(vec![1.0 / 3.0, -2.5e-300]));
        b.record(0, &p).unwrap();
        let t = b.finalize().unwrap();
        assert_eq!(t.get("alpha").unwrap().data().last().copied(), Some(v));
        assert_eq!(t.point(-1).unwrap(), p);
    }

    #[test]
    fn missing_name_is_an_error() {
        let mut b = MemoryBackend::new();
        b.setup(&[VarSpec::new("alpha", &[], Dtype::Float)], 1).unwrap();
        assert!(b.record(0, &Point::new()).is_err());
    }
}
