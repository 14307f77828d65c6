use crate::array::{Array, Dtype};
use crate::error::{Error, Result};
use crate::point::Point;

use super::VarSpec;

/// Sampled values for every traced variable, per chain.
///
/// Storage is one flat row-major buffer per (chain, variable): draw `i` of a
/// variable of size `s` occupies `[i*s, (i+1)*s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    vars: Vec<VarSpec>,
    chains: Vec<Vec<Vec<f64>>>,
}

impl Trace {
    pub fn empty(vars: Vec<VarSpec>, chains: usize) -> Self {
        let n = vars.len();
        Trace {
            vars,
            chains: vec![vec![Vec::new(); n]; chains],
        }
    }

    /// Build from raw per-chain buffers, checking their lengths agree.
    pub fn from_buffers(vars: Vec<VarSpec>, chains: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        for bufs in &chains {
            if bufs.len() != vars.len() {
                return Err(Error::CorruptData("variable count differs from metadata".into()));
            }
            let mut draws = None;
            for (spec, buf) in vars.iter().zip(bufs) {
                let s = spec.size().max(1);
                if buf.len() % s != 0 {
                    return Err(Error::CorruptData(format!("ragged buffer for `{}`", spec.name)));
                }
                let d = buf.len() / s;
                if *draws.get_or_insert(d) != d {
                    return Err(Error::CorruptData("variables have different draw counts".into()));
                }
            }
        }
        Ok(Trace { vars, chains })
    }

    pub(crate) fn push(&mut self, chain: usize, point: &Point) -> Result<()> {
        let bufs = self
            .chains
            .get_mut(chain)
            .ok_or_else(|| Error::invalid(format!("chain {chain} out of range")))?;
        // validate before touching any buffer so a failed push leaves no partial row
        for spec in &self.vars {
            let v = point.require(&spec.name)?;
            if v.len() != spec.size() {
                return Err(Error::ShapeMismatch {
                    context: format!("trace record of `{}`", spec.name),
                    expected: spec.shape.clone(),
                    got: v.shape().to_vec(),
                });
            }
        }
        for (spec, buf) in self.vars.iter().zip(bufs.iter_mut()) {
            buf.extend_from_slice(point.require(&spec.name)?.data());
        }
        Ok(())
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn spec(&self, name: &str) -> Result<&VarSpec> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn nchains(&self) -> usize {
        self.chains.len()
    }

    pub fn chain_len(&self, chain: usize) -> usize {
        match (self.chains.get(chain), self.vars.first()) {
            (Some(bufs), Some(spec)) => bufs[0].len() / spec.size().max(1),
            _ => 0,
        }
    }

    /// Total number of draws across chains.
    pub fn len(&self) -> usize {
        (0..self.nchains()).map(|c| self.chain_len(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Raw flat buffer of one variable in one chain.
    pub fn raw(&self, name: &str, chain: usize) -> Result<&[f64]> {
        let i = self.index_of(name)?;
        self.chains
            .get(chain)
            .map(|b| b[i].as_slice())
            .ok_or_else(|| Error::invalid(format!("chain {chain} out of range")))
    }

    /// All draws of `name`, chains concatenated, shape `(total, *shape)`.
    pub fn get(&self, name: &str) -> Result<Array> {
        let i = self.index_of(name)?;
        let spec = &self.vars[i];
        let data: Vec<f64> = self.chains.iter().flat_map(|b| b[i].iter().copied()).collect();
        let mut shape = vec![self.len()];
        shape.extend_from_slice(&spec.shape);
        Array::new(shape, data, spec.dtype)
    }

    /// Draws of `name` from a single chain, shape `(draws, *shape)`.
    pub fn get_chain(&self, name: &str, chain: usize) -> Result<Array> {
        let spec = self.spec(name)?;
        let data = self.raw(name, chain)?.to_vec();
        let mut shape = vec![self.chain_len(chain)];
        shape.extend_from_slice(&spec.shape);
        Array::new(shape, data, spec.dtype)
    }

    /// One flattened component of `name` across all chains.
    pub fn component(&self, name: &str, element: usize) -> Result<Vec<f64>> {
        let i = self.index_of(name)?;
        let s = self.vars[i].size();
        if element >= s {
            return Err(Error::invalid(format!("component {element} of `{name}` out of range")));
        }
        Ok(self
            .chains
            .iter()
            .flat_map(|b| b[i].iter().skip(element).step_by(s).copied())
            .collect())
    }

    /// Draw `index` of the last chain; negative values count from its end.
    pub fn point(&self, index: isize) -> Result<Point> {
        let chain = self
            .nchains()
            .checked_sub(1)
            .ok_or_else(|| Error::invalid("trace has no chains"))?;
        self.chain_point(chain, index)
    }

    pub fn chain_point(&self, chain: usize, index: isize) -> Result<Point> {
        let n = self.chain_len(chain) as isize;
        let k = if index < 0 { n + index } else { index };
        if k < 0 || k >= n {
            return Err(Error::invalid(format!("draw {index} out of range for {n} draws")));
        }
        let k = k as usize;
        let bufs = &self.chains[chain];
        let mut p = Point::new();
        for (spec, buf) in self.vars.iter().zip(bufs) {
            let s = spec.size();
            let data = buf[k * s..(k + 1) * s].to_vec();
            p.insert(spec.name.clone(), Array::new(spec.shape.clone(), data, spec.dtype)?);
        }
        Ok(p)
    }

    /// Whether `name` holds integer values.
    pub fn is_int(&self, name: &str) -> Result<bool> {
        Ok(self.spec(name)?.dtype == Dtype::Int)
    }
}
