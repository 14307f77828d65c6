use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::Dtype;
use crate::error::{Error, Result};
use crate::point::Point;

use super::{Backend, Trace, VarSpec};

const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Meta {
    version: u32,
    vars: Vec<VarSpec>,
    chains: usize,
    draws: usize,
}

fn chain_path(dir: &Path, chain: usize) -> PathBuf {
    dir.join(format!("chain-{chain}.csv"))
}

fn format_value(v: f64, dtype: Dtype) -> String {
    match dtype {
        Dtype::Int => format!("{}", v as i64),
        // Debug prints the shortest string that parses back to the same bits.
        Dtype::Float => format!("{v:?}"),
    }
}

fn header(vars: &[VarSpec]) -> Vec<String> {
    vars.iter().flat_map(VarSpec::component_names).collect()
}

/// Directory-of-CSV backend. Rows are buffered in memory and written by
/// `finalize`.
pub struct TextBackend {
    dir: PathBuf,
    inner: super::MemoryBackend,
}

impl TextBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TextBackend {
            dir: dir.into(),
            inner: super::MemoryBackend::new(),
        }
    }
}

impl Backend for TextBackend {
    fn setup(&mut self, vars: &[VarSpec], chains: usize) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        self.inner.setup(vars, chains)
    }

    fn record(&mut self, chain: usize, point: &Point) -> Result<()> {
        self.inner.record(chain, point)
    }

    fn finalize(&mut self) -> Result<Trace> {
        let trace = self.inner.finalize()?;
        save(&trace, &self.dir)?;
        Ok(trace)
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::CorruptData(format!("{other:?}")),
    }
}

/// Write `trace` to `dir` in the directory format.
pub fn save(trace: &Trace, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let draws = (0..trace.nchains()).map(|c| trace.chain_len(c)).max().unwrap_or(0);
    let meta = Meta {
        version: VERSION,
        vars: trace.vars().to_vec(),
        chains: trace.nchains(),
        draws,
    };
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::CorruptMeta(e.to_string()))?;
    fs::write(dir.join("meta.json"), json)?;

    let names = header(trace.vars());
    for chain in 0..trace.nchains() {
        let mut w = csv::Writer::from_path(chain_path(dir, chain)).map_err(csv_err)?;
        w.write_record(&names).map_err(csv_err)?;
        let bufs: Vec<&[f64]> = trace
            .vars()
            .iter()
            .map(|v| trace.raw(&v.name, chain))
            .collect::<Result<_>>()?;
        for k in 0..trace.chain_len(chain) {
            let mut row = Vec::with_capacity(names.len());
            for (spec, buf) in trace.vars().iter().zip(&bufs) {
                let s = spec.size();
                row.extend(buf[k * s..(k + 1) * s].iter().map(|&v| format_value(v, spec.dtype)));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Read a trace directory written by [`save`] or [`TextBackend`].
pub fn load(dir: impl AsRef<Path>) -> Result<Trace> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path)
        .map_err(|e| Error::CorruptMeta(format!("{}: {e}", meta_path.display())))?;
    let meta: Meta =
        serde_json::from_str(&text).map_err(|e| Error::CorruptMeta(e.to_string()))?;
    if meta.version != VERSION {
        return Err(Error::CorruptMeta(format!("unsupported version {}", meta.version)));
    }
    let expected = header(&meta.vars);

    let mut chains = Vec::with_capacity(meta.chains);
    for chain in 0..meta.chains {
        let path = chain_path(dir, chain);
        if !path.exists() {
            return Err(Error::MissingChainFile(path.display().to_string()));
        }
        let mut r = csv::Reader::from_path(&path).map_err(csv_err)?;
        let got: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if got != expected {
            return Err(Error::CorruptData(format!(
                "{}: header does not match metadata",
                path.display()
            )));
        }
        let mut bufs: Vec<Vec<f64>> = vec![Vec::new(); meta.vars.len()];
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let mut fields = rec.iter();
            for (spec, buf) in meta.vars.iter().zip(bufs.iter_mut()) {
                for _ in 0..spec.size() {
                    let f = fields
                        .next()
                        .ok_or_else(|| Error::CorruptData("short row".into()))?;
                    let v: f64 = f
                        .parse()
                        .map_err(|_| Error::CorruptData(format!("bad number `{f}`")))?;
                    buf.push(v);
                }
            }
        }
        chains.push(bufs);
    }
    Trace::from_buffers(meta.vars, chains)
}
