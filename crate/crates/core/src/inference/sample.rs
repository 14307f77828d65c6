use std::sync::Arc;

use crate::backends::{Backend, MemoryBackend, Trace};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::point::Point;
use crate::rng::chain_rng;
use crate::samplers::{Compound, StepMethod, StepStats};

/// Progress callback: `(chain, draws completed, total draws)`.
pub type Progress = Arc<dyn Fn(usize, usize, usize) + Send + Sync>;

const PROGRESS_EVERY: usize = 100;

#[derive(Clone)]
pub struct SampleConfig {
    /// Draws kept per chain after warm-up.
    pub draws: usize,
    /// Warm-up length; defaults to `min(500, draws / 2)`.
    pub tune: Option<usize>,
    pub chains: usize,
    pub seed: u64,
    /// Drop warm-up draws from the returned trace.
    pub discard_tuned: bool,
    /// Starting values; missing entries come from the test point.
    pub start: Option<Point>,
    pub progress: Option<Progress>,
}

impl SampleConfig {
    pub fn new(draws: usize, seed: u64) -> Self {
        SampleConfig {
            draws,
            tune: None,
            chains: 1,
            seed,
            discard_tuned: true,
            start: None,
            progress: None,
        }
    }

    pub fn tune(mut self, n: usize) -> Self {
        self.tune = Some(n);
        self
    }

    pub fn chains(mut self, n: usize) -> Self {
        self.chains = n;
        self
    }

    pub fn start(mut self, p: Point) -> Self {
        self.start = Some(p);
        self
    }

    pub fn discard_tuned(mut self, yes: bool) -> Self {
        self.discard_tuned = yes;
        self
    }

    pub fn progress(mut self, f: impl Fn(usize, usize, usize) + Send + Sync + 'static) -> Self {
        self.progress = Some(Arc::new(f));
        self
    }

    pub fn warmup(&self) -> usize {
        self.tune.unwrap_or_else(|| (self.draws / 2).min(500))
    }
}

/// A finished run: the trace plus per-iteration sampler diagnostics.
pub struct SampleRun {
    pub trace: Trace,
    /// `stats[chain][iteration]`, warm-up iterations first.
    pub stats: Vec<Vec<Vec<StepStats>>>,
    pub warmup: usize,
}

impl SampleRun {
    /// Diagnostics of post-warm-up iterations of one chain.
    pub fn kept_stats(&self, chain: usize) -> &[Vec<StepStats>] {
        &self.stats[chain][self.warmup..]
    }
}

struct ChainOutput {
    points: Vec<Point>,
    stats: Vec<Vec<StepStats>>,
}

fn run_chain(
    model: &Model,
    mut step: Compound,
    config: &SampleConfig,
    chain: usize,
) -> Result<ChainOutput> {
    let warmup = config.warmup();
    let total = warmup + config.draws;
    let mut rng = chain_rng(config.seed, chain);
    let mut point = model.complete_point(config.start.as_ref().unwrap_or(&Point::new()));
    step.setup(model)?;
    let keep_from = if config.discard_tuned { warmup } else { 0 };
    let mut points = Vec::with_capacity(total - keep_from);
    let mut stats = Vec::with_capacity(total);
    for i in 0..total {
        let mut s = Vec::new();
        step.step(model, &mut point, &mut rng, i < warmup, &mut s)
            .map_err(|e| Error::Sampling {
                chain,
                draw: i,
                source: Box::new(e),
            })?;
        stats.push(s);
        if i >= keep_from {
            points.push(model.augment(&point).map_err(|e| Error::Sampling {
                chain,
                draw: i,
                source: Box::new(e),
            })?);
        }
        if let Some(cb) = &config.progress {
            if (i + 1) % PROGRESS_EVERY == 0 || i + 1 == total {
                cb(chain, i + 1, total);
            }
        }
    }
    Ok(ChainOutput { points, stats })
}

/// Run every chain and record its points into `backend` in chain order.
pub fn sample_run(
    model: &Model,
    steps: Vec<Box<dyn StepMethod>>,
    config: &SampleConfig,
    backend: &mut dyn Backend,
) -> Result<SampleRun> {
    if config.draws == 0 || config.chains == 0 {
        return Err(Error::invalid("draws and chains must be at least 1"));
    }
    let steps = if steps.is_empty() {
        crate::samplers::default_steps(model)
    } else {
        steps
    };
    let compound = Compound::new(steps);
    // fail fast on coverage errors before spawning chains
    compound.clone().setup(model)?;

    let outputs: Vec<Result<ChainOutput>> = if config.chains == 1 {
        vec![run_chain(model, compound, config, 0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..config.chains)
                .map(|c| {
                    let step = compound.clone();
                    s.spawn(move || run_chain(model, step, config, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling thread panicked"))
                .collect()
        })
    };

    backend.setup(&model.trace_specs(), config.chains)?;
    let mut stats = Vec::with_capacity(config.chains);
    for (chain, out) in outputs.into_iter().enumerate() {
        let out = out?;
        for p in &out.points {
            backend.record(chain, p)?;
        }
        stats.push(out.stats);
    }
    Ok(SampleRun {
        trace: backend.finalize()?,
        stats,
        warmup: config.warmup(),
    })
}

/// Sample into memory.
pub fn sample(
    model: &Model,
    steps: Vec<Box<dyn StepMethod>>,
    config: &SampleConfig,
) -> Result<Trace> {
    Ok(sample_run(model, steps, config, &mut MemoryBackend::new())?.trace)
}

/// Sample into an arbitrary backend.
pub fn sample_into(
    model: &Model,
    steps: Vec<Box<dyn StepMethod>>,
    config: &SampleConfig,
    backend: &mut dyn Backend,
) -> Result<Trace> {
    Ok(sample_run(model, steps, config, backend)?.trace)
}
