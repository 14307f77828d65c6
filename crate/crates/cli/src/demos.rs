//! The bundled demo models and their fitting recipes.

use std::fmt;
use std::path::{Path, PathBuf};

use miniprob::backends::save;
use miniprob::datasets::{self, Disasters, LinearData, MISSING};
use miniprob::glm::{self, Family, Table};
use miniprob::inference::{
    find_map, sample_run, scaling_from_point, MapMethod, MapOptions, SampleConfig,
};
use miniprob::samplers::{Metropolis, Nuts, NutsOptions, StepMethod};
use miniprob::stats::{summary_text, traceplot_data, write_plot_data};
use miniprob::{Array, Distribution, Expr, MemoryBackend, Model, ModelBuilder, Point, Trace};

use crate::data::{read_series, read_table};
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Demo {
    Linear,
    Sp500,
    Disasters,
    GlmLinear,
    GlmLogistic,
}

impl Demo {
    pub const ALL: [Demo; 5] = [
        Demo::Linear,
        Demo::Sp500,
        Demo::Disasters,
        Demo::GlmLinear,
        Demo::GlmLogistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Demo::Linear => "linear",
            Demo::Sp500 => "sp500",
            Demo::Disasters => "disasters",
            Demo::GlmLinear => "glm_linear",
            Demo::GlmLogistic => "glm_logistic",
        }
    }

    pub fn default_draws(self) -> usize {
        match self {
            Demo::Linear | Demo::Sp500 | Demo::GlmLinear => 2000,
            Demo::Disasters => 10000,
            Demo::GlmLogistic => 5000,
        }
    }
}

impl fmt::Display for Demo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// models

/// `Y ~ N(α + β₀X1 + β₁X2, σ)` with weak priors.
pub fn linear_model(data: &LinearData) -> miniprob::Result<Model> {
    let mut b = ModelBuilder::new();
    let alpha = b.add_free("alpha", Distribution::normal(0.0, 10.0), &[], None)?;
    let beta = b.add_free("beta", Distribution::normal(0.0, 10.0), &[2], None)?;
    let sigma = b.add_free("sigma", Distribution::half_normal(1.0), &[], None)?;
    let x1 = Expr::constant(Array::vector(data.x1.clone()));
    let x2 = Expr::constant(Array::vector(data.x2.clone()));
    let mu = alpha + beta.index(0) * x1 + beta.index(1) * x2;
    b.add_observed("Y_obs", Distribution::normal(mu, sigma), Array::vector(data.y.clone()), None)?;
    b.finalize()
}

/// Stochastic volatility: a Gaussian random walk on log volatility with
/// Student-t returns.
pub fn sp500_model(returns: &[f64]) -> miniprob::Result<Model> {
    let n = returns.len();
    let mut b = ModelBuilder::new();
    let nu = b.add_free("nu", Distribution::exponential(0.1), &[], Some(Array::scalar(0.1)))?;
    let sigma = b.add_free("sigma", Distribution::exponential(50.0), &[], Some(Array::scalar(0.1)))?;
    let s = b.add_free("s", Distribution::gaussian_random_walk(sigma.powf(-2.0)), &[n], None)?;
    let vol = b.add_deterministic("volatility_process", s.mul(&Expr::scalar(-2.0)).exp())?;
    let lam = Expr::scalar(1.0).div(&vol);
    b.add_observed("r", Distribution::student_t(nu, 0.0, lam), Array::vector(returns.to_vec()), None)?;
    b.finalize()
}

/// Poisson counts whose rate switches once, with missing counts imputed.
pub fn disasters_model(d: &Disasters) -> miniprob::Result<Model> {
    let lo = *d.years.first().ok_or_else(|| miniprob::Error::InvalidArgument("no years".into()))?;
    let hi = *d.years.last().unwrap();
    let mut b = ModelBuilder::new();
    let switchpoint = b.add_free(
        "switchpoint",
        Distribution::discrete_uniform(lo, hi)?,
        &[],
        Some(Array::int_scalar(lo.max(hi.min(1900)))),
    )?;
    let early = b.add_free("early_rate", Distribution::exponential(1.0), &[], None)?;
    let late = b.add_free("late_rate", Distribution::exponential(1.0), &[], None)?;
    let years = Expr::constant(Array::vector(d.years.iter().map(|&y| y as f64).collect()));
    let rate = Expr::switch(&switchpoint.ge(&years), &early, &late)?;
    // masked entries need an in-support placeholder
    let counts: Vec<i64> = d
        .counts
        .iter()
        .zip(&d.mask)
        .map(|(&c, &m)| if m { 0 } else { c })
        .collect();
    b.add_observed("disasters", Distribution::poisson(rate), Array::int_vector(&counts), Some(&d.mask))?;
    b.finalize()
}

/// The linear demo's data as a `x1, x2, y` table.
pub fn linear_table(data: &LinearData) -> Table {
    Table::new(vec![
        ("x1".into(), data.x1.clone()),
        ("x2".into(), data.x2.clone()),
        ("y".into(), data.y.clone()),
    ])
    .expect("columns share a length")
}

/// Replace `y` with the indicator `y > 0`.
pub fn binarize(table: &Table) -> miniprob::Result<Table> {
    let cols = table
        .names()
        .map(|n| {
            let c = table.column(n)?;
            let c = if n == "y" {
                c.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect()
            } else {
                c.to_vec()
            };
            Ok((n.to_string(), c))
        })
        .collect::<miniprob::Result<Vec<_>>>()?;
    Table::new(cols)
}

pub const GLM_FORMULA: &str = "y ~ x1 + x2";

pub fn glm_model(table: &Table, family: Family) -> miniprob::Result<Model> {
    glm::build_model(&glm::parse_formula(GLM_FORMULA)?, table, family)
}

/// Counts with the missing-value sentinel translated to a mask.
pub fn disasters_from_counts(counts: Vec<i64>, first_year: i64) -> Disasters {
    Disasters {
        years: (0..counts.len() as i64).map(|i| first_year + i).collect(),
        mask: counts.iter().map(|&c| c == MISSING).collect(),
        counts,
    }
}

// recipes

#[derive(Clone, Debug)]
pub struct DemoOptions {
    pub draws: Option<usize>,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub progress: bool,
}

impl DemoOptions {
    pub fn new(seed: u64) -> Self {
        DemoOptions {
            draws: None,
            seed,
            data: None,
            progress: false,
        }
    }

    pub fn draws(mut self, n: usize) -> Self {
        self.draws = Some(n);
        self
    }

    pub fn data(mut self, path: impl Into<PathBuf>) -> Self {
        self.data = Some(path.into());
        self
    }
}

/// A fitted demo.
pub struct DemoRun {
    pub demo: Demo,
    pub model: Model,
    pub trace: Trace,
    /// Variables reported in the summary and plot data.
    pub report_vars: Vec<String>,
    /// The optimum that seeded sampling, when the recipe has one.
    pub map: Option<Point>,
}

fn config(draws: usize, seed: u64, progress: bool, label: &'static str) -> SampleConfig {
    let c = SampleConfig::new(draws, seed);
    if progress {
        c.progress(move |chain, done, total| {
            if done % (total / 10).max(100) == 0 || done == total {
                eprintln!("{label} chain {chain}: {done}/{total}");
            }
        })
    } else {
        c
    }
}

fn run(model: &Model, steps: Vec<Box<dyn StepMethod>>, cfg: &SampleConfig) -> miniprob::Result<Trace> {
    Ok(sample_run(model, steps, cfg, &mut MemoryBackend::new())?.trace)
}

fn linear_data(opts: &DemoOptions) -> CliResult<LinearData> {
    match &opts.data {
        None => Ok(datasets::simulate_linear(opts.seed)),
        Some(path) => {
            let t = read_table(path)?;
            Ok(LinearData {
                x1: t.column("x1")?.to_vec(),
                x2: t.column("x2")?.to_vec(),
                y: t.column("y")?.to_vec(),
            })
        }
    }
}

fn glm_table(opts: &DemoOptions) -> CliResult<Table> {
    match &opts.data {
        None => Ok(linear_table(&datasets::simulate_linear(opts.seed))),
        Some(path) => read_table(path),
    }
}

fn disasters_data(opts: &DemoOptions) -> CliResult<Disasters> {
    match &opts.data {
        None => Ok(datasets::disasters()),
        Some(path) => {
            let values = read_series(path)?;
            let counts = values
                .iter()
                .map(|&v| {
                    if v.fract() == 0.0 && (v >= 0.0 || v == MISSING as f64) {
                        Ok(v as i64)
                    } else {
                        Err(CliError::Data {
                            path: path.clone(),
                            msg: format!("`{v}` is not a count"),
                        })
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(disasters_from_counts(counts, datasets::FIRST_YEAR))
        }
    }
}

/// Build the demo's model and run its full fitting workflow.
pub fn run_demo(demo: Demo, opts: &DemoOptions) -> CliResult<DemoRun> {
    let draws = opts.draws.unwrap_or(demo.default_draws());
    let (seed, progress) = (opts.seed, opts.progress);
    let scalar_vars = |m: &Model| -> Vec<String> {
        m.trace_specs()
            .into_iter()
            .filter(|s| s.size() <= 8)
            .map(|s| s.name)
            .collect()
    };
    match demo {
        Demo::Linear => {
            let model = linear_model(&linear_data(opts)?)?;
            let map = find_map(&model, &MapOptions::new(MapMethod::DirectionSet))?;
            let step = Nuts::new::<&str>(&[]).with_scaling(scaling_from_point(&model, &map)?);
            let cfg = config(draws, seed, progress, "nuts").start(map.clone());
            let trace = run(&model, vec![Box::new(step)], &cfg)?;
            Ok(DemoRun {
                demo,
                report_vars: scalar_vars(&model),
                model,
                trace,
                map: Some(map),
            })
        }
        Demo::Sp500 => {
            let returns = match &opts.data {
                None => datasets::returns_fixture(),
                Some(path) => read_series(path)?,
            };
            let model = sp500_model(&returns)?;
            let start = find_map(&model, &MapOptions::new(MapMethod::QuasiNewton).vars(&["s"]))?;
            // short run to reach the typical set
            let step = Nuts::new::<&str>(&[]).with_scaling(scaling_from_point(&model, &start)?);
            let warm = run(&model, vec![Box::new(step)], &config(50, seed, progress, "warm-up").start(start.clone()))?;
            let restart = warm.point(-1)?;
            let opts = NutsOptions {
                gamma: 0.25,
                ..Default::default()
            };
            let step = Nuts::with_options::<&str>(&[], opts)
                .with_scaling(scaling_from_point(&model, &restart)?);
            let cfg = config(draws, seed.wrapping_add(1), progress, "nuts").start(restart);
            let trace = run(&model, vec![Box::new(step)], &cfg)?;
            Ok(DemoRun {
                demo,
                report_vars: scalar_vars(&model),
                model,
                trace,
                map: Some(start),
            })
        }
        Demo::Disasters => {
            let model = disasters_model(&disasters_data(opts)?)?;
            let mut steps: Vec<Box<dyn StepMethod>> =
                vec![Box::new(Nuts::new(&["early_rate", "late_rate"]))];
            let discrete: Vec<String> = ["switchpoint", "disasters.missing_values"]
                .into_iter()
                .filter(|n| model.free_var(n).is_some())
                .map(String::from)
                .collect();
            steps.push(Box::new(Metropolis::new(&discrete)));
            let trace = run(&model, steps, &config(draws, seed, progress, "compound"))?;
            Ok(DemoRun {
                demo,
                report_vars: scalar_vars(&model),
                model,
                trace,
                map: None,
            })
        }
        Demo::GlmLinear | Demo::GlmLogistic => {
            let table = glm_table(opts)?;
            let (model, label) = if demo == Demo::GlmLinear {
                (glm_model(&table, Family::Normal)?, "nuts")
            } else {
                (glm_model(&binarize(&table)?, Family::Binomial)?, "metropolis")
            };
            let steps: Vec<Box<dyn StepMethod>> = if demo == Demo::GlmLinear {
                vec![Box::new(Nuts::new::<&str>(&[]))]
            } else {
                vec![Box::new(Metropolis::new::<&str>(&[]))]
            };
            let trace = run(&model, steps, &config(draws, seed, progress, label))?;
            Ok(DemoRun {
                demo,
                report_vars: scalar_vars(&model),
                model,
                trace,
                map: None,
            })
        }
    }
}

/// Files written by [`write_outputs`].
pub struct DemoFiles {
    pub trace_dir: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Write `trace/`, `summary.txt` and `plots/*.csv` under `out`.
pub fn write_outputs(run: &DemoRun, out: &Path) -> CliResult<DemoFiles> {
    std::fs::create_dir_all(out)?;
    let trace_dir = out.join("trace");
    save(&run.trace, &trace_dir)?;
    let summary = out.join("summary.txt");
    std::fs::write(&summary, summary_text(&run.trace, &run.report_vars)?)?;
    let data = traceplot_data(&run.trace, &run.report_vars)?;
    let plots = write_plot_data(&data, out.join("plots"))?;
    Ok(DemoFiles {
        trace_dir,
        summary,
        plots,
    })
}
