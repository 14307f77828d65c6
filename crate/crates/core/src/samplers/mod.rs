//! MCMC transition kernels.
//!
//! A [`StepMethod`] updates a subset of a model's free variables in place.
//! Targets are given by variable name (either the declared name or the
//! transformed input name); an empty target list means "every variable this
//! method can handle". [`Compound`] chains several methods so that together
//! they cover the model exactly once.

mod hmc;
mod metropolis;
mod nuts;
mod slice;

use crate::error::{Error, Result};
use crate::model::{FlatLayout, Model};
use crate::point::Point;
use crate::rng::ChainRng;

pub use hmc::{leapfrog, leapfrog_point, Hmc};
pub use metropolis::{tune_scale, Metropolis};
pub use nuts::{is_u_turn, Nuts, NutsOptions};
pub use slice::Slice;

/// Diagnostics from one application of a step method.
#[derive(Clone, Debug, PartialEq)]
pub struct StepStats {
    pub method: &'static str,
    /// Acceptance probability of the transition (NUTS: mean over the tree).
    pub accept: f64,
    pub step_size: Option<f64>,
    pub tree_depth: Option<usize>,
    pub diverging: bool,
}

pub trait StepMethod: Send {
    fn name(&self) -> &'static str;

    /// Resolved input names of the target variables. Empty before `setup`.
    fn vars(&self) -> &[String];

    /// Bind to a model: resolve names and size internal state.
    fn setup(&mut self, model: &Model) -> Result<()>;

    /// Advance `point` by one transition. `tune` is true during warm-up.
    fn step(
        &mut self,
        model: &Model,
        point: &mut Point,
        rng: &mut ChainRng,
        tune: bool,
        stats: &mut Vec<StepStats>,
    ) -> Result<()>;

    fn box_clone(&self) -> Box<dyn StepMethod>;
}

impl Clone for Box<dyn StepMethod> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// Map requested names to input names, defaulting to every variable that
/// passes `eligible`.
pub(crate) fn resolve_targets(
    model: &Model,
    requested: &[String],
    eligible: impl Fn(&crate::model::FreeVar) -> bool,
    method: &str,
) -> Result<Vec<String>> {
    if requested.is_empty() {
        return Ok(model
            .free_vars()
            .iter()
            .filter(|v| eligible(v))
            .map(|v| v.value_name().to_string())
            .collect());
    }
    let mut out = Vec::with_capacity(requested.len());
    for name in requested {
        let v = model
            .free_var(name)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        if !eligible(v) {
            return Err(Error::invalid(format!(
                "{method} cannot update variable `{}`",
                v.name()
            )));
        }
        out.push(v.value_name().to_string());
    }
    Ok(out)
}

/// Log density and gradient over a flat layout, with non-finite gradients
/// folded into a `-∞` density.
pub(crate) fn flat_logp_grad(
    model: &Model,
    layout: &FlatLayout,
    point: &mut Point,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    layout.scatter(x, point);
    let (lp, g) = model.logp_and_grad(point, &layout.name_refs())?;
    let g = layout.gather_arrays(&g);
    if lp.is_finite() && g.iter().all(|v| v.is_finite()) {
        Ok((lp, g))
    } else {
        Ok((f64::NEG_INFINITY, g))
    }
}

/// Several step methods applied in list order.
#[derive(Clone)]
pub struct Compound {
    steps: Vec<Box<dyn StepMethod>>,
    vars: Vec<String>,
}

impl Compound {
    pub fn new(steps: Vec<Box<dyn StepMethod>>) -> Self {
        Compound {
            steps,
            vars: Vec::new(),
        }
    }

    pub fn steps(&self) -> &[Box<dyn StepMethod>] {
        &self.steps
    }
}

impl StepMethod for Compound {
    fn name(&self) -> &'static str {
        "compound"
    }

    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn setup(&mut self, model: &Model) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        self.vars.clear();
        for s in &mut self.steps {
            s.setup(model)?;
            for v in s.vars() {
                if !seen.insert(v.clone()) {
                    let name = model.free_var(v).map_or(v.as_str(), |f| f.name());
                    return Err(Error::OverlappingTargets(name.to_string()));
                }
                self.vars.push(v.clone());
            }
        }
        for v in model.free_vars() {
            if !seen.contains(v.value_name()) {
                return Err(Error::UncoveredVariable(v.name().to_string()));
            }
        }
        Ok(())
    }

    fn step(
        &mut self,
        model: &Model,
        point: &mut Point,
        rng: &mut ChainRng,
        tune: bool,
        stats: &mut Vec<StepStats>,
    ) -> Result<()> {
        for s in &mut self.steps {
            s.step(model, point, rng, tune, stats)?;
        }
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn StepMethod> {
        Box::new(self.clone())
    }
}

/// NUTS for continuous variables and Metropolis for discrete ones.
pub fn default_steps(model: &Model) -> Vec<Box<dyn StepMethod>> {
    let mut steps: Vec<Box<dyn StepMethod>> = Vec::new();
    let cont = model.continuous_value_names();
    let disc = model.discrete_value_names();
    if !cont.is_empty() {
        steps.push(Box::new(Nuts::new(&cont)));
    }
    if !disc.is_empty() {
        steps.push(Box::new(Metropolis::new(&disc)));
    }
    steps
}

/// Gaussian draw with the standard normal from `rand_distr`.
pub(crate) fn std_normal(rng: &mut ChainRng) -> f64 {
    use rand::Rng;
    rng.sample(rand_distr::StandardNormal)
}

/// Uniform draw on [0, 1).
pub(crate) fn uniform(rng: &mut ChainRng) -> f64 {
    use rand::Rng;
    rng.random::<f64>()
}

/// Exponential(1) draw, used for log-slice heights.
pub(crate) fn std_exp(rng: &mut ChainRng) -> f64 {
    use rand::Rng;
    rng.sample(rand_distr::Exp1)
}
