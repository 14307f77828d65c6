use std::collections::HashMap;

use crate::array::Dtype;
use crate::error::Result;
use crate::model::{FlatLayout, Model};
use crate::point::Point;
use crate::rng::ChainRng;

use super::{resolve_targets, std_normal, uniform, StepMethod, StepStats};

/// Scale multiplier for an observed acceptance rate.
pub fn tune_scale(acc_rate: f64) -> f64 {
    if acc_rate < 0.001 {
        0.1
    } else if acc_rate < 0.05 {
        0.5
    } else if acc_rate < 0.2 {
        0.9
    } else if acc_rate > 0.95 {
        10.0
    } else if acc_rate > 0.75 {
        2.0
    } else if acc_rate > 0.5 {
        1.1
    } else {
        1.0
    }
}

/// Random-walk Metropolis with a joint Gaussian proposal over all targets.
///
/// Each variable has its own proposal scale; during warm-up all scales are
/// multiplied by [`tune_scale`] every `tune_interval` proposals.
#[derive(Clone, Debug)]
pub struct Metropolis {
    requested: Vec<String>,
    initial_scale: HashMap<String, f64>,
    vars: Vec<String>,
    layout: Option<FlatLayout>,
    scale: Vec<f64>,
    is_int: Vec<bool>,
    tune_interval: usize,
    accepted: usize,
    proposed: usize,
}

impl Metropolis {
    pub fn new<S: AsRef<str>>(vars: &[S]) -> Self {
        Metropolis {
            requested: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            initial_scale: HashMap::new(),
            vars: Vec::new(),
            layout: None,
            scale: Vec::new(),
            is_int: Vec::new(),
            tune_interval: 100,
            accepted: 0,
            proposed: 0,
        }
    }

    /// Starting proposal standard deviation for one variable (default 1).
    pub fn with_scale(mut self, var: &str, scale: f64) -> Self {
        assert!(scale > 0.0, "proposal scale must be positive");
        self.initial_scale.insert(var.to_string(), scale);
        self
    }

    pub fn with_tune_interval(mut self, n: usize) -> Self {
        self.tune_interval = n.max(1);
        self
    }

    /// Current per-coordinate proposal scales.
    pub fn scales(&self) -> &[f64] {
        &self.scale
    }
}

impl StepMethod for Metropolis {
    fn name(&self) -> &'static str {
        "metropolis"
    }

    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn setup(&mut self, model: &Model) -> Result<()> {
        self.vars = resolve_targets(model, &self.requested, |_| true, "Metropolis")?;
        let layout = FlatLayout::new(model, &self.vars)?;
        self.scale.clear();
        self.is_int.clear();
        for name in &self.vars {
            let v = model.free_var(name).expect("resolved above");
            let s = self
                .initial_scale
                .get(v.name())
                .or_else(|| self.initial_scale.get(v.value_name()))
                .copied()
                .unwrap_or(1.0);
            let n = crate::array::shape_size(v.shape());
            self.scale.extend(std::iter::repeat_n(s, n));
            self.is_int
                .extend(std::iter::repeat_n(v.dtype() == Dtype::Int, n));
        }
        self.layout = Some(layout);
        self.accepted = 0;
        self.proposed = 0;
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
        let layout = self.layout.as_ref().expect("setup not called");
        if tune && self.proposed >= self.tune_interval {
            let f = tune_scale(self.accepted as f64 / self.proposed as f64);
            for s in &mut self.scale {
                *s *= f;
            }
            self.accepted = 0;
            self.proposed = 0;
        }

        let x0 = layout.gather(point)?;
        let lp0 = model.logp(point)?;
        let x1: Vec<f64> = x0
            .iter()
            .zip(&self.scale)
            .zip(&self.is_int)
            .map(|((&x, &s), &int)| {
                let d = s * std_normal(rng);
                // f64::round breaks ties away from zero
                if int {
                    x + d.round()
                } else {
                    x + d
                }
            })
            .collect();
        layout.scatter(&x1, point);
        let lp1 = model.logp(point)?;
        let log_ratio = lp1 - lp0;
        let accept_prob = if log_ratio.is_nan() {
            0.0
        } else {
            log_ratio.exp().min(1.0)
        };
        let accepted = lp1 > f64::NEG_INFINITY && (log_ratio >= 0.0 || uniform(rng).ln() < log_ratio);
        if !accepted {
            layout.scatter(&x0, point);
        }
        self.proposed += 1;
        self.accepted += accepted as usize;
        stats.push(StepStats {
            method: "metropolis",
            accept: accept_prob,
            step_size: None,
            tree_depth: None,
            diverging: false,
        });
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn StepMethod> {
        Box::new(self.clone())
    }
}
