use crate::error::{Error, Result};
use crate::model::{FlatLayout, Model};
use crate::point::Point;
use crate::rng::ChainRng;

use super::hmc::{kinetic, leapfrog, mass_from_scaling};
use super::{flat_logp_grad, resolve_targets, std_exp, std_normal, uniform, StepMethod, StepStats};

/// Tuning constants for [`Nuts`].
#[derive(Clone, Debug, PartialEq)]
pub struct NutsOptions {
    pub max_depth: usize,
    /// Energy error beyond which a trajectory is declared divergent.
    pub max_energy_error: f64,
    pub target_accept: f64,
    pub gamma: f64,
    pub t0: f64,
    pub kappa: f64,
    /// Fixed initial step size; found by the doubling heuristic when `None`.
    pub step_size: Option<f64>,
}

impl Default for NutsOptions {
    fn default() -> Self {
        NutsOptions {
            max_depth: 10,
            max_energy_error: 1000.0,
            target_accept: 0.8,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
            step_size: None,
        }
    }
}

/// True when the trajectory from `q_minus` to `q_plus` has started to turn
/// back on itself at either end. Velocities are `M⁻¹p`.
pub fn is_u_turn(dq: &[f64], v_minus: &[f64], v_plus: &[f64]) -> bool {
    let dot = |v: &[f64]| dq.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    dot(v_minus) <= 0.0 || dot(v_plus) <= 0.0
}

#[derive(Clone, Debug)]
struct State {
    q: Vec<f64>,
    p: Vec<f64>,
    logp: f64,
    grad: Vec<f64>,
}

struct Tree {
    minus: State,
    plus: State,
    proposal: State,
    n: usize,
    ok: bool,
    alpha: f64,
    n_alpha: usize,
    diverging: bool,
}

#[derive(Clone, Debug)]
struct DualAveraging {
    mu: f64,
    h_bar: f64,
    log_eps_bar: f64,
    m: usize,
}

/// No-U-Turn sampler with uniform selection from the slice set and
/// dual-averaging step-size adaptation during warm-up.
///
/// The mass matrix is diagonal; with a scaling point it is taken from that
/// point (see [`crate::inference::scaling_from_point`]), otherwise identity.
#[derive(Clone, Debug)]
pub struct Nuts {
    requested: Vec<String>,
    opts: NutsOptions,
    scaling: Option<Point>,
    vars: Vec<String>,
    layout: Option<FlatLayout>,
    mass: Vec<f64>,
    step_size: f64,
    adapt: Option<DualAveraging>,
    was_tuning: bool,
}

impl Nuts {
    pub fn new<S: AsRef<str>>(vars: &[S]) -> Self {
        Self::with_options(vars, NutsOptions::default())
    }

    pub fn with_options<S: AsRef<str>>(vars: &[S], opts: NutsOptions) -> Self {
        Nuts {
            requested: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            opts,
            scaling: None,
            vars: Vec::new(),
            layout: None,
            mass: Vec::new(),
            step_size: 0.0,
            adapt: None,
            was_tuning: false,
        }
    }

    /// Use the diagonal of `scaling` (keyed by variable input name) as the
    /// momentum precision.
    pub fn with_scaling(mut self, scaling: Point) -> Self {
        self.scaling = Some(scaling);
        self
    }

    pub fn options(&self) -> &NutsOptions {
        &self.opts
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    fn velocity(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.mass).map(|(p, m)| p / m).collect()
    }

    fn turned(&self, minus: &State, plus: &State) -> bool {
        let dq: Vec<f64> = plus.q.iter().zip(&minus.q).map(|(a, b)| a - b).collect();
        is_u_turn(&dq, &self.velocity(&minus.p), &self.velocity(&plus.p))
    }

    /// Find a step size where one leapfrog step changes the acceptance
    /// probability across 0.5.
    fn reasonable_step_size<F>(&self, s: &State, rng: &mut ChainRng, f: &mut F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    {
        let p: Vec<f64> = self.mass.iter().map(|m| m.sqrt() * std_normal(rng)).collect();
        let h0 = s.logp - kinetic(&p, &self.mass);
        let log_ratio = |eps: f64, f: &mut F| -> Result<f64> {
            let (_, p1, lp, _) = leapfrog(&s.q, &p, &s.grad, eps, &self.mass, f)?;
            let d = lp - kinetic(&p1, &self.mass) - h0;
            Ok(if d.is_nan() { f64::NEG_INFINITY } else { d })
        };
        let mut eps = 1.0;
        let mut lr = log_ratio(eps, f)?;
        let a = if lr > 0.5f64.ln() { 1.0 } else { -1.0 };
        for _ in 0..100 {
            if a * lr <= -a * 2f64.ln() {
                break;
            }
            eps *= 2f64.powf(a);
            lr = log_ratio(eps, f)?;
        }
        Ok(eps)
    }

    #[allow(clippy::too_many_arguments)]
    fn build_tree<F>(
        &self,
        s: &State,
        log_u: f64,
        dir: f64,
        depth: usize,
        eps: f64,
        h0: f64,
        rng: &mut ChainRng,
        f: &mut F,
    ) -> Result<Tree>
    where
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    {
        if depth == 0 {
            let (q, p, logp, grad) = leapfrog(&s.q, &s.p, &s.grad, dir * eps, &self.mass, f)?;
            let h = logp - kinetic(&p, &self.mass);
            let h = if h.is_nan() { f64::NEG_INFINITY } else { h };
            let ok = log_u < h + self.opts.max_energy_error;
            let n = (log_u <= h && h > f64::NEG_INFINITY) as usize;
            let alpha = if h > f64::NEG_INFINITY { (h - h0).exp().min(1.0) } else { 0.0 };
            let leaf = State { q, p, logp, grad };
            return Ok(Tree {
                minus: leaf.clone(),
                plus: leaf.clone(),
                proposal: leaf,
                n,
                ok,
                alpha,
                n_alpha: 1,
                diverging: !ok,
            });
        }
        let mut t = self.build_tree(s, log_u, dir, depth - 1, eps, h0, rng, f)?;
        if !t.ok {
            return Ok(t);
        }
        let edge = if dir < 0.0 { &t.minus } else { &t.plus };
        let t2 = self.build_tree(edge, log_u, dir, depth - 1, eps, h0, rng, f)?;
        if dir < 0.0 {
            t.minus = t2.minus;
        } else {
            t.plus = t2.plus;
        }
        let total = t.n + t2.n;
        if t2.n > 0 && uniform(rng) * (total as f64) < t2.n as f64 {
            t.proposal = t2.proposal;
        }
        t.alpha += t2.alpha;
        t.n_alpha += t2.n_alpha;
        t.diverging |= t2.diverging;
        t.ok = t2.ok && !self.turned(&t.minus, &t.plus);
        t.n = total;
        Ok(t)
    }
}

impl StepMethod for Nuts {
    fn name(&self) -> &'static str {
        "nuts"
    }

    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn setup(&mut self, model: &Model) -> Result<()> {
        self.vars = resolve_targets(model, &self.requested, |v| v.is_continuous(), "NUTS")?;
        let layout = FlatLayout::new(model, &self.vars)?;
        self.mass = mass_from_scaling(&layout, self.scaling.as_ref())?;
        self.layout = Some(layout);
        self.step_size = 0.0;
        self.adapt = None;
        self.was_tuning = false;
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
        let layout = self.layout.clone().expect("setup not called");
        let q0 = layout.gather(point)?;
        let (lp0, g0) = flat_logp_grad(model, &layout, point, &q0)?;
        if !lp0.is_finite() {
            return Err(if model.logp(point)?.is_finite() {
                Error::NonFiniteGradient
            } else {
                Error::NonFiniteLogp("NUTS start".into())
            });
        }
        let mut f = |x: &[f64]| flat_logp_grad(model, &layout, point, x);
        let start = State {
            q: q0,
            p: Vec::new(),
            logp: lp0,
            grad: g0,
        };

        if self.step_size == 0.0 {
            self.step_size = match self.opts.step_size {
                Some(e) => e,
                None => self.reasonable_step_size(&start, rng, &mut f)?,
            };
        }
        if tune && self.adapt.is_none() {
            self.adapt = Some(DualAveraging {
                mu: (10.0 * self.step_size).ln(),
                h_bar: 0.0,
                log_eps_bar: 0.0,
                m: 0,
            });
        }
        if !tune && self.was_tuning {
            if let Some(da) = &self.adapt {
                self.step_size = da.log_eps_bar.exp();
            }
        }
        self.was_tuning = tune;
        let eps = self.step_size;

        let p0: Vec<f64> = self.mass.iter().map(|m| m.sqrt() * std_normal(rng)).collect();
        let h0 = lp0 - kinetic(&p0, &self.mass);
        let log_u = h0 - std_exp(rng);
        let root = State { p: p0, ..start };

        let mut minus = root.clone();
        let mut plus = root.clone();
        let mut current = root;
        let mut n = 1usize;
        let mut depth = 0;
        let mut alpha_sum = 0.0;
        let mut n_alpha = 0usize;
        let mut diverging = false;
        loop {
            let dir = if uniform(rng) < 0.5 { -1.0 } else { 1.0 };
            let edge = if dir < 0.0 { &minus } else { &plus };
            let t = self.build_tree(edge, log_u, dir, depth, eps, h0, rng, &mut f)?;
            if dir < 0.0 {
                minus = t.minus;
            } else {
                plus = t.plus;
            }
            alpha_sum += t.alpha;
            n_alpha += t.n_alpha;
            diverging |= t.diverging;
            if t.ok && t.n > 0 && uniform(rng) * (n as f64) < t.n as f64 {
                current = t.proposal;
            }
            n += t.n;
            depth += 1;
            if !t.ok || self.turned(&minus, &plus) || depth >= self.opts.max_depth {
                break;
            }
        }
        layout.scatter(&current.q, point);

        let accept = if n_alpha > 0 { alpha_sum / n_alpha as f64 } else { 0.0 };
        if tune {
            let o = &self.opts;
            let da = self.adapt.as_mut().expect("initialized above");
            da.m += 1;
            let m = da.m as f64;
            let w = 1.0 / (m + o.t0);
            da.h_bar = (1.0 - w) * da.h_bar + w * (o.target_accept - accept);
            let log_eps = da.mu - m.sqrt() / o.gamma * da.h_bar;
            let mk = m.powf(-o.kappa);
            da.log_eps_bar = mk * log_eps + (1.0 - mk) * da.log_eps_bar;
            self.step_size = log_eps.exp();
        }
        stats.push(StepStats {
            method: "nuts",
            accept,
            step_size: Some(eps),
            tree_depth: Some(depth),
            diverging,
        });
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn StepMethod> {
        Box::new(self.clone())
    }
}
