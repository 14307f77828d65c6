use crate::error::{Error, Result};
use crate::model::{FlatLayout, Model};
use crate::point::Point;
use crate::rng::ChainRng;

use super::{flat_logp_grad, resolve_targets, std_normal, uniform, StepMethod, StepStats};

/// One leapfrog step of size `eps` for the Hamiltonian with potential
/// `-logp` and kinetic energy `½ Σ p²/M`.
///
/// `grad` is ∇logp at `q`; `f` evaluates logp and its gradient. Returns the
/// new position, momentum, logp and gradient.
pub fn leapfrog<F>(
    q: &[f64],
    p: &[f64],
    grad: &[f64],
    eps: f64,
    mass: &[f64],
    f: &mut F,
) -> Result<(Vec<f64>, Vec<f64>, f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let half = 0.5 * eps;
    let mut p1: Vec<f64> = p.iter().zip(grad).map(|(p, g)| p + half * g).collect();
    let q1: Vec<f64> = q
        .iter()
        .zip(&p1)
        .zip(mass)
        .map(|((q, p), m)| q + eps * p / m)
        .collect();
    let (lp, g1) = f(&q1)?;
    for (p, g) in p1.iter_mut().zip(&g1) {
        *p += half * g;
    }
    Ok((q1, p1, lp, g1))
}

/// Leapfrog on named model variables. Returns `(q', p')` as points over
/// the same names.
pub fn leapfrog_point(
    model: &Model,
    q: &Point,
    p: &Point,
    eps: f64,
    mass: &Point,
) -> Result<(Point, Point)> {
    let names: Vec<String> = q.names().map(String::from).collect();
    let layout = FlatLayout::new(model, &names)?;
    let mut work = model.complete_point(q);
    let x = layout.gather(q)?;
    let pv = layout.gather(p)?;
    let mv = layout.gather(mass)?;
    let refs = layout.name_refs();
    let (_, g) = model.logp_and_grad(&work, &refs)?;
    let g = layout.gather_arrays(&g);
    let mut f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        layout.scatter(x, &mut work);
        let (lp, g) = model.logp_and_grad(&work, &refs)?;
        Ok((lp, layout.gather_arrays(&g)))
    };
    let (q1, p1, _, _) = leapfrog(&x, &pv, &g, eps, &mv, &mut f)?;
    let mut qp = q.clone();
    layout.scatter(&q1, &mut qp);
    let mut pp = p.clone();
    layout.scatter(&p1, &mut pp);
    Ok((qp, pp))
}

pub(crate) fn kinetic(p: &[f64], mass: &[f64]) -> f64 {
    0.5 * p.iter().zip(mass).map(|(p, m)| p * p / m).sum::<f64>()
}

/// Mass vector for `layout` from a scaling point; absent entries get 1.
pub(crate) fn mass_from_scaling(
    layout: &FlatLayout,
    scaling: Option<&Point>,
) -> Result<Vec<f64>> {
    let mut mass = Vec::with_capacity(layout.dim());
    for (i, name) in layout.names().iter().enumerate() {
        match scaling.and_then(|s| s.get(name)) {
            Some(a) => {
                for &v in a.data() {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::invalid(format!(
                            "scaling for `{name}` must be positive and finite, got {v}"
                        )));
                    }
                    mass.push(v);
                }
            }
            None => {
                mass.extend(std::iter::repeat_n(1.0, layout.size_of(i)));
            }
        }
    }
    if mass.len() != layout.dim() {
        return Err(Error::invalid("scaling has the wrong number of entries"));
    }
    Ok(mass)
}

/// Hamiltonian Monte Carlo with fixed step size and path length.
#[derive(Clone, Debug)]
pub struct Hmc {
    requested: Vec<String>,
    step_size: f64,
    n_steps: usize,
    scaling: Option<Point>,
    vars: Vec<String>,
    layout: Option<FlatLayout>,
    mass: Vec<f64>,
}

impl Hmc {
    pub fn new<S: AsRef<str>>(vars: &[S], step_size: f64, n_steps: usize) -> Self {
        assert!(step_size > 0.0 && n_steps >= 1, "need ε > 0 and L ≥ 1");
        Hmc {
            requested: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            step_size,
            n_steps,
            scaling: None,
            vars: Vec::new(),
            layout: None,
            mass: Vec::new(),
        }
    }

    pub fn with_scaling(mut self, scaling: Point) -> Self {
        self.scaling = Some(scaling);
        self
    }
}

impl StepMethod for Hmc {
    fn name(&self) -> &'static str {
        "hmc"
    }

    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn setup(&mut self, model: &Model) -> Result<()> {
        self.vars = resolve_targets(model, &self.requested, |v| v.is_continuous(), "HMC")?;
        let layout = FlatLayout::new(model, &self.vars)?;
        self.mass = mass_from_scaling(&layout, self.scaling.as_ref())?;
        self.layout = Some(layout);
        Ok(())
    }

    fn step(
        &mut self,
        model: &Model,
        point: &mut Point,
        rng: &mut ChainRng,
        _tune: bool,
        stats: &mut Vec<StepStats>,
    ) -> Result<()> {
        let layout = self.layout.as_ref().expect("setup not called");
        let q0 = layout.gather(point)?;
        let (lp0, g0) = flat_logp_grad(model, layout, point, &q0)?;
        if !lp0.is_finite() {
            return Err(Error::NonFiniteLogp("HMC start".into()));
        }
        let p0: Vec<f64> = self.mass.iter().map(|m| m.sqrt() * std_normal(rng)).collect();
        let h0 = lp0 - kinetic(&p0, &self.mass);

        let (mut q, mut p, mut lp, mut g) = (q0.clone(), p0, lp0, g0);
        let mut f = |x: &[f64]| flat_logp_grad(model, layout, point, x);
        for _ in 0..self.n_steps {
            let out = leapfrog(&q, &p, &g, self.step_size, &self.mass, &mut f)?;
            (q, p, lp, g) = out;
            if !lp.is_finite() {
                break;
            }
        }
        let h1 = lp - kinetic(&p, &self.mass);
        let log_ratio = if h1.is_nan() { f64::NEG_INFINITY } else { h1 - h0 };
        let accept = log_ratio.exp().min(1.0);
        let accepted = lp.is_finite() && uniform(rng) < accept;
        layout.scatter(if accepted { &q } else { &q0 }, point);
        stats.push(StepStats {
            method: "hmc",
            accept,
            step_size: Some(self.step_size),
            tree_depth: None,
            diverging: !lp.is_finite(),
        });
        Ok(())
    }

    fn box_clone(&self) -> Box<dyn StepMethod> {
        Box::new(self.clone())
    }
}
