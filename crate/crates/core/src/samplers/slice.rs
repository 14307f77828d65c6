use crate::error::{Error, Result};
use crate::model::{FlatLayout, Model};
use crate::point::Point;
use crate::rng::ChainRng;

use super::{resolve_targets, std_exp, uniform, StepMethod, StepStats};

const MAX_DOUBLINGS: usize = 30;
const MAX_SHRINKS: usize = 200;

/// Univariate slice sampling, one coordinate at a time, with interval
/// doubling and shrinkage.
#[derive(Clone, Debug)]
pub struct Slice {
    requested: Vec<String>,
    width: f64,
    vars: Vec<String>,
    layout: Option<FlatLayout>,
}

impl Slice {
    pub fn new<S: AsRef<str>>(vars: &[S]) -> Self {
        Slice {
            requested: vars.iter().map(|s| s.as_ref().to_string()).collect(),
            width: 1.0,
            vars: Vec::new(),
            layout: None,
        }
    }

    pub fn with_width(mut self, w: f64) -> Self {
        assert!(w > 0.0, "slice width must be positive");
        self.width = w;
        self
    }
}

struct Coord<'a> {
    model: &'a Model,
    layout: &'a FlatLayout,
    point: &'a mut Point,
    x: Vec<f64>,
    k: usize,
}

impl Coord<'_> {
    fn logp(&mut self, v: f64) -> Result<f64> {
        self.x[self.k] = v;
        self.layout.scatter(&self.x, self.point);
        self.model.logp(self.point)
    }
}

/// Neal's acceptance test for the doubling procedure: reject `x1` if the
/// doubling from `x1` would have stopped before reaching `[l, r]`.
fn doubling_accepts(
    f: &mut Coord<'_>,
    x0: f64,
    x1: f64,
    log_y: f64,
    mut l: f64,
    mut r: f64,
    w: f64,
) -> Result<bool> {
    let mut differ = false;
    while r - l > 1.1 * w {
        let m = 0.5 * (l + r);
        if (x0 < m) != (x1 < m) {
            differ = true;
        }
        if x1 < m {
            r = m;
        } else {
            l = m;
        }
        if differ && log_y >= f.logp(l)? && log_y >= f.logp(r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn slice_coordinate(f: &mut Coord<'_>, w: f64, rng: &mut ChainRng) -> Result<f64> {
    let x0 = f.x[f.k];
    let lp0 = f.logp(x0)?;
    if !lp0.is_finite() {
        return Err(Error::NonFiniteLogp(format!("slice start {x0}")));
    }
    let log_y = lp0 - std_exp(rng);

    let mut l = x0 - w * uniform(rng);
    let mut r = l + w;
    let mut fl = f.logp(l)?;
    let mut fr = f.logp(r)?;
    for _ in 0..MAX_DOUBLINGS {
        if log_y >= fl && log_y >= fr {
            break;
        }
        if uniform(rng) < 0.5 {
            l -= r - l;
            fl = f.logp(l)?;
        } else {
            r += r - l;
            fr = f.logp(r)?;
        }
    }

    let (mut lo, mut hi) = (l, r);
    for _ in 0..MAX_SHRINKS {
        let x1 = lo + uniform(rng) * (hi - lo);
        if log_y < f.logp(x1)? && doubling_accepts(f, x0, x1, log_y, l, r, w)? {
            return Ok(x1);
        }
        if x1 < x0 {
            lo = x1;
        } else {
            hi = x1;
        }
        if hi - lo <= f64::EPSILON * x0.abs().max(1.0) {
            break;
        }
    }
    // degenerate bracket: the current point is always on the slice
    Ok(x0)
}

impl StepMethod for Slice {
    fn name(&self) -> &'static str {
        "slice"
    }

    fn vars(&self) -> &[String] {
        &self.vars
    }

    fn setup(&mut self, model: &Model) -> Result<()> {
        self.vars = resolve_targets(model, &self.requested, |v| v.is_continuous(), "Slice")?;
        self.layout = Some(FlatLayout::new(model, &self.vars)?);
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
        let x = layout.gather(point)?;
        let mut c = Coord {
            model,
            layout,
            point,
            x,
            k: 0,
        };
        for k in 0..layout.dim() {
            c.k = k;
            let v = slice_coordinate(&mut c, self.width, rng)?;
            c.x[k] = v;
        }
        layout.scatter(&c.x, c.point);
        stats.push(StepStats {
            method: "slice",
            accept: 1.0,
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
