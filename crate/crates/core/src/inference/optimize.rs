use crate::error::{Error, Result};
use crate::model::{FlatLayout, Model};
use crate::point::Point;

const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 5000;
const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_HALVINGS: usize = 30;
const POWELL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MapMethod {
    /// BFGS with AD gradients.
    #[default]
    QuasiNewton,
    /// Powell's derivative-free direction-set method.
    DirectionSet,
}

#[derive(Clone, Debug, Default)]
pub struct MapOptions {
    /// Variables to optimize; empty means every continuous variable.
    pub vars: Vec<String>,
    pub method: MapMethod,
    /// Starting values; missing entries come from the test point.
    pub start: Option<Point>,
}

impl MapOptions {
    pub fn new(method: MapMethod) -> Self {
        MapOptions {
            method,
            ..Default::default()
        }
    }

    pub fn vars<S: AsRef<str>>(mut self, vars: &[S]) -> Self {
        self.vars = vars.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn start(mut self, start: Point) -> Self {
        self.start = Some(start);
        self
    }
}

fn target_layout(model: &Model, vars: &[String]) -> Result<FlatLayout> {
    let names = crate::samplers::resolve_targets(model, vars, |v| v.is_continuous(), "find_map")?;
    FlatLayout::new(model, &names)
}

struct Objective<'a> {
    model: &'a Model,
    layout: &'a FlatLayout,
    point: Point,
}

impl Objective<'_> {
    /// −logp, with every non-finite value mapped to +∞.
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.layout.scatter(x, &mut self.point);
        let lp = self.model.logp(&self.point)?;
        Ok(if lp.is_finite() { -lp } else { f64::INFINITY })
    }

    fn value_grad(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.layout.scatter(x, &mut self.point);
        let (lp, g) = self.model.logp_and_grad(&self.point, &self.layout.name_refs())?;
        let g: Vec<f64> = self.layout.gather_arrays(&g).into_iter().map(|v| -v).collect();
        if lp.is_finite() && g.iter().all(|v| v.is_finite()) {
            Ok((-lp, g))
        } else {
            Ok((f64::INFINITY, g))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(x, d)| x + t * d).collect()
}

fn bfgs(obj: &mut Objective<'_>, x0: Vec<f64>) -> Result<Vec<f64>> {
    let n = x0.len();
    let (mut f, mut g) = obj.value_grad(&x0)?;
    let mut x = x0;
    // inverse Hessian approximation, row-major
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut first = true;
    for _ in 0..MAX_ITER {
        if g.iter().all(|v| v.abs() < GRAD_TOL) {
            break;
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            // lost positive definiteness: restart along steepest descent
            h.iter_mut().enumerate().for_each(|(k, v)| *v = if k % (n + 1) == 0 { 1.0 } else { 0.0 });
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..(MAX_HALVINGS + 60) {
            let xn = axpy(&x, t, &d);
            let (fn_, gn) = obj.value_grad(&xn)?;
            if fn_.is_finite() && fn_ <= f + ARMIJO_C * t * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            t *= SHRINK;
        }
        let Some((xn, fn_, gn)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if first {
                let scale = sy / dot(&y, &y);
                for i in 0..n {
                    h[i * n + i] = scale;
                }
                first = false;
            }
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let done = (f - fn_).abs() <= f64::EPSILON * f.abs().max(1.0) && s.iter().all(|v| v.abs() < 1e-15);
        x = xn;
        f = fn_;
        g = gn;
        if done {
            break;
        }
    }
    Ok(x)
}

const GOLD: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;

/// Minimize `phi` along a line starting at t = 0 where `phi(0) = f0`.
fn line_minimize<F>(phi: &mut F, f0: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut a = 0.0;
    let mut b = 1.0;
    let mut fb = phi(b)?;
    let mut k = 0;
    while !fb.is_finite() && k < MAX_HALVINGS * 2 {
        b *= SHRINK;
        fb = phi(b)?;
        k += 1;
    }
    if fb > f0 {
        (a, b) = (b, a);
        fb = f0;
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = phi(c)?;
    let mut it = 0;
    while fc < fb && it < 200 {
        a = b;
        b = c;
        fb = fc;
        c = b + GOLD * (b - a);
        fc = phi(c)?;
        it += 1;
    }
    brent(phi, a, b, c, fb)
}

/// Brent's method on the bracket `a < b < c` (in either order) with `phi(b) = fb`.
fn brent<F>(phi: &mut F, a: f64, b: f64, c: f64, fb: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let tol = 1e-10;
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (lo + hi);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = phi(u)?;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            (v, w, x) = (w, x, u);
            (fv, fw, fx) = (fw, fx, fu);
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                (v, w) = (w, u);
                (fv, fw) = (fw, fu);
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}

fn powell(obj: &mut Objective<'_>, x0: Vec<f64>) -> Result<Vec<f64>> {
    let n = x0.len();
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut x = x0;
    let mut f = obj.value(&x)?;
    for _ in 0..MAX_ITER {
        let x_start = x.clone();
        let f_start = f;
        let mut biggest = 0usize;
        let mut drop = 0.0;
        for (i, d) in dirs.iter().enumerate() {
            let f_before = f;
            let (t, ft) = {
                let base = x.clone();
                let mut phi = |t: f64| obj.value(&axpy(&base, t, d));
                line_minimize(&mut phi, f)?
            };
            if ft < f {
                x = axpy(&x, t, d);
                f = ft;
            }
            if f_before - f > drop {
                drop = f_before - f;
                biggest = i;
            }
        }
        if 2.0 * (f_start - f) <= POWELL_TOL * (f_start.abs() + f.abs()) + 1e-25 {
            break;
        }
        let ext: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| 2.0 * a - b).collect();
        let fe = obj.value(&ext)?;
        if fe < f_start {
            let t = 2.0 * (f_start - 2.0 * f + fe) * (f_start - f - drop).powi(2)
                - drop * (f_start - fe).powi(2);
            if t < 0.0 {
                let d: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
                let (s, fs) = {
                    let base = x.clone();
                    let mut phi = |t: f64| obj.value(&axpy(&base, t, &d));
                    line_minimize(&mut phi, f)?
                };
                if fs < f {
                    x = axpy(&x, s, &d);
                    f = fs;
                }
                dirs[biggest] = dirs[n - 1].clone();
                dirs[n - 1] = d;
            }
        }
    }
    Ok(x)
}

/// Posterior mode in transformed coordinates.
///
/// The result holds every free variable's input value (optimized or held
/// fixed) plus constrained aliases and deterministics. It is never worse
/// than the start.
pub fn find_map(model: &Model, opts: &MapOptions) -> Result<Point> {
    let layout = target_layout(model, &opts.vars)?;
    let start = model.complete_point(opts.start.as_ref().unwrap_or(&Point::new()));
    let lp0 = model.logp(&start)?;
    if !lp0.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let x0 = layout.gather(&start)?;
    let mut obj = Objective {
        model,
        layout: &layout,
        point: start.clone(),
    };
    let x = match opts.method {
        MapMethod::QuasiNewton => bfgs(&mut obj, x0.clone())?,
        MapMethod::DirectionSet => powell(&mut obj, x0.clone())?,
    };
    let mut out = start;
    layout.scatter(&x, &mut out);
    let lp = model.logp(&out)?;
    if !(lp >= lp0) {
        layout.scatter(&x0, &mut out);
    }
    model.augment(&out)
}

/// `-∂²logp/∂x²` for every continuous variable, by central differences of
/// the AD gradient with step `1e-4·max(1, |x|)`. Not clipped.
pub fn find_hessian_diag(model: &Model, point: &Point) -> Result<Point> {
    let layout = target_layout(model, &[])?;
    let mut work = model.complete_point(point);
    let x = layout.gather(&work)?;
    let refs = layout.name_refs();
    let mut diag = vec![0.0; x.len()];
    let mut xp = x.clone();
    for k in 0..x.len() {
        let h = 1e-4 * x[k].abs().max(1.0);
        xp[k] = x[k] + h;
        layout.scatter(&xp, &mut work);
        let gp = layout.gather_arrays(&model.logp_and_grad(&work, &refs)?.1)[k];
        xp[k] = x[k] - h;
        layout.scatter(&xp, &mut work);
        let gm = layout.gather_arrays(&model.logp_and_grad(&work, &refs)?.1)[k];
        xp[k] = x[k];
        diag[k] = -(gp - gm) / (2.0 * h);
    }
    let mut out = Point::new();
    layout.scatter(&diag, &mut out);
    Ok(out)
}

/// Diagonal mass matrix for HMC/NUTS: the Hessian diagonal floored at 1e-8.
pub fn scaling_from_point(model: &Model, point: &Point) -> Result<Point> {
    let diag = find_hessian_diag(model, point)?;
    Ok(diag
        .iter()
        .map(|(k, a)| {
            let v = a.map(|v| if v.is_nan() { 1e-8 } else { v.max(1e-8) });
            (k.to_string(), v)
        })
        .collect())
}
