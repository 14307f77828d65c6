//! Log-density recipes. Each distribution builds its log-density as a graph
//! over an arbitrary value expression, summed over the value's elements.
//! Parameters are themselves expressions, so they can depend on other random
//! variables.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::array::{Array, Dtype};
use crate::error::{Error, Result};
use crate::graph::{self, Expr};
use crate::point::Point;

/// Support class, which also decides the automatic transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Real,
    Positive,
    Interval(f64, f64),
    NonNegInt,
    IntInterval(i64, i64),
    /// {0, 1}
    Binary,
    RealVector,
}

impl Support {
    pub fn dtype(self) -> Dtype {
        match self {
            Support::NonNegInt | Support::IntInterval(..) | Support::Binary => Dtype::Int,
            _ => Dtype::Float,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            Support::Real | Support::RealVector => x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::Interval(a, b) => x > a && x < b,
            Support::NonNegInt => x >= 0.0 && x.fract() == 0.0,
            Support::IntInterval(a, b) => x >= a as f64 && x <= b as f64 && x.fract() == 0.0,
            Support::Binary => x == 0.0 || x == 1.0,
        }
    }
}

/// A user-supplied log-density, the extension point for distributions the
/// library does not ship.
pub trait LogDensity: Send + Sync {
    /// Log-density of `value`, summed to a scalar.
    fn logp(&self, value: &Expr) -> Expr;

    fn support(&self) -> Support {
        Support::Real
    }

    /// Default starting value, if the density has a natural one.
    fn default_value(&self) -> Option<f64> {
        None
    }
}

struct FnDensity<F>(F);

impl<F> LogDensity for FnDensity<F>
where
    F: Fn(&Expr) -> Expr + Send + Sync,
{
    fn logp(&self, value: &Expr) -> Expr {
        (self.0)(value)
    }
}

#[derive(Clone)]
pub enum NormalScale {
    Sd(Expr),
    Tau(Expr),
}

#[derive(Clone)]
pub enum Distribution {
    Normal { mu: Expr, scale: NormalScale },
    HalfNormal { sd: Expr },
    Uniform { lower: f64, upper: f64 },
    /// `rate` is the inverse mean.
    Exponential { rate: Expr },
    Poisson { rate: Expr },
    DiscreteUniform { lower: i64, upper: i64 },
    /// Student-t with precision-like parameter `lam`.
    StudentT { nu: Expr, mu: Expr, lam: Expr },
    /// Random walk whose increments have precision `tau`; the first element
    /// contributes nothing.
    GaussianRandomWalk { tau: Expr },
    Bernoulli { p: Expr },
    Flat,
    Custom(Arc<dyn LogDensity>),
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family())
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// `value` where `cond` holds, `-∞` elsewhere.
fn bound(value: Expr, cond: Expr) -> Expr {
    Expr::switch(&cond, &value, &Expr::scalar(f64::NEG_INFINITY))
        .expect("bound arguments are broadcast-compatible")
}

fn and(a: Expr, b: Expr) -> Expr {
    a * b
}

impl Distribution {
    pub fn normal(mu: impl Into<Expr>, sd: impl Into<Expr>) -> Self {
        Distribution::Normal {
            mu: mu.into(),
            scale: NormalScale::Sd(sd.into()),
        }
    }

    pub fn normal_tau(mu: impl Into<Expr>, tau: impl Into<Expr>) -> Self {
        Distribution::Normal {
            mu: mu.into(),
            scale: NormalScale::Tau(tau.into()),
        }
    }

    pub fn half_normal(sd: impl Into<Expr>) -> Self {
        Distribution::HalfNormal { sd: sd.into() }
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::invalid(format!("uniform bounds [{lower}, {upper}]")));
        }
        Ok(Distribution::Uniform { lower, upper })
    }

    pub fn exponential(rate: impl Into<Expr>) -> Self {
        Distribution::Exponential { rate: rate.into() }
    }

    pub fn poisson(rate: impl Into<Expr>) -> Self {
        Distribution::Poisson { rate: rate.into() }
    }

    pub fn discrete_uniform(lower: i64, upper: i64) -> Result<Self> {
        if lower > upper {
            return Err(Error::invalid(format!("discrete uniform bounds [{lower}, {upper}]")));
        }
        Ok(Distribution::DiscreteUniform { lower, upper })
    }

    pub fn student_t(nu: impl Into<Expr>, mu: impl Into<Expr>, lam: impl Into<Expr>) -> Self {
        Distribution::StudentT {
            nu: nu.into(),
            mu: mu.into(),
            lam: lam.into(),
        }
    }

    pub fn gaussian_random_walk(tau: impl Into<Expr>) -> Self {
        Distribution::GaussianRandomWalk { tau: tau.into() }
    }

    pub fn bernoulli(p: impl Into<Expr>) -> Self {
        Distribution::Bernoulli { p: p.into() }
    }

    pub fn flat() -> Self {
        Distribution::Flat
    }

    /// A density given directly as a graph builder over the value.
    pub fn density<F>(logp: F) -> Self
    where
        F: Fn(&Expr) -> Expr + Send + Sync + 'static,
    {
        Distribution::Custom(Arc::new(FnDensity(logp)))
    }

    pub fn custom(density: impl LogDensity + 'static) -> Self {
        Distribution::Custom(Arc::new(density))
    }

    pub fn family(&self) -> &'static str {
        match self {
            Distribution::Normal { .. } => "Normal",
            Distribution::HalfNormal { .. } => "HalfNormal",
            Distribution::Uniform { .. } => "Uniform",
            Distribution::Exponential { .. } => "Exponential",
            Distribution::Poisson { .. } => "Poisson",
            Distribution::DiscreteUniform { .. } => "DiscreteUniform",
            Distribution::StudentT { .. } => "StudentT",
            Distribution::GaussianRandomWalk { .. } => "GaussianRandomWalk",
            Distribution::Bernoulli { .. } => "Bernoulli",
            Distribution::Flat => "Flat",
            Distribution::Custom(_) => "Custom",
        }
    }

    pub fn support(&self) -> Support {
        match self {
            Distribution::Normal { .. } | Distribution::StudentT { .. } | Distribution::Flat => {
                Support::Real
            }
            Distribution::HalfNormal { .. } | Distribution::Exponential { .. } => Support::Positive,
            Distribution::Uniform { lower, upper } => Support::Interval(*lower, *upper),
            Distribution::Poisson { .. } => Support::NonNegInt,
            Distribution::DiscreteUniform { lower, upper } => Support::IntInterval(*lower, *upper),
            Distribution::GaussianRandomWalk { .. } => Support::RealVector,
            Distribution::Bernoulli { .. } => Support::Binary,
            Distribution::Custom(d) => d.support(),
        }
    }

    pub fn dtype(&self) -> Dtype {
        self.support().dtype()
    }

    /// Log-density of `value`, summed over its elements.
    pub fn logp_expr(&self, value: &Expr) -> Result<Expr> {
        let expected = self.dtype();
        if value.dtype() != expected {
            return Err(Error::DtypeMismatch {
                name: format!("{} value", self.family()),
                expected: expected.to_string(),
            });
        }
        self.check_param_shapes(value.shape())?;
        let x = value;
        let zero = Expr::scalar(0.0);
        let elementwise = match self {
            Distribution::Normal { mu, scale } => match scale {
                NormalScale::Sd(sd) => {
                    let z = (x - mu) / sd;
                    bound(
                        -0.5 * LN_2PI - sd.ln() - 0.5 * (&z * &z),
                        sd.gt(&zero),
                    )
                }
                NormalScale::Tau(tau) => {
                    let d = x - mu;
                    bound(
                        0.5 * (tau.ln() - LN_2PI) - 0.5 * tau * (&d * &d),
                        tau.gt(&zero),
                    )
                }
            },
            Distribution::HalfNormal { sd } => {
                let z = x / sd;
                bound(
                    std::f64::consts::LN_2 - 0.5 * LN_2PI - sd.ln() - 0.5 * (&z * &z),
                    and(x.ge(&zero), sd.gt(&zero)),
                )
            }
            Distribution::Uniform { lower, upper } => {
                let lo = Expr::scalar(*lower);
                let hi = Expr::scalar(*upper);
                let dens = Expr::scalar(-(upper - lower).ln());
                let inside = and(x.ge(&lo), hi.ge(x));
                // multiply by a ones-like term so the result has the value's shape
                bound(dens + x * 0.0, inside)
            }
            Distribution::Exponential { rate } => bound(
                rate.ln() - rate * x,
                and(x.ge(&zero), rate.gt(&zero)),
            ),
            Distribution::Poisson { rate } => bound(
                x * rate.ln() - rate - (x + 1.0).lgamma(),
                and(x.ge(&zero), rate.ge(&zero)),
            ),
            Distribution::DiscreteUniform { lower, upper } => {
                let lo = Expr::scalar(*lower as f64);
                let hi = Expr::scalar(*upper as f64);
                let dens = Expr::scalar(-((upper - lower + 1) as f64).ln());
                bound(dens + x * 0.0, and(x.ge(&lo), hi.ge(x)))
            }
            Distribution::StudentT { nu, mu, lam } => {
                let d = x - mu;
                let half_nu1 = (nu + 1.0) * 0.5;
                let term = half_nu1.lgamma() - (nu * 0.5).lgamma() + 0.5 * (lam / (nu * PI)).ln()
                    - &half_nu1 * (1.0 + lam * (&d * &d) / nu).ln();
                bound(term, and(lam.gt(&zero), nu.gt(&zero)))
            }
            Distribution::GaussianRandomWalk { tau } => {
                let n = match x.shape() {
                    [n] => *n,
                    other => {
                        return Err(Error::ShapeMismatch {
                            context: "GaussianRandomWalk value".into(),
                            expected: vec![0],
                            got: other.to_vec(),
                        })
                    }
                };
                if n < 2 {
                    return Ok(Expr::scalar(0.0));
                }
                let d = x.slice(1, n) - x.slice(0, n - 1);
                bound(
                    0.5 * (tau.ln() - LN_2PI) - 0.5 * tau * (&d * &d),
                    tau.gt(&zero),
                )
            }
            Distribution::Bernoulli { p } => {
                let one = Expr::scalar(1.0);
                // select instead of x·log p + (1-x)·log(1-p): 0·log 0 must be 0, not NaN
                let term = Expr::switch(&x.ge(&one), &p.ln(), &(&one - p).ln())?;
                bound(term, and(x.ge(&zero), one.ge(x)))
            }
            Distribution::Flat => x * 0.0,
            Distribution::Custom(d) => return Ok(d.logp(value)),
        };
        Ok(elementwise.sum())
    }

    fn params(&self) -> Vec<&Expr> {
        match self {
            Distribution::Normal { mu, scale } => match scale {
                NormalScale::Sd(s) | NormalScale::Tau(s) => vec![mu, s],
            },
            Distribution::HalfNormal { sd } => vec![sd],
            Distribution::Exponential { rate } | Distribution::Poisson { rate } => vec![rate],
            Distribution::StudentT { nu, mu, lam } => vec![nu, mu, lam],
            Distribution::GaussianRandomWalk { tau } => vec![tau],
            Distribution::Bernoulli { p } => vec![p],
            _ => vec![],
        }
    }

    fn check_param_shapes(&self, value_shape: &[usize]) -> Result<()> {
        let target: Vec<usize> = match (self, value_shape) {
            (Distribution::GaussianRandomWalk { .. }, [n]) => vec![n.saturating_sub(1)],
            _ => value_shape.to_vec(),
        };
        for p in self.params() {
            if crate::array::broadcast_shapes(p.shape(), &target).as_deref() != Some(&target[..]) {
                return Err(Error::ShapeMismatch {
                    context: format!("{} parameter", self.family()),
                    expected: target,
                    got: p.shape().to_vec(),
                });
            }
        }
        Ok(())
    }

    /// Default starting value for a variable of `shape`, with parameter
    /// expressions evaluated at `at` (the model's current test point).
    pub fn default_testval(&self, shape: &[usize], at: &Point) -> Result<Array> {
        let param = |e: &Expr| -> Result<Array> { graph::eval(e, at) };
        let fill = |p: Array, f: &dyn Fn(f64) -> f64| -> Result<Array> {
            let target = crate::array::shape_size(shape);
            let data = if p.len() == 1 {
                vec![f(p.data()[0]); target]
            } else if p.len() == target {
                p.data().iter().map(|&v| f(v)).collect()
            } else {
                return Err(Error::ShapeMismatch {
                    context: "default test value".into(),
                    expected: shape.to_vec(),
                    got: p.shape().to_vec(),
                });
            };
            Array::new(shape.to_vec(), data, self.dtype())
        };
        match self {
            Distribution::Normal { mu, .. } => fill(param(mu)?, &|m| m),
            Distribution::StudentT { mu, .. } => fill(param(mu)?, &|m| m),
            Distribution::HalfNormal { sd } => fill(param(sd)?, &|s| s * (2.0 / PI).sqrt()),
            Distribution::Uniform { lower, upper } => {
                fill(Array::scalar(0.5 * (lower + upper)), &|m| m)
            }
            Distribution::Exponential { rate } => fill(param(rate)?, &|r| 1.0 / r),
            Distribution::Poisson { rate } => fill(param(rate)?, &|r| r.floor().max(0.0)),
            Distribution::DiscreteUniform { lower, upper } => {
                let mid = ((lower + upper) as f64 / 2.0).floor();
                fill(Array::scalar(mid), &|m| m)
            }
            Distribution::Bernoulli { p } => {
                fill(param(p)?, &|p| if p >= 0.5 { 1.0 } else { 0.0 })
            }
            Distribution::GaussianRandomWalk { .. } | Distribution::Flat => {
                fill(Array::scalar(0.0), &|m| m)
            }
            Distribution::Custom(d) => match d.default_value() {
                Some(v) => fill(Array::scalar(v), &|m| m),
                None => Err(Error::invalid(
                    "custom densities need an explicit test value",
                )),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logp_at(d: &Distribution, x: Array) -> f64 {
        let dtype = x.dtype();
        let shape = x.shape().to_vec();
        let v = Expr::input("x", &shape, dtype);
        let e = d.logp_expr(&v).unwrap();
        graph::eval(&e, &Point::new().with("x", x)).unwrap().data()[0]
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn scalar_goldens() {
        close(logp_at(&Distribution::normal(0.0, 1.0), Array::scalar(0.0)), -0.918_938_533_204_672_7);
        close(
            logp_at(&Distribution::student_t(1.0, 0.0, 1.0), Array::scalar(0.0)),
            -PI.ln(),
        );
        close(logp_at(&Distribution::poisson(1.0), Array::int_scalar(0)), -1.0);
        close(
            logp_at(&Distribution::discrete_uniform(1851, 1962).unwrap(), Array::int_scalar(1900)),
            -(112f64.ln()),
        );
        close(
            logp_at(&Distribution::gaussian_random_walk(1.0), Array::vector(vec![0.0; 3])),
            -1.837_877_066_409_345_3,
        );
        close(
            logp_at(&Distribution::half_normal(1.0), Array::scalar(1.0)),
            -0.725_791_352_644_727_4,
        );
        close(
            logp_at(&Distribution::exponential(50.0), Array::scalar(0.02)),
            50f64.ln() - 1.0,
        );
    }

    #[test]
    fn out_of_support_is_negative_infinity() {
        assert_eq!(logp_at(&Distribution::exponential(1.0), Array::scalar(-1.0)), f64::NEG_INFINITY);
        assert_eq!(logp_at(&Distribution::half_normal(1.0), Array::scalar(-0.1)), f64::NEG_INFINITY);
        assert_eq!(logp_at(&Distribution::poisson(2.0), Array::int_scalar(-1)), f64::NEG_INFINITY);
        assert_eq!(
            logp_at(&Distribution::uniform(0.0, 1.0).unwrap(), Array::scalar(1.5)),
            f64::NEG_INFINITY
        );
        assert_eq!(
            logp_at(&Distribution::discrete_uniform(1, 3).unwrap(), Array::int_scalar(4)),
            f64::NEG_INFINITY
        );
        assert_eq!(logp_at(&Distribution::bernoulli(0.3), Array::int_scalar(2)), f64::NEG_INFINITY);
    }

    #[test]
    fn bernoulli_extreme_probabilities_have_no_nan() {
        close(logp_at(&Distribution::bernoulli(1.0), Array::int_scalar(1)), 0.0);
        close(logp_at(&Distribution::bernoulli(0.0), Array::int_scalar(0)), 0.0);
        close(logp_at(&Distribution::bernoulli(0.25), Array::int_scalar(0)), 0.75f64.ln());
    }

    #[test]
    fn dtype_mismatch_is_rejected() {
        let v = Expr::input("k", &[], Dtype::Float);
        assert!(matches!(
            Distribution::poisson(1.0).logp_expr(&v),
            Err(Error::DtypeMismatch { .. })
        ));
    }

    #[test]
    fn default_testvals() {
        let p = Point::new();
        let tv = |d: Distribution, shape: &[usize]| d.default_testval(shape, &p).unwrap();
        assert_eq!(tv(Distribution::exponential(0.1), &[]).data(), &[10.0]);
        assert_eq!(tv(Distribution::uniform(1851.0, 1962.0).unwrap(), &[]).data(), &[1906.5]);
        let du = tv(Distribution::discrete_uniform(1851, 1962).unwrap(), &[]);
        assert_eq!(du.data(), &[1906.0]);
        assert_eq!(du.dtype(), Dtype::Int);
        let grw = tv(Distribution::gaussian_random_walk(1.0), &[400]);
        assert_eq!(grw.shape(), &[400]);
        assert!(grw.data().iter().all(|&v| v == 0.0));
        let hn = tv(Distribution::half_normal(2.0), &[]);
        close(hn.data()[0], 2.0 * (2.0 / PI).sqrt());
        assert!(tv(Distribution::normal(3.0, 1.0), &[2]).data().iter().all(|&v| v == 3.0));
    }
}
