//! Bijections from constrained supports onto the real line.
//!
//! Densities of transformed variables are evaluated in the unconstrained
//! coordinate `y` as `logp(x(y)) + log|dx/dy|`.

use std::fmt;

use crate::distributions::Support;
use crate::error::{Error, Result};
use crate::graph::Expr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    /// x = exp(y) on (0, ∞).
    Log,
    /// x = a + (b - a)·σ(y) on (a, b).
    Interval { lower: f64, upper: f64 },
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Log => f.write_str("log"),
            Transform::Interval { lower, upper } => write!(f, "interval({lower}, {upper})"),
        }
    }
}

fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// log σ(y), stable in both tails.
fn log_logistic(y: f64) -> f64 {
    if y >= 0.0 {
        -(-y).exp().ln_1p()
    } else {
        y - y.exp().ln_1p()
    }
}

impl Transform {
    /// Transform implied by a support, if any.
    pub fn for_support(support: Support) -> Option<Transform> {
        match support {
            Support::Positive => Some(Transform::Log),
            Support::Interval(lower, upper) => Some(Transform::Interval { lower, upper }),
            _ => None,
        }
    }

    pub fn suffix(&self) -> &'static str {
        match self {
            Transform::Log => "_log",
            Transform::Interval { .. } => "_interval",
        }
    }

    pub fn forward(&self, x: f64) -> Result<f64> {
        let outside = || Error::OutsideSupport {
            transform: self.to_string(),
            value: x,
        };
        match *self {
            Transform::Log => {
                if x > 0.0 && x.is_finite() {
                    Ok(x.ln())
                } else {
                    Err(outside())
                }
            }
            Transform::Interval { lower, upper } => {
                if x > lower && x < upper {
                    let u = (x - lower) / (upper - lower);
                    Ok(u.ln() - (-u).ln_1p())
                } else {
                    Err(outside())
                }
            }
        }
    }

    pub fn backward(&self, y: f64) -> f64 {
        match *self {
            Transform::Log => y.exp(),
            Transform::Interval { lower, upper } => lower + (upper - lower) * logistic(y),
        }
    }

    /// log |dx/dy| at `y`.
    pub fn log_jacobian(&self, y: f64) -> f64 {
        match *self {
            Transform::Log => y,
            Transform::Interval { lower, upper } => {
                (upper - lower).ln() + log_logistic(y) + log_logistic(-y)
            }
        }
    }

    pub fn backward_expr(&self, y: &Expr) -> Expr {
        match *self {
            Transform::Log => y.exp(),
            Transform::Interval { lower, upper } => lower + (upper - lower) * y.sigmoid(),
        }
    }

    /// Summed log-Jacobian as a graph.
    pub fn log_jacobian_expr(&self, y: &Expr) -> Expr {
        match *self {
            Transform::Log => y.sum(),
            Transform::Interval { lower, upper } => {
                let per = (upper - lower).ln() + y.sigmoid().ln() + (-y).sigmoid().ln();
                per.sum()
            }
        }
    }
}
