//! Probabilistic programming: build a model from distributions and graph
//! expressions, then fit it by MAP optimization or MCMC.
//!
//! ```
//! use miniprob::{Distribution, ModelBuilder, Expr, inference, samplers};
//!
//! let mut b = ModelBuilder::new();
//! let mu = b.add_free("mu", Distribution::normal(0.0, 10.0), &[], None).unwrap();
//! let data = miniprob::Array::vector(vec![0.9, 1.1, 1.3]);
//! b.add_observed("y", Distribution::normal(mu, 1.0), data, None).unwrap();
//! let model = b.finalize().unwrap();
//!
//! let map = inference::find_map(&model, &Default::default()).unwrap();
//! assert!((map.scalar("mu").unwrap() - 1.1).abs() < 0.01);
//! ```

pub mod array;
pub mod backends;
pub mod datasets;
pub mod distributions;
pub mod error;
pub mod glm;
pub mod graph;
pub mod inference;
pub mod model;
pub mod point;
pub mod samplers;
pub mod stats;
pub mod rng;
pub mod transforms;

pub use array::{Array, Dtype};
pub use backends::{Backend, MemoryBackend, TextBackend, Trace, VarSpec};
pub use distributions::{Distribution, LogDensity, Support};
pub use error::{Error, Result};
pub use graph::Expr;
pub use model::{FlatLayout, Model, ModelBuilder};
pub use point::Point;
pub use transforms::Transform;
