//! Fixtures shared by the benchmarks.

use miniprob::{datasets, Array, Distribution, Expr, Model, ModelBuilder};

/// The simulated two-predictor regression.
pub fn linear_model() -> Model {
    let d = datasets::simulate_linear(0);
    let mut b = ModelBuilder::new();
    let alpha = b.add_free("alpha", Distribution::normal(0.0, 10.0), &[], None).unwrap();
    let beta = b.add_free("beta", Distribution::normal(0.0, 10.0), &[2], None).unwrap();
    let sigma = b.add_free("sigma", Distribution::half_normal(1.0), &[], None).unwrap();
    let mu = alpha
        + beta.index(0) * Expr::constant(Array::vector(d.x1))
        + beta.index(1) * Expr::constant(Array::vector(d.x2));
    b.add_observed("Y_obs", Distribution::normal(mu, sigma), Array::vector(d.y), None)
        .unwrap();
    b.finalize().unwrap()
}

/// Stochastic volatility over `n` synthetic returns.
pub fn volatility_model(n: usize) -> Model {
    let r = &datasets::returns_fixture()[..n];
    let mut b = ModelBuilder::new();
    let nu = b
        .add_free("nu", Distribution::exponential(0.1), &[], Some(Array::scalar(0.1)))
        .unwrap();
    let sigma = b
        .add_free("sigma", Distribution::exponential(50.0), &[], Some(Array::scalar(0.1)))
        .unwrap();
    let s = b
        .add_free("s", Distribution::gaussian_random_walk(sigma.powf(-2.0)), &[n], None)
        .unwrap();
    let vol = b.add_deterministic("volatility_process", (s * -2.0).exp()).unwrap();
    b.add_observed(
        "r",
        Distribution::student_t(nu, 0.0, vol.powf(-1.0)),
        Array::vector(r.to_vec()),
        None,
    )
    .unwrap();
    b.finalize().unwrap()
}
