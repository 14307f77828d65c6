//! Data sets used by the demos, tests and benchmarks.

use rand_distr::{Distribution as _, StandardNormal};

use crate::rng::chain_rng;

/// Marker for an unrecorded count.
pub const MISSING: i64 = -999;

/// Yearly counts of British coal-mining disasters, 1851 through 1961.
pub const DISASTER_COUNTS: [i64; 111] = [
    4, 5, 4, 0, 1, 4, 3, 4, 0, 6, 3, 3, 4, 0, 2, 6, 3, 3, 5, 4, 5, 3, 1, 4, 4, 1, 5, 5, 3, 4, 2, 5,
    2, 2, 3, 4, 2, 1, 3, MISSING, 2, 1, 1, 1, 1, 3, 0, 0, 1, 0, 1, 1, 0, 0, 3, 1, 0, 3, 2, 2, 0, 1,
    1, 1, 0, 1, 0, 1, 0, 0, 0, 2, 1, 0, 0, 0, 1, 1, 0, 2, 3, 3, 1, MISSING, 2, 1, 1, 1, 1, 2, 4, 2,
    0, 0, 1, 4, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1,
];

pub const FIRST_YEAR: i64 = 1851;

pub struct Disasters {
    pub years: Vec<i64>,
    pub counts: Vec<i64>,
    /// True where the count is missing.
    pub mask: Vec<bool>,
}

pub fn disasters() -> Disasters {
    let counts = DISASTER_COUNTS.to_vec();
    Disasters {
        years: (0..counts.len() as i64).map(|i| FIRST_YEAR + i).collect(),
        mask: counts.iter().map(|&c| c == MISSING).collect(),
        counts,
    }
}

/// 400 synthetic daily returns from a stochastic-volatility process with
/// Student-t noise, bundled for reproducible volatility demos.
pub fn returns_fixture() -> Vec<f64> {
    include_str!("../data/returns_fixture.csv")
        .lines()
        .skip(1)
        .map(|l| l.trim().parse().expect("fixture is well formed"))
        .collect()
}

pub struct LinearData {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub y: Vec<f64>,
}

pub const LINEAR_ALPHA: f64 = 1.0;
pub const LINEAR_BETA: [f64; 2] = [1.0, 2.5];
pub const LINEAR_SIGMA: f64 = 1.0;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// 100 points of `y = 1 + x1 + 2.5·x2 + ε`, `x1` on [0, 1], `x2` on [0, 0.2].
pub fn simulate_linear(seed: u64) -> LinearData {
    let n = 100;
    let x1 = linspace(0.0, 1.0, n);
    let x2 = linspace(0.0, 0.2, n);
    let mut rng = chain_rng(seed, 0);
    let y = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| {
            let e: f64 = StandardNormal.sample(&mut rng);
            LINEAR_ALPHA + LINEAR_BETA[0] * a + LINEAR_BETA[1] * b + LINEAR_SIGMA * e
        })
        .collect();
    LinearData { x1, x2, y }
}
