use std::f64::consts::PI;

use miniprob::graph::eval;
use miniprob::{Array, Distribution, Dtype, Error, Expr, Point};
use proptest::prelude::*;

fn logp(d: &Distribution, value: Array) -> f64 {
    eval(&d.logp_expr(&Expr::constant(value)).unwrap(), &Point::new()).unwrap().data()[0]
}

fn at(d: &Distribution, x: f64) -> f64 {
    logp(d, Array::scalar(x))
}

fn at_int(d: &Distribution, k: i64) -> f64 {
    logp(d, Array::int_scalar(k))
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[test]
fn closed_form_values() {
    let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    close(at(&Distribution::normal(0.0, 1.0), 0.0), -HALF_LN_2PI);
    close(at(&Distribution::student_t(1.0, 0.0, 1.0), 0.0), -PI.ln());
    close(at_int(&Distribution::poisson(1.0), 0), -1.0);
    close(at_int(&Distribution::discrete_uniform(1851, 1962).unwrap(), 1900), -(112f64).ln());
    close(
        logp(&Distribution::gaussian_random_walk(1.0), Array::vector(vec![0.0; 3])),
        -2.0 * HALF_LN_2PI,
    );
    close(at(&Distribution::half_normal(1.0), 1.0), 2f64.ln() - HALF_LN_2PI - 0.5);
    close(at(&Distribution::exponential(50.0), 0.02), 50f64.ln() - 1.0);
}

#[test]
fn reference_values() {
    // computed with scipy.stats
    let cases = [
        (at(&Distribution::normal(0.3, 1.7), -1.2), -1.838840140668227),
        (at(&Distribution::half_normal(2.5), 0.7), -1.1812820845188825),
        (at(&Distribution::exponential(0.1), 3.3), -2.632585092994046),
        (at(&Distribution::uniform(-2.0, 5.0).unwrap(), 1.1), -1.9459101490553132),
        (at_int(&Distribution::poisson(3.5), 6), -2.562673401037893),
        (at(&Distribution::student_t(4.5, 0.2, 2.0), 1.3), -1.81091762435691),
        (at(&Distribution::student_t(0.1, 0.0, 1e4), 0.003), 2.3422298072249914),
        (at_int(&Distribution::bernoulli(0.3), 1), -1.2039728043259361),
        (at_int(&Distribution::bernoulli(0.3), 0), -0.35667494393873234),
        (
            logp(&Distribution::gaussian_random_walk(4.0), Array::vector(vec![0.5, 1.0, 0.2])),
            -2.231582705289455,
        ),
    ];
    for (i, (got, want)) in cases.into_iter().enumerate() {
        assert!((got - want).abs() < 1e-9, "case {i}: {got} vs {want}");
    }
}

#[test]
fn outside_support_is_negative_infinity() {
    let ninf = f64::NEG_INFINITY;
    assert_eq!(at(&Distribution::exponential(1.0), -0.5), ninf);
    assert_eq!(at(&Distribution::half_normal(1.0), -1e-9), ninf);
    assert_eq!(at(&Distribution::uniform(0.0, 1.0).unwrap(), 1.5), ninf);
    assert_eq!(at_int(&Distribution::poisson(2.0), -1), ninf);
    assert_eq!(at_int(&Distribution::discrete_uniform(1, 3).unwrap(), 4), ninf);
    assert_eq!(at_int(&Distribution::bernoulli(0.5), 2), ninf);
    assert_eq!(at(&Distribution::normal(0.0, -1.0), 0.0), ninf);
    assert_eq!(at_int(&Distribution::bernoulli(0.0), 0), 0.0);
    assert_eq!(at_int(&Distribution::bernoulli(1.0), 0), ninf);
}

#[test]
fn flat_is_zero_and_dtypes_are_checked() {
    assert_eq!(logp(&Distribution::flat(), Array::vector(vec![1e9, -3.0])), 0.0);
    let err = Distribution::poisson(1.0).logp_expr(&Expr::scalar(1.0));
    assert!(matches!(err, Err(Error::DtypeMismatch { .. })));
    let err = Distribution::normal(0.0, 1.0).logp_expr(&Expr::constant(Array::int_scalar(1)));
    assert!(matches!(err, Err(Error::DtypeMismatch { .. })));
}

#[test]
fn default_test_values() {
    let p = Point::new();
    let tv = |d: Distribution, shape: &[usize]| d.default_testval(shape, &p).unwrap();
    assert_eq!(tv(Distribution::exponential(0.1), &[]).data(), &[10.0]);
    assert_eq!(tv(Distribution::uniform(1851.0, 1962.0).unwrap(), &[]).data(), &[1906.5]);
    let du = tv(Distribution::discrete_uniform(1851, 1962).unwrap(), &[]);
    assert_eq!((du.data(), du.dtype()), (&[1906.0][..], Dtype::Int));
    let grw = tv(Distribution::gaussian_random_walk(1.0), &[400]);
    assert_eq!(grw.shape(), &[400]);
    assert!(grw.data().iter().all(|&v| v == 0.0));
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

/// Widen `[lo, hi]` until the density at both ends is negligible, then
/// integrate.
fn normalization(d: &Distribution, mut lo: f64, mut hi: f64, lo_fixed: bool) -> f64 {
    let dens = |x: f64| at(d, x).exp();
    while !lo_fixed && dens(lo) > 1e-12 {
        lo -= hi - lo;
    }
    while dens(hi) > 1e-12 && hi < 1e7 {
        hi += hi - lo;
    }
    trapezoid(dens, lo, hi, 50_000)
}

#[test]
fn continuous_densities_normalize() {
    let cases: Vec<(Distribution, f64, f64, bool)> = vec![
        (Distribution::normal(-2.0, 0.3), -3.0, -1.0, false),
        (Distribution::normal_tau(1.0, 0.25), -2.0, 4.0, false),
        (Distribution::half_normal(3.0), 0.0, 5.0, true),
        (Distribution::exponential(0.5), 0.0, 5.0, true),
        (Distribution::uniform(1851.0, 1962.0).unwrap(), 1851.0, 1962.0, true),
        (Distribution::student_t(6.0, 0.5, 4.0), -2.0, 3.0, false),
        (Distribution::student_t(30.0, 0.0, 1.0), -3.0, 3.0, false),
    ];
    for (d, lo, hi, fixed) in cases {
        let z = normalization(&d, lo, hi, fixed);
        assert!((0.999..=1.001).contains(&z), "{}: {z}", d.family());
    }
}

#[test]
fn discrete_densities_sum_to_one() {
    let du = Distribution::discrete_uniform(1851, 1962).unwrap();
    let s: f64 = (1851..=1962).map(|k| at_int(&du, k).exp()).sum();
    assert!((s - 1.0).abs() < 1e-9, "{s}");

    for rate in [0.3, 1.0, 4.5, 25.0] {
        let d = Distribution::poisson(rate);
        let (mut total, mut k) = (0.0, 0);
        while total < 1.0 - 1e-12 {
            total += at_int(&d, k).exp();
            k += 1;
        }
        assert!((total - 1.0).abs() < 1e-9, "rate {rate}: {total}");
    }

    let b = Distribution::bernoulli(0.27);
    assert!((at_int(&b, 0).exp() + at_int(&b, 1).exp() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sd_and_precision_agree(mu in -5.0..5.0f64, sd in 0.05..20.0f64, x in -30.0..30.0f64) {
        let a = at(&Distribution::normal(mu, sd), x);
        let b = at(&Distribution::normal_tau(mu, 1.0 / (sd * sd)), x);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn student_t_approaches_normal(mu in -3.0..3.0f64, lam in 0.1..10.0f64, z in -4.0..4.0f64) {
        // the gap grows like z⁴/ν, so stay within four scales of the centre
        let x = mu + z / lam.sqrt();
        let t = at(&Distribution::student_t(1e6, mu, lam), x);
        let n = at(&Distribution::normal(mu, 1.0 / lam.sqrt()), x);
        prop_assert!((t - n).abs() < 1e-4, "{} vs {}", t, n);
    }
}
