use miniprob::stats::{
    ess, hpd, kde, mc_error, mean, quantile, sd, summary, summary_text, traceplot_data, write_plot_data, Marginal,
    SUMMARY_QUANTILES,
};
use miniprob::{Dtype, Error, Trace, VarSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let e = normals(n + 1000, seed);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for (i, z) in e.into_iter().enumerate() {
        x = phi * x + z;
        if i >= 1000 {
            out.push(x);
        }
    }
    out
}

/// Type-7 quantile by locating the bracketing order statistics one at a time.
fn brute_quantile(xs: &[f64], p: f64) -> f64 {
    let mut s = xs.to_vec();
    for i in 0..s.len() {
        for j in 0..s.len() - 1 - i {
            if s[j] > s[j + 1] {
                s.swap(j, j + 1);
            }
        }
    }
    let n = s.len();
    if n == 1 {
        return s[0];
    }
    for k in 0..n - 1 {
        let (a, b) = (k as f64 / (n - 1) as f64, (k + 1) as f64 / (n - 1) as f64);
        if p >= a && p <= b {
            let t = (p - a) * (n - 1) as f64;
            return s[k] + t * (s[k + 1] - s[k]);
        }
    }
    s[n - 1]
}

/// Narrowest interval over every pair of order statistics covering `m` samples.
fn brute_hpd_width(xs: &[f64], m: usize) -> f64 {
    let mut best = f64::INFINITY;
    for &lo in xs {
        for &hi in xs {
            if hi >= lo {
                let count = xs.iter().filter(|&&v| v >= lo && v <= hi).count();
                if count >= m {
                    best = best.min(hi - lo);
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn quantiles_match_brute_force(xs in prop::collection::vec(-1e3..1e3f64, 1..80), p in 0.0..=1.0f64) {
        let got = quantile(&xs, p);
        let want = brute_quantile(&xs, p);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{} vs {}", got, want);
        for q in SUMMARY_QUANTILES {
            let (g, w) = (quantile(&xs, q / 100.0), brute_quantile(&xs, q / 100.0));
            prop_assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0));
        }
    }

    #[test]
    fn hpd_is_the_narrowest_window(xs in prop::collection::vec(-50.0..50.0f64, 2..40), alpha in 0.01..0.5f64) {
        let (lo, hi) = hpd(&xs, alpha).unwrap();
        let n = xs.len();
        let m = (((1.0 - alpha) * n as f64) - 1e-9).ceil().max(1.0) as usize;
        let inside = xs.iter().filter(|&&v| v >= lo && v <= hi).count();
        prop_assert!(inside >= m);
        prop_assert!((hi - lo - brute_hpd_width(&xs, m)).abs() < 1e-12);
    }

    #[test]
    fn stats_ignore_chain_order(seed in 0..1000u64, split in 1..4usize) {
        let xs = normals(400, seed);
        let (a, b) = xs.split_at(100 * split);
        let swapped: Vec<f64> = b.iter().chain(a).copied().collect();
        prop_assert_eq!(mean(&xs), mean(&swapped));
        prop_assert_eq!(sd(&xs), sd(&swapped));
        for q in SUMMARY_QUANTILES {
            prop_assert_eq!(quantile(&xs, q / 100.0), quantile(&swapped, q / 100.0));
        }
        prop_assert_eq!(hpd(&xs, 0.05).unwrap(), hpd(&swapped, 0.05).unwrap());
    }
}

#[test]
fn hpd_examples() {
    let xs: Vec<f64> = (1..=100).map(f64::from).collect();
    assert_eq!(hpd(&xs, 0.05).unwrap(), (1.0, 95.0));
    assert_eq!(hpd(&[2.0; 10], 0.05).unwrap(), (2.0, 2.0));
    assert!(matches!(hpd(&[1.0], 0.05), Err(Error::TooFewSamples { needed: 2, got: 1 })));

    let (lo, hi) = hpd(&normals(100_000, 5), 0.05).unwrap();
    assert!((lo + 1.959964).abs() < 0.05 && (hi - 1.959964).abs() < 0.05, "({lo}, {hi})");
}

#[test]
fn hpd_is_no_wider_than_equal_tails() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1000, 5000, 20000] {
        let sets = [
            normals(n, n as u64),
            (0..n).map(|_| -rng.random::<f64>().ln()).collect::<Vec<_>>(),
        ];
        for xs in sets {
            let (lo, hi) = hpd(&xs, 0.05).unwrap();
            let eq = quantile(&xs, 0.975) - quantile(&xs, 0.025);
            assert!(hi - lo <= eq, "n {n}: {} > {eq}", hi - lo);
        }
    }
}

#[test]
fn mc_error_oracles() {
    let xs = normals(20_000, 1);
    let e = mc_error(&xs).unwrap();
    let want = 1.0 / (20_000f64).sqrt();
    assert!((e / want - 1.0).abs() < 0.3, "{e}");

    // AR(1) with unit innovations: the long-run sd of the mean is 1/((1 − φ)√n)
    let n = 200_000;
    let xs = ar1(n, 0.5, 2);
    let want = 1.0 / (0.5 * (n as f64).sqrt());
    let e = mc_error(&xs).unwrap();
    assert!((e / want - 1.0).abs() < 0.4, "{e} vs {want}");

    assert_eq!(mc_error(&[3.0; 40]).unwrap(), 0.0);
    assert!(matches!(mc_error(&[0.0; 19]), Err(Error::TooFewSamples { .. })));
}

#[test]
fn ess_oracles() {
    let e = ess(&normals(10_000, 3)).unwrap();
    assert!((8000.0..=12000.0).contains(&e), "{e}");

    let n = 100_000;
    let ratio = ess(&ar1(n, 0.9, 4)).unwrap() / n as f64;
    let want = 0.1 / 1.9;
    assert!((ratio / want - 1.0).abs() < 0.4, "{ratio}");

    assert_eq!(ess(&[1.0; 500]).unwrap(), 0.0);
    assert!(matches!(ess(&[1.0; 99]), Err(Error::TooFewSamples { .. })));
}

#[test]
fn kde_is_a_density() {
    for xs in [normals(2000, 6), ar1(3000, 0.3, 7).iter().map(|v| v.exp()).collect()] {
        let (x, y) = kde(&xs);
        assert_eq!(x.len(), 200);
        let area: f64 = x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum();
        assert!((area - 1.0).abs() < 0.01, "{area}");
        assert!(y.iter().all(|&v| v >= 0.0));
    }
}

fn small_trace() -> Trace {
    let vars = vec![
        VarSpec::new("alpha", &[], Dtype::Float),
        VarSpec::new("beta", &[2], Dtype::Float),
        VarSpec::new("k", &[], Dtype::Int),
    ];
    let chain = |seed: u64| {
        let a = normals(100, seed);
        let b = normals(200, seed + 10);
        let k: Vec<f64> = a.iter().map(|v| (v * 3.0).round().abs()).collect();
        vec![a, b, k]
    };
    Trace::from_buffers(vars, vec![chain(1), chain(2)]).unwrap()
}

#[test]
fn summary_rows_follow_flattened_names() {
    let t = small_trace();
    let s = summary(&t, &[]).unwrap();
    let names: Vec<&str> = s.iter().flat_map(|(_, rows)| rows.iter().map(|r| r.name.as_str())).collect();
    assert_eq!(names, ["alpha", "beta__0", "beta__1", "k"]);
    let alpha = t.component("alpha", 0).unwrap();
    let row = &s[0].1[0];
    assert_eq!(row.mean, mean(&alpha));
    assert!(row.quantiles.windows(2).all(|w| w[0] <= w[1]));
    assert!(row.hpd_lower <= row.quantiles[2] && row.quantiles[2] <= row.hpd_upper);

    let only = summary(&t, &["beta".to_string()]).unwrap();
    assert_eq!(only.len(), 1);
    assert!(matches!(summary(&t, &["gamma".to_string()]), Err(Error::UnknownVariable(n)) if n == "gamma"));

    let text = summary_text(&t, &[]).unwrap();
    for head in ["alpha:", "beta:", "k:", "Mean", "MC Error", "95% HPD interval", "Posterior quantiles:"] {
        assert!(text.contains(head), "missing {head}");
    }
}

#[test]
fn constant_trace_summary() {
    let t = Trace::from_buffers(vec![VarSpec::new("c", &[], Dtype::Float)], vec![vec![vec![5.0; 100]]]).unwrap();
    let row = &summary(&t, &[]).unwrap()[0].1[0];
    assert_eq!((row.mean, row.sd, row.mc_error), (5.0, 0.0, 0.0));
    assert_eq!((row.hpd_lower, row.hpd_upper), (5.0, 5.0));
}

#[test]
fn plot_data_files() {
    let t = small_trace();
    let data = traceplot_data(&t, &[]).unwrap();
    assert_eq!(data.len(), 4);
    assert!(matches!(data[1].marginal, Marginal::Density { .. }));
    assert!(matches!(data[3].marginal, Marginal::Histogram(_)));
    assert_eq!(data[0].draws.len(), 200);

    let dir = tempfile::tempdir().unwrap();
    let written = write_plot_data(&data, dir.path()).unwrap();
    let mut names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "alpha_density.csv",
            "alpha_draws.csv",
            "beta__0_density.csv",
            "beta__0_draws.csv",
            "beta__1_density.csv",
            "beta__1_draws.csv",
            "k_draws.csv",
            "k_hist.csv",
        ]
    );
    let density = std::fs::read_to_string(dir.path().join("alpha_density.csv")).unwrap();
    assert!(density.starts_with("x,density\n"));
    assert_eq!(density.lines().count(), 201);
    let draws = std::fs::read_to_string(dir.path().join("beta__1_draws.csv")).unwrap();
    assert!(draws.starts_with("draw,value\n"));
    assert_eq!(draws.lines().count(), 201);
}
