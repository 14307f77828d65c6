use std::fs;

use miniprob::backends::{load, save};
use miniprob::inference::{sample, sample_into, SampleConfig};
use miniprob::samplers::{Metropolis, Nuts};
use miniprob::stats::summary_text;
use miniprob::{Array, Distribution, Dtype, Error, Model, ModelBuilder, TextBackend, Trace, VarSpec};
use proptest::prelude::*;

fn model() -> Model {
    let mut b = ModelBuilder::new();
    let mu = b.add_free("mu", Distribution::normal(0.0, 1.0), &[2], None).unwrap();
    b.add_free("sigma", Distribution::exponential(1.0), &[], None).unwrap();
    b.add_free("k", Distribution::discrete_uniform(0, 5).unwrap(), &[], None).unwrap();
    b.add_deterministic("mu_sum", mu.sum()).unwrap();
    b.finalize().unwrap()
}

fn steps() -> Vec<Box<dyn miniprob::samplers::StepMethod>> {
    vec![Box::new(Nuts::new(&["mu", "sigma"])), Box::new(Metropolis::new(&["k"]))]
}

fn assert_same(a: &Trace, b: &Trace) {
    assert_eq!(a.vars(), b.vars());
    assert_eq!(a.nchains(), b.nchains());
    for v in a.var_names() {
        for c in 0..a.nchains() {
            let (x, y) = (a.raw(v, c).unwrap(), b.raw(v, c).unwrap());
            assert_eq!(x.len(), y.len());
            assert!(x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits()), "{v} chain {c}");
        }
    }
}

#[test]
fn durable_round_trip_is_bit_exact() {
    let m = model();
    let dir = tempfile::tempdir().unwrap();
    let cfg = SampleConfig::new(300, 8).chains(2);
    let t = sample_into(&m, steps(), &cfg, &mut TextBackend::new(dir.path())).unwrap();
    let back = load(dir.path()).unwrap();
    assert_same(&t, &back);
    assert_eq!(back.len(), 600);
    assert_eq!(back.get("mu").unwrap().shape(), &[600, 2]);
    assert!(back.is_int("k").unwrap());
    assert_eq!(summary_text(&t, &[]).unwrap(), summary_text(&back, &[]).unwrap());

    let header = fs::read_to_string(dir.path().join("chain-1.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "mu__0,mu__1,sigma_log,sigma,k,mu_sum");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["version"], 1);
    assert_eq!(meta["chains"], 2);
    assert_eq!(meta["draws"], 300);
}

#[test]
fn memory_and_durable_backends_agree() {
    let m = model();
    let cfg = SampleConfig::new(200, 21);
    let dir = tempfile::tempdir().unwrap();
    let mem = sample(&m, steps(), &cfg).unwrap();
    let disk = sample_into(&m, steps(), &cfg, &mut TextBackend::new(dir.path())).unwrap();
    assert_same(&mem, &disk);
    assert_same(&mem, &load(dir.path()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_double_survives_the_text_format(
        values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..30),
    ) {
        let n = values.len();
        let t = Trace::from_buffers(vec![VarSpec::new("x", &[], Dtype::Float)], vec![vec![values]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save(&t, dir.path()).unwrap();
        let back = load(dir.path()).unwrap();
        prop_assert_eq!(back.len(), n);
        for (a, b) in t.raw("x", 0).unwrap().iter().zip(back.raw("x", 0).unwrap()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn negative_index_reads_the_end_of_the_last_chain() {
    let vars = vec![VarSpec::new("a", &[], Dtype::Float), VarSpec::new("b", &[2], Dtype::Float)];
    let t = Trace::from_buffers(
        vars,
        vec![
            vec![vec![1.0, 2.0], vec![0.0, 0.0, 1.0, 1.0]],
            vec![vec![3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0]],
        ],
    )
    .unwrap();
    assert_eq!(t.get("a").unwrap().data(), &[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(t.get("b").unwrap().shape(), &[4, 2]);
    let last = t.point(-1).unwrap();
    assert_eq!(last.scalar("a").unwrap(), 4.0);
    assert_eq!(last.get("b").unwrap(), &Array::vector(vec![7.0, 8.0]));
    assert_eq!(t.point(-2).unwrap().scalar("a").unwrap(), 3.0);
    assert_eq!(t.component("b", 1).unwrap(), vec![0.0, 1.0, 6.0, 8.0]);
}

#[test]
fn load_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load(dir.path()), Err(Error::CorruptMeta(_))));

    fs::write(dir.path().join("meta.json"), "{not json").unwrap();
    assert!(matches!(load(dir.path()), Err(Error::CorruptMeta(_))));

    let t = Trace::from_buffers(
        vec![VarSpec::new("x", &[], Dtype::Float)],
        vec![vec![vec![1.0]], vec![vec![2.0]]],
    )
    .unwrap();
    save(&t, dir.path()).unwrap();
    fs::remove_file(dir.path().join("chain-1.csv")).unwrap();
    assert!(matches!(load(dir.path()), Err(Error::MissingChainFile(_))));

    save(&t, dir.path()).unwrap();
    fs::write(dir.path().join("chain-0.csv"), "x\nnope\n").unwrap();
    assert!(matches!(load(dir.path()), Err(Error::CorruptData(_))));
    fs::write(dir.path().join("chain-0.csv"), "y\n1.0\n").unwrap();
    assert!(matches!(load(dir.path()), Err(Error::CorruptData(_))));
}
