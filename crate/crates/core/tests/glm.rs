use miniprob::glm::{build_model, design_columns, design_matrix, parse_formula, Family, Formula, Table};
use miniprob::{Array, Error, Point};
use proptest::prelude::*;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn table() -> Table {
    let x1: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
    let x2: Vec<f64> = x1.iter().map(|v| 0.2 * v * v).collect();
    let y: Vec<f64> = x1.iter().zip(&x2).enumerate().map(|(i, (a, b))| 1.0 + a + 2.5 * b + ((i * 7) % 5) as f64 * 0.1 - 0.2).collect();
    Table::new(vec![("x1".into(), x1), ("x2".into(), x2), ("y".into(), y)]).unwrap()
}

fn normal_lp(x: f64, mu: f64, sd: f64) -> f64 {
    -HALF_LN_2PI - sd.ln() - 0.5 * ((x - mu) / sd).powi(2)
}

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_.]{0,6}"
}

fn formula() -> impl Strategy<Value = Formula> {
    (ident(), prop::collection::vec(ident(), 1..6), any::<bool>()).prop_filter_map(
        "response and terms must be distinct",
        |(response, terms, intercept)| {
            let mut seen = std::collections::HashSet::new();
            let ok = terms.iter().all(|t| *t != response && seen.insert(t.clone()));
            ok.then_some(Formula { response, terms, intercept })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn formulas_round_trip(f in formula(), pad in "[ \t]{0,2}") {
        let text = f.to_string().replace(' ', &pad);
        let parsed = parse_formula(&text).unwrap();
        prop_assert_eq!(&parsed, &f);
        prop_assert_eq!(parse_formula(&parsed.to_string()).unwrap(), parsed);
    }
}

#[test]
fn parse_examples_and_errors() {
    let f = parse_formula("y ~ x1 + x2").unwrap();
    assert_eq!((f.response.as_str(), f.terms.clone(), f.intercept), ("y", vec!["x1".into(), "x2".into()], true));
    assert!(!parse_formula("y ~ 0 + x1").unwrap().intercept);
    assert!(matches!(parse_formula("y ~ x1 + + x2"), Err(Error::Syntax { offset: 9, .. })));
    assert!(matches!(parse_formula("y ~ x1 x2"), Err(Error::Syntax { offset: 7, .. })));
    assert!(matches!(parse_formula("y ~ a:b"), Err(Error::Syntax { .. })));
    assert!(matches!(parse_formula("y ~ log(x)"), Err(Error::Syntax { .. })));
    assert!(matches!(parse_formula("y x"), Err(Error::Syntax { offset: 2, .. })));
    assert!(matches!(parse_formula("y ~ a + b + a"), Err(Error::DuplicateTerm(t)) if t == "a"));
    assert!(matches!(parse_formula("y ~ y"), Err(Error::ResponseInTerms(_))));
}

#[test]
fn design_columns_put_intercept_first() {
    let f = parse_formula("y ~ x2 + x1").unwrap();
    assert_eq!(design_columns(&f), ["Intercept", "x2", "x1"]);
    let t = table();
    let x = design_matrix(&f, &t).unwrap();
    assert!(x[0].iter().all(|&v| v == 1.0));
    assert_eq!(x[1], t.column("x2").unwrap());
    let no_int = parse_formula("y ~ 0 + x1").unwrap();
    assert_eq!(design_columns(&no_int), ["x1"]);
}

#[test]
fn normal_family_matches_hand_computed_density() {
    let t = table();
    let m = build_model(&parse_formula("y ~ x1 + x2").unwrap(), &t, Family::Normal).unwrap();
    let mut names = m.continuous_value_names();
    names.sort();
    assert_eq!(names, ["Intercept", "sd_log", "x1", "x2"]);

    let (x1, x2, y) = (t.column("x1").unwrap(), t.column("x2").unwrap(), t.column("y").unwrap());
    for (a, b1, b2, ls) in [(0.0, 0.0, 0.0, 0.0), (1.1, 0.8, 2.4, -1.3), (-3.0, 10.0, -4.0, 0.7)] {
        let sd = f64::exp(ls);
        let mut want = normal_lp(a, 0.0, 100.0) + normal_lp(b1, 0.0, 100.0) + normal_lp(b2, 0.0, 100.0);
        want += 2f64.ln() + normal_lp(sd, 0.0, 10.0) + ls;
        for i in 0..y.len() {
            want += normal_lp(y[i], a + b1 * x1[i] + b2 * x2[i], sd);
        }
        let p = Point::new()
            .with("Intercept", Array::scalar(a))
            .with("x1", Array::scalar(b1))
            .with("x2", Array::scalar(b2))
            .with("sd_log", Array::scalar(ls));
        let got = m.logp(&p).unwrap();
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn binomial_family_matches_hand_computed_density() {
    let t = table();
    let y: Vec<f64> = t.column("y").unwrap().iter().map(|&v| if v > 1.5 { 1.0 } else { 0.0 }).collect();
    let x1 = t.column("x1").unwrap().to_vec();
    let bt = Table::new(vec![("x1".into(), x1.clone()), ("y".into(), y.clone())]).unwrap();
    let m = build_model(&parse_formula("y ~ x1").unwrap(), &bt, Family::Binomial).unwrap();
    for (a, b) in [(0.0, 0.0), (-2.0, 3.5), (0.4, -1.0)] {
        let mut want = normal_lp(a, 0.0, 100.0) + normal_lp(b, 0.0, 100.0);
        for i in 0..y.len() {
            let eta: f64 = a + b * x1[i];
            let p = 1.0 / (1.0 + (-eta).exp());
            want += if y[i] == 1.0 { p.ln() } else { (1.0 - p).ln() };
        }
        let pt = Point::new().with("Intercept", Array::scalar(a)).with("x1", Array::scalar(b));
        let got = m.logp(&pt).unwrap();
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn build_errors() {
    let t = table();
    let f = parse_formula("y ~ x1 + x3").unwrap();
    assert!(matches!(build_model(&f, &t, Family::Normal), Err(Error::UnknownColumn(c)) if c == "x3"));
    let f = parse_formula("y ~ x1").unwrap();
    assert!(matches!(build_model(&f, &t, Family::Binomial), Err(Error::NonBinaryResponse(_))));
    assert!(Table::new(vec![("a".into(), vec![1.0]), ("b".into(), vec![])]).is_err());
}
