//! Model construction and the joint log-posterior.
//!
//! Variables are registered on a [`ModelBuilder`]; [`ModelBuilder::finalize`]
//! compiles the joint density and returns an immutable [`Model`] that can be
//! shared between chains.
//!
//! Constrained continuous variables are sampled in an unconstrained
//! coordinate: a positive variable `sigma` is represented by the input
//! `sigma_log`, an interval-bounded `p` by `p_interval`. The joint density
//! is always expressed in those coordinates, Jacobian included.

use std::collections::HashSet;

use crate::array::{shape_size, Array, Dtype};
use crate::backends::VarSpec;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::graph::{Expr, Tape};
use crate::point::Point;
use crate::transforms::Transform;

#[derive(Clone, Debug)]
pub struct FreeVar {
    name: String,
    dist: Distribution,
    shape: Vec<usize>,
    dtype: Dtype,
    transform: Option<Transform>,
    value_name: String,
    testval: Array,
    value: Expr,
    missing_of: Option<String>,
}

impl FreeVar {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn transform(&self) -> Option<Transform> {
        self.transform
    }

    /// Name of the graph input: the transformed name, or the plain name when
    /// untransformed.
    pub fn value_name(&self) -> &str {
        &self.value_name
    }

    pub fn transformed_name(&self) -> Option<&str> {
        self.transform.map(|_| self.value_name.as_str())
    }

    /// Test value in the variable's own (constrained) space.
    pub fn testval(&self) -> &Array {
        &self.testval
    }

    /// Expression for the constrained value.
    pub fn value(&self) -> &Expr {
        &self.value
    }

    pub fn is_continuous(&self) -> bool {
        self.dtype == Dtype::Float
    }

    /// The observed variable whose masked entries this variable imputes.
    pub fn missing_of(&self) -> Option<&str> {
        self.missing_of.as_deref()
    }
}

#[derive(Clone, Debug)]
pub struct ObservedVar {
    name: String,
    dist: Distribution,
    data: Array,
    mask: Option<Vec<bool>>,
    missing_var: Option<String>,
    value: Expr,
}

impl ObservedVar {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn data(&self) -> &Array {
        &self.data
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn missing_var(&self) -> Option<&str> {
        self.missing_var.as_deref()
    }

    /// Expression for the full data vector, with free inputs in masked slots.
    pub fn value(&self) -> &Expr {
        &self.value
    }
}

/// Collects variables and density terms before the model is frozen.
#[derive(Default)]
pub struct ModelBuilder {
    free: Vec<FreeVar>,
    observed: Vec<ObservedVar>,
    deterministics: Vec<(String, Expr)>,
    terms: Vec<Expr>,
    names: HashSet<String>,
    test_point: Point,
}

fn testval_inside(dist: &Distribution, testval: &Array) -> bool {
    let support = dist.support();
    testval.data().iter().all(|&v| support.contains(v))
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn reserve(&mut self, name: &str) -> Result<()> {
        if name.is_empty() {
            return Err(Error::invalid("empty variable name"));
        }
        if self.names.contains(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        self.names.insert(name.to_string());
        Ok(())
    }

    /// Current test point, in transformed coordinates.
    pub fn test_point(&self) -> &Point {
        &self.test_point
    }

    fn term_at_test_point(&self, term: &Expr) -> Result<f64> {
        let v = crate::graph::eval(term, &self.test_point)?.data()[0];
        Ok(if v.is_nan() { f64::NEG_INFINITY } else { v })
    }

    /// Register a free random variable and return the expression for its
    /// (constrained) value.
    pub fn add_free(
        &mut self,
        name: &str,
        dist: Distribution,
        shape: &[usize],
        testval: Option<Array>,
    ) -> Result<Expr> {
        let dtype = dist.dtype();
        let transform = Transform::for_support(dist.support());
        let value_name = match transform {
            Some(t) => format!("{name}{}", t.suffix()),
            None => name.to_string(),
        };
        if self.names.contains(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        if value_name != name && self.names.contains(&value_name) {
            return Err(Error::DuplicateName(value_name));
        }

        let testval = match testval {
            Some(t) => {
                let t = if t.is_scalar() && !shape.is_empty() {
                    Array::new(shape.to_vec(), vec![t.data()[0]; shape_size(shape)], t.dtype())?
                } else {
                    t
                };
                if t.shape() != shape {
                    return Err(Error::ShapeMismatch {
                        context: format!("test value of `{name}`"),
                        expected: shape.to_vec(),
                        got: t.shape().to_vec(),
                    });
                }
                t.with_dtype(dtype)
                    .map_err(|_| Error::TestvalOutsideSupport(name.to_string()))?
            }
            None => dist.default_testval(shape, &self.test_point)?,
        };
        if !matches!(dist, Distribution::Custom(_)) && !testval_inside(&dist, &testval) {
            return Err(Error::TestvalOutsideSupport(name.to_string()));
        }

        let input = Expr::input(value_name.clone(), shape, dtype);
        let (value, term) = match transform {
            Some(t) => {
                let x = t.backward_expr(&input);
                let term = dist.logp_expr(&x)? + t.log_jacobian_expr(&input);
                (x, term)
            }
            None => (input.clone(), dist.logp_expr(&input)?),
        };
        let stored = match transform {
            Some(t) => {
                let data = testval
                    .data()
                    .iter()
                    .map(|&v| t.forward(v))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|_| Error::TestvalOutsideSupport(name.to_string()))?;
                Array::new(shape.to_vec(), data, dtype)?
            }
            None => testval.clone(),
        };

        let previous = self.test_point.insert(value_name.clone(), stored);
        let at_test = self.term_at_test_point(&term);
        if !matches!(at_test, Ok(v) if v.is_finite()) {
            match previous {
                Some(p) => self.test_point.insert(value_name.clone(), p),
                None => self.test_point.remove(&value_name),
            };
            at_test?;
            return Err(Error::TestvalOutsideSupport(name.to_string()));
        }

        self.reserve(name)?;
        if value_name != name {
            self.reserve(&value_name)?;
        }
        self.terms.push(term);
        self.free.push(FreeVar {
            name: name.to_string(),
            dist,
            shape: shape.to_vec(),
            dtype,
            transform,
            value_name,
            testval,
            value: value.clone(),
            missing_of: None,
        });
        Ok(value)
    }

    /// A free variable whose prior is an arbitrary log-density builder.
    pub fn custom_density<F>(
        &mut self,
        name: &str,
        logp: F,
        shape: &[usize],
        testval: Array,
    ) -> Result<Expr>
    where
        F: Fn(&Expr) -> Expr + Send + Sync + 'static,
    {
        self.add_free(name, Distribution::density(logp), shape, Some(testval))
    }

    /// Register an observed variable. Entries where `mask` is true are treated
    /// as missing and imputed by a new free variable `<name>.missing_values`.
    /// Returns the expression for the full data vector.
    pub fn add_observed(
        &mut self,
        name: &str,
        dist: Distribution,
        data: Array,
        mask: Option<&[bool]>,
    ) -> Result<Expr> {
        if self.names.contains(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        let dtype = dist.dtype();
        let data = data.with_dtype(dtype).map_err(|_| Error::DtypeMismatch {
            name: name.to_string(),
            expected: dtype.to_string(),
        })?;

        let masked: Vec<usize> = match mask {
            Some(m) => {
                if m.len() != data.len() || data.shape().len() > 1 {
                    return Err(Error::ShapeMismatch {
                        context: format!("mask of `{name}` (masks apply to vectors)"),
                        expected: data.shape().to_vec(),
                        got: vec![m.len()],
                    });
                }
                (0..m.len()).filter(|&i| m[i]).collect()
            }
            None => Vec::new(),
        };
        if !masked.is_empty() && masked.len() == data.len() {
            return Err(Error::AllMissing(name.to_string()));
        }

        let mut missing_name = None;
        let mut jacobian = None;
        let value = if masked.is_empty() {
            Expr::constant(data.clone())
        } else {
            let mname = format!("{name}.missing_values");
            if self.names.contains(&mname) {
                return Err(Error::DuplicateName(mname));
            }
            let k = masked.len();
            let transform = Transform::for_support(dist.support());
            let value_name = match transform {
                Some(t) => format!("{mname}{}", t.suffix()),
                None => mname.clone(),
            };
            let full = dist.default_testval(data.shape(), &self.test_point)?;
            let testval = Array::new(
                vec![k],
                masked.iter().map(|&i| full.data()[i]).collect(),
                dtype,
            )?;
            let input = Expr::input(value_name.clone(), &[k], dtype);
            let missing_value = match transform {
                Some(t) => {
                    jacobian = Some(t.log_jacobian_expr(&input));
                    t.backward_expr(&input)
                }
                None => input.clone(),
            };
            let stored = match transform {
                Some(t) => Array::new(
                    vec![k],
                    testval
                        .data()
                        .iter()
                        .map(|&v| t.forward(v))
                        .collect::<Result<Vec<_>>>()?,
                    dtype,
                )?,
                None => testval.clone(),
            };
            self.test_point.insert(value_name.clone(), stored);

            // stitch observed runs and missing slots back into one vector
            let mut parts = Vec::new();
            let mut start = 0;
            for (j, &i) in masked.iter().enumerate() {
                if i > start {
                    parts.push(Expr::constant(Array::new(
                        vec![i - start],
                        data.data()[start..i].to_vec(),
                        dtype,
                    )?));
                }
                parts.push(missing_value.index(j));
                start = i + 1;
            }
            if start < data.len() {
                parts.push(Expr::constant(Array::new(
                    vec![data.len() - start],
                    data.data()[start..].to_vec(),
                    dtype,
                )?));
            }
            let stitched = Expr::concat(&parts)?;

            self.reserve(&mname)?;
            if value_name != mname {
                self.reserve(&value_name)?;
            }
            self.free.push(FreeVar {
                name: mname.clone(),
                dist: dist.clone(),
                shape: vec![k],
                dtype,
                transform,
                value_name,
                testval,
                value: missing_value,
                missing_of: Some(name.to_string()),
            });
            missing_name = Some(mname);
            stitched
        };

        let mut term = dist.logp_expr(&value)?;
        if let Some(j) = jacobian {
            term = term + j;
        }
        self.reserve(name)?;
        self.terms.push(term);
        self.observed.push(ObservedVar {
            name: name.to_string(),
            dist,
            data,
            mask: mask.map(<[bool]>::to_vec),
            missing_var: missing_name,
            value: value.clone(),
        });
        Ok(value)
    }

    /// Record a named function of other variables in every sampled point.
    pub fn add_deterministic(&mut self, name: &str, expr: Expr) -> Result<Expr> {
        self.reserve(name)?;
        self.deterministics.push((name.to_string(), expr.clone()));
        Ok(expr)
    }

    /// Add an arbitrary scalar term to the joint log-density.
    pub fn add_potential(&mut self, term: Expr) -> Result<()> {
        if !term.shape().is_empty() {
            return Err(Error::NonScalarObjective(term.shape().to_vec()));
        }
        self.terms.push(term);
        Ok(())
    }

    /// Freeze the model and compile its density.
    pub fn finalize(self) -> Result<Model> {
        let logp_graph = match self.terms.split_first() {
            None => Expr::scalar(0.0),
            Some((first, rest)) => rest.iter().fold(first.clone(), |acc, t| acc + t),
        };
        let logp_tape = Tape::compile(&logp_graph)?;
        let det_tapes = self
            .deterministics
            .iter()
            .map(|(_, e)| Tape::compile(e))
            .collect::<Result<Vec<_>>>()?;
        let model = Model {
            free: self.free,
            observed: self.observed,
            deterministics: self.deterministics,
            logp_graph,
            logp_tape,
            det_tapes,
            test_point: self.test_point,
        };
        let lp = model.logp(&model.test_point)?;
        if !lp.is_finite() {
            return Err(Error::NonFiniteLogp("model test point".into()));
        }
        Ok(model)
    }
}

/// A frozen model: immutable, shareable between threads.
pub struct Model {
    free: Vec<FreeVar>,
    observed: Vec<ObservedVar>,
    deterministics: Vec<(String, Expr)>,
    logp_graph: Expr,
    logp_tape: Tape,
    det_tapes: Vec<Tape>,
    test_point: Point,
}

impl Model {
    pub fn builder() -> ModelBuilder {
        ModelBuilder::new()
    }

    pub fn free_vars(&self) -> &[FreeVar] {
        &self.free
    }

    pub fn observed_vars(&self) -> &[ObservedVar] {
        &self.observed
    }

    pub fn deterministics(&self) -> &[(String, Expr)] {
        &self.deterministics
    }

    pub fn logp_graph(&self) -> &Expr {
        &self.logp_graph
    }

    pub fn test_point(&self) -> &Point {
        &self.test_point
    }

    /// Look up a free variable by its own name or its transformed name.
    pub fn free_var(&self, name: &str) -> Option<&FreeVar> {
        self.free
            .iter()
            .find(|v| v.name == name || v.value_name == name)
    }

    /// The graph-input name for a free variable given by either name.
    pub fn value_name(&self, name: &str) -> Result<&str> {
        self.free_var(name)
            .map(FreeVar::value_name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Input names of all continuous free variables, in registration order.
    pub fn continuous_value_names(&self) -> Vec<String> {
        self.free
            .iter()
            .filter(|v| v.is_continuous())
            .map(|v| v.value_name.clone())
            .collect()
    }

    pub fn discrete_value_names(&self) -> Vec<String> {
        self.free
            .iter()
            .filter(|v| !v.is_continuous())
            .map(|v| v.value_name.clone())
            .collect()
    }

    /// Joint log-posterior at a point in transformed coordinates. Domain
    /// violations give `-∞`.
    pub fn logp(&self, point: &Point) -> Result<f64> {
        let v = self.logp_tape.eval(point)?.data()[0];
        Ok(if v.is_nan() { f64::NEG_INFINITY } else { v })
    }

    /// Gradient of the log-posterior for every continuous free variable.
    pub fn dlogp(&self, point: &Point) -> Result<Point> {
        let names = self.continuous_value_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let (_, grads) = self.logp_tape.value_and_grad(point, &refs)?;
        Ok(names.into_iter().zip(grads).collect())
    }

    /// Log-posterior and its gradient with respect to `wrt`.
    pub fn logp_and_grad(&self, point: &Point, wrt: &[&str]) -> Result<(f64, Vec<Array>)> {
        let (v, g) = self.logp_tape.value_and_grad(point, wrt)?;
        Ok((if v.is_nan() { f64::NEG_INFINITY } else { v }, g))
    }

    /// Fill in missing inputs from the test point.
    pub fn complete_point(&self, partial: &Point) -> Point {
        let mut p = self.test_point.clone();
        for v in &self.free {
            if let Some(a) = partial.get(&v.value_name) {
                p.insert(v.value_name.clone(), a.clone());
            } else if let (Some(t), Some(a)) = (v.transform, partial.get(&v.name)) {
                // constrained value supplied instead of the transformed one
                if let Ok(data) = a.data().iter().map(|&x| t.forward(x)).collect::<Result<Vec<_>>>() {
                    if let Ok(arr) = Array::new(a.shape().to_vec(), data, Dtype::Float) {
                        p.insert(v.value_name.clone(), arr);
                    }
                }
            }
        }
        p
    }

    /// The point restricted to free-variable inputs, plus constrained aliases
    /// of transformed variables and every deterministic.
    pub fn augment(&self, point: &Point) -> Result<Point> {
        let mut out = Point::new();
        for v in &self.free {
            let y = point.require(&v.value_name)?;
            out.insert(v.value_name.clone(), y.clone());
            if let Some(t) = v.transform {
                out.insert(v.name.clone(), y.map(|y| t.backward(y)));
            }
        }
        for ((name, _), tape) in self.deterministics.iter().zip(&self.det_tapes) {
            out.insert(name.clone(), tape.eval(point)?);
        }
        Ok(out)
    }

    /// Variables stored in traces: each free variable's input, followed by
    /// its constrained alias if transformed, then deterministics.
    pub fn trace_specs(&self) -> Vec<VarSpec> {
        let mut specs = Vec::new();
        for v in &self.free {
            specs.push(VarSpec::new(&v.value_name, &v.shape, v.dtype));
            if v.transform.is_some() {
                specs.push(VarSpec::new(&v.name, &v.shape, Dtype::Float));
            }
        }
        for (name, e) in &self.deterministics {
            specs.push(VarSpec::new(name, e.shape(), e.dtype()));
        }
        specs
    }
}

/// Fixed mapping between a subset of free variables and a flat vector.
#[derive(Clone, Debug)]
pub struct FlatLayout {
    names: Vec<String>,
    shapes: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    dim: usize,
}

impl FlatLayout {
    pub fn new(model: &Model, names: &[String]) -> Result<Self> {
        let mut shapes = Vec::new();
        let mut offsets = Vec::new();
        let mut dim = 0;
        for n in names {
            let v = model
                .free_var(n)
                .ok_or_else(|| Error::UnknownVariable(n.clone()))?;
            offsets.push(dim);
            dim += shape_size(v.shape());
            shapes.push(v.shape().to_vec());
        }
        Ok(FlatLayout {
            names: names.to_vec(),
            shapes,
            offsets,
            dim,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name_refs(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of flat coordinates of the `i`-th variable.
    pub fn size_of(&self, i: usize) -> usize {
        shape_size(&self.shapes[i])
    }

    /// Which variable and element a flat coordinate refers to.
    pub fn locate(&self, k: usize) -> (usize, usize) {
        let i = match self.offsets.binary_search(&k) {
            Ok(mut i) => {
                // skip zero-sized variables
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == k {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        (i, k - self.offsets[i])
    }

    pub fn gather(&self, point: &Point) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim);
        for n in &self.names {
            out.extend_from_slice(point.require(n)?.data());
        }
        Ok(out)
    }

    pub fn gather_arrays(&self, arrays: &[Array]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        for a in arrays {
            out.extend_from_slice(a.data());
        }
        out
    }

    /// Write flat values into `point`, keeping each entry's dtype.
    pub fn scatter(&self, x: &[f64], point: &mut Point) {
        for (i, n) in self.names.iter().enumerate() {
            let len = shape_size(&self.shapes[i]);
            let src = &x[self.offsets[i]..self.offsets[i] + len];
            match point.get_mut(n) {
                Some(a) => a.data_mut().copy_from_slice(src),
                None => {
                    point.insert(
                        n.clone(),
                        Array::from_parts(self.shapes[i].clone(), src.to_vec(), Dtype::Float),
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_prior_in_log_space() {
        let mut b = ModelBuilder::new();
        b.add_free("sigma", Distribution::exponential(50.0), &[], None).unwrap();
        let m = b.finalize().unwrap();
        let v = m.free_var("sigma").unwrap();
        assert_eq!(v.transformed_name(), Some("sigma_log"));
        for &y in &[-3.0, -0.5, 0.0, 1.2] {
            let p = Point::new().with("sigma_log", Array::scalar(y));
            let want = 50f64.ln() - 50.0 * y.exp() + y;
            assert!((m.logp(&p).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_prior_at_midpoint() {
        let mut b = ModelBuilder::new();
        b.add_free("p", Distribution::uniform(0.0, 1.0).unwrap(), &[], None).unwrap();
        let m = b.finalize().unwrap();
        assert_eq!(m.free_var("p").unwrap().value_name(), "p_interval");
        let p = Point::new().with("p_interval", Array::scalar(0.0));
        assert!((m.logp(&p).unwrap() + 1.386_294_361_119_890_6).abs() < 1e-12);
    }

    #[test]
    fn discrete_uniform_stays_untransformed() {
        let mut b = ModelBuilder::new();
        b.add_free("s", Distribution::discrete_uniform(1851, 1962).unwrap(), &[], None)
            .unwrap();
        let m = b.finalize().unwrap();
        let v = m.free_var("s").unwrap();
        assert!(v.transform().is_none());
        assert_eq!(v.dtype(), Dtype::Int);
        assert_eq!(m.test_point().get("s").unwrap().dtype(), Dtype::Int);
    }

    #[test]
    fn simple_logp_values() {
        let mut b = ModelBuilder::new();
        b.add_free("r", Distribution::exponential(1.0), &[], None).unwrap();
        let m = b.finalize().unwrap();
        let p = Point::new().with("r_log", Array::scalar(0.0));
        assert!((m.logp(&p).unwrap() + 1.0).abs() < 1e-15);

        let mut b = ModelBuilder::new();
        b.add_free("z", Distribution::normal(0.0, 1.0), &[], None).unwrap();
        let m = b.finalize().unwrap();
        assert!((m.logp(m.test_point()).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut b = ModelBuilder::new();
        b.add_free("a", Distribution::normal(0.0, 1.0), &[], None).unwrap();
        assert!(matches!(
            b.add_free("a", Distribution::normal(0.0, 1.0), &[], None),
            Err(Error::DuplicateName(_))
        ));
        assert!(matches!(
            b.add_deterministic("a", Expr::scalar(1.0)),
            Err(Error::DuplicateName(_))
        ));
        b.add_free("s", Distribution::half_normal(1.0), &[], None).unwrap();
        assert!(matches!(
            b.add_free("s_log", Distribution::normal(0.0, 1.0), &[], None),
            Err(Error::DuplicateName(_))
        ));
    }

    #[test]
    fn testval_outside_support() {
        let mut b = ModelBuilder::new();
        let r = b.add_free(
            "r",
            Distribution::exponential(1.0),
            &[],
            Some(Array::scalar(-1.0)),
        );
        assert!(matches!(r, Err(Error::TestvalOutsideSupport(_))));
        let r = b.custom_density("e", |v| -v.abs().ln(), &[], Array::scalar(0.0));
        assert!(matches!(r, Err(Error::TestvalOutsideSupport(_))));
        // the failed registrations left no trace
        assert!(b.test_point().is_empty());
    }

    #[test]
    fn custom_densities() {
        let mut b = ModelBuilder::new();
        b.custom_density("beta", |v| -1.5 * (1.0 + v * v).ln(), &[], Array::scalar(0.0))
            .unwrap();
        b.custom_density("eps", |v| -v.abs().ln(), &[], Array::scalar(1.0))
            .unwrap();
        let m = b.finalize().unwrap();
        assert_eq!(m.logp(m.test_point()).unwrap(), 0.0);
        let p = m
            .test_point()
            .clone()
            .with("beta", Array::scalar(1.0));
        let g = m.dlogp(&p).unwrap();
        assert!((g.scalar("beta").unwrap() + 1.5).abs() < 1e-12);
    }

    #[test]
    fn deterministics_are_recorded() {
        let mut b = ModelBuilder::new();
        let s = b
            .add_free("s", Distribution::gaussian_random_walk(1.0), &[2], None)
            .unwrap();
        b.add_deterministic("vol", (-2.0 * &s).exp()).unwrap();
        let m = b.finalize().unwrap();
        let aug = m.augment(m.test_point()).unwrap();
        assert_eq!(aug.get("vol").unwrap().data(), &[1.0, 1.0]);
        let p = Point::new().with("s", Array::vector(vec![0.5, 0.5]));
        let aug = m.augment(&p).unwrap();
        assert!((aug.get("vol").unwrap().data()[0] - (-1f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn missing_values_create_a_free_variable() {
        let mut b = ModelBuilder::new();
        let rate = b.add_free("rate", Distribution::exponential(1.0), &[], None).unwrap();
        let data = Array::int_vector(&[1, 0, 3, 2]);
        let mask = [false, true, false, true];
        b.add_observed("d", Distribution::poisson(rate), data, Some(&mask))
            .unwrap();
        let m = b.finalize().unwrap();
        let mv = m.free_var("d.missing_values").unwrap();
        assert_eq!(mv.shape(), &[2]);
        assert_eq!(mv.dtype(), Dtype::Int);
        assert_eq!(mv.missing_of(), Some("d"));

        let mut b = ModelBuilder::new();
        let rate = b.add_free("rate", Distribution::exponential(1.0), &[], None).unwrap();
        let all = [true; 4];
        assert!(matches!(
            b.add_observed("d", Distribution::poisson(rate), Array::int_vector(&[1, 0, 3, 2]), Some(&all)),
            Err(Error::AllMissing(_))
        ));
    }

    #[test]
    fn flat_layout_round_trip() {
        let mut b = ModelBuilder::new();
        b.add_free("a", Distribution::normal(0.0, 1.0), &[], None).unwrap();
        b.add_free("b", Distribution::normal(0.0, 1.0), &[3], None).unwrap();
        let m = b.finalize().unwrap();
        let layout = FlatLayout::new(&m, &["b".into(), "a".into()]).unwrap();
        assert_eq!(layout.dim(), 4);
        assert_eq!(layout.locate(0), (0, 0));
        assert_eq!(layout.locate(3), (1, 0));
        let mut p = m.test_point().clone();
        layout.scatter(&[1.0, 2.0, 3.0, 4.0], &mut p);
        assert_eq!(p.get("a").unwrap().data(), &[4.0]);
        assert_eq!(layout.gather(&p).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
