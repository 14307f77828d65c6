use std::collections::HashMap;

use super::special::{digamma, lgamma};
use super::{Expr, Op};
use crate::array::{Array, Dtype};
use crate::error::{Error, Result};
use crate::point::Point;

/// A graph flattened into topological order, ready for repeated evaluation.
#[derive(Clone)]
pub struct Tape {
    nodes: Vec<Expr>,
    args: Vec<Vec<usize>>,
    root: usize,
    inputs: Vec<(String, usize)>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else if x.is_nan() {
        f64::NAN
    } else {
        f64::NEG_INFINITY
    }
}

/// Product that treats a zero adjoint as absorbing, so unused branches
/// holding infinities contribute nothing instead of NaN.
#[inline]
fn scaled(g: f64, d: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g * d
    }
}

#[inline]
fn at(v: &[f64], k: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[k]
    }
}

/// Add `contrib(k)` for each output element into an operand adjoint that may
/// be broadcast (length one).
fn accumulate(adj: &mut [f64], n: usize, contrib: impl Fn(usize) -> f64) {
    if adj.len() == 1 && n != 1 {
        adj[0] += (0..n).map(&contrib).sum::<f64>();
    } else {
        for (k, a) in adj.iter_mut().enumerate() {
            *a += contrib(k);
        }
    }
}

impl Tape {
    pub fn compile(root: &Expr) -> Result<Tape> {
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut nodes: Vec<Expr> = Vec::new();
        let mut args: Vec<Vec<usize>> = Vec::new();
        let mut input_shapes: HashMap<String, Vec<usize>> = HashMap::new();
        let mut inputs = Vec::new();

        // iterative post-order DFS
        let mut stack: Vec<(Expr, bool)> = vec![(root.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if index.contains_key(&e.0.id) {
                continue;
            }
            if expanded {
                let a: Vec<usize> = e.0.args.iter().map(|c| index[&c.0.id]).collect();
                let i = nodes.len();
                index.insert(e.0.id, i);
                if let Op::Input(name) = &e.0.op {
                    if let Some(prev) = input_shapes.get(name) {
                        if prev != &e.0.shape {
                            return Err(Error::ShapeMismatch {
                                context: format!("input `{name}` declared twice"),
                                expected: prev.clone(),
                                got: e.0.shape.clone(),
                            });
                        }
                    } else {
                        input_shapes.insert(name.clone(), e.0.shape.clone());
                    }
                    inputs.push((name.clone(), i));
                }
                nodes.push(e);
                args.push(a);
            } else {
                stack.push((e.clone(), true));
                for c in e.0.args.iter().rev() {
                    if !index.contains_key(&c.0.id) {
                        stack.push((c.clone(), false));
                    }
                }
            }
        }
        let root = index[&root.0.id];
        Ok(Tape {
            nodes,
            args,
            root,
            inputs,
        })
    }

    pub fn root_shape(&self) -> &[usize] {
        &self.nodes[self.root].0.shape
    }

    /// Distinct input names, in first-seen order.
    pub fn input_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for (name, _) in &self.inputs {
            if !out.contains(&name.as_str()) {
                out.push(name);
            }
        }
        out
    }

    pub fn input_shape(&self, name: &str) -> Option<&[usize]> {
        self.inputs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, i)| self.nodes[*i].shape())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn forward(&self, point: &Point) -> Result<Vec<Vec<f64>>> {
        let mut vals: Vec<Vec<f64>> = Vec::with_capacity(self.nodes.len());
        for (i, e) in self.nodes.iter().enumerate() {
            let n = &e.0;
            let a = &self.args[i];
            let size = e.size();
            let v: Vec<f64> = match &n.op {
                Op::Const(c) => c.data().to_vec(),
                Op::Input(name) => {
                    let arr = point.require(name)?;
                    if arr.shape() != n.shape.as_slice() {
                        return Err(Error::ShapeMismatch {
                            context: format!("input `{name}`"),
                            expected: n.shape.clone(),
                            got: arr.shape().to_vec(),
                        });
                    }
                    arr.data().to_vec()
                }
                Op::Add => binary(&vals[a[0]], &vals[a[1]], size, |x, y| x + y),
                Op::Sub => binary(&vals[a[0]], &vals[a[1]], size, |x, y| x - y),
                Op::Mul => binary(&vals[a[0]], &vals[a[1]], size, |x, y| x * y),
                Op::Div => binary(&vals[a[0]], &vals[a[1]], size, |x, y| x / y),
                Op::Pow => binary(&vals[a[0]], &vals[a[1]], size, f64::powf),
                Op::Neg => vals[a[0]].iter().map(|x| -x).collect(),
                Op::Exp => vals[a[0]].iter().map(|x| x.exp()).collect(),
                Op::Log => vals[a[0]].iter().map(|&x| log(x)).collect(),
                Op::Abs => vals[a[0]].iter().map(|x| x.abs()).collect(),
                Op::Sqrt => vals[a[0]].iter().map(|x| x.sqrt()).collect(),
                Op::Lgamma => vals[a[0]].iter().map(|&x| lgamma(x)).collect(),
                Op::Sigmoid => vals[a[0]].iter().map(|&x| sigmoid(x)).collect(),
                Op::SumAll => vec![vals[a[0]].iter().sum()],
                Op::Slice { start, end } => vals[a[0]][*start..*end].to_vec(),
                Op::Index(k) => vec![vals[a[0]][*k]],
                Op::Concat => a.iter().flat_map(|&j| vals[j].iter().copied()).collect(),
                Op::Switch => {
                    let (c, x, y) = (&vals[a[0]], &vals[a[1]], &vals[a[2]]);
                    (0..size)
                        .map(|k| if at(c, k) != 0.0 { at(x, k) } else { at(y, k) })
                        .collect()
                }
                Op::CmpGe => binary(&vals[a[0]], &vals[a[1]], size, |x, y| {
                    if x >= y {
                        1.0
                    } else {
                        0.0
                    }
                }),
                Op::CmpGt => binary(&vals[a[0]], &vals[a[1]], size, |x, y| {
                    if x > y {
                        1.0
                    } else {
                        0.0
                    }
                }),
                Op::Opaque { name, func } => {
                    let inputs: Vec<Array> = n
                        .args
                        .iter()
                        .zip(a)
                        .map(|(arg, &j)| {
                            Array::from_parts(arg.shape().to_vec(), vals[j].clone(), arg.dtype())
                        })
                        .collect();
                    let out = func(&inputs)?;
                    if out.shape() != n.shape.as_slice() {
                        return Err(Error::ShapeMismatch {
                            context: format!("opaque `{name}` output"),
                            expected: n.shape.clone(),
                            got: out.shape().to_vec(),
                        });
                    }
                    out.into_data()
                }
            };
            vals.push(v);
        }
        Ok(vals)
    }

    /// Value of the root node.
    pub fn eval(&self, point: &Point) -> Result<Array> {
        let mut vals = self.forward(point)?;
        let root = &self.nodes[self.root];
        Ok(Array::from_parts(
            root.shape().to_vec(),
            std::mem::take(&mut vals[self.root]),
            root.dtype(),
        ))
    }

    /// Value of the scalar root and its gradient with respect to `wrt`, in one
    /// forward and one backward sweep.
    pub fn value_and_grad(&self, point: &Point, wrt: &[&str]) -> Result<(f64, Vec<Array>)> {
        let root_node = &self.nodes[self.root];
        if !root_node.shape().is_empty() {
            return Err(Error::NonScalarObjective(root_node.shape().to_vec()));
        }
        for name in wrt {
            if let Some((_, i)) = self.inputs.iter().find(|(n, _)| n == name) {
                if self.nodes[*i].dtype() == Dtype::Int {
                    return Err(Error::IntegerDifferentiation(name.to_string()));
                }
            }
            if let Some(arr) = point.get(name) {
                if arr.dtype() == Dtype::Int {
                    return Err(Error::IntegerDifferentiation(name.to_string()));
                }
            }
        }

        let vals = self.forward(point)?;
        let value = vals[self.root][0];

        let n = self.nodes.len();
        let mut needs = vec![false; n];
        for (name, i) in &self.inputs {
            if wrt.contains(&name.as_str()) {
                needs[*i] = true;
            }
        }
        for i in 0..n {
            if !needs[i] && self.args[i].iter().any(|&j| needs[j]) {
                needs[i] = true;
            }
        }

        let mut adj: Vec<Vec<f64>> = vec![Vec::new(); n];
        if needs[self.root] {
            adj[self.root] = vec![1.0];
        }
        for i in (0..n).rev() {
            if !needs[i] || adj[i].is_empty() {
                continue;
            }
            let g = std::mem::take(&mut adj[i]);
            let e = &self.nodes[i];
            let a = &self.args[i];
            let size = e.size();
            match &e.0.op {
                Op::Const(_) | Op::CmpGe | Op::CmpGt => {}
                Op::Input(_) => {
                    adj[i] = g;
                    continue;
                }
                Op::Opaque { name, .. } => return Err(Error::NoGradient(name.clone())),
                _ => {}
            }
            for (slot, &j) in a.iter().enumerate() {
                if !needs[j] {
                    continue;
                }
                if adj[j].is_empty() {
                    adj[j] = vec![0.0; self.nodes[j].size()];
                }
                let x = &vals[a[0]];
                let out = &vals[i];
                let dst = &mut adj[j];
                match &e.0.op {
                    Op::Add => accumulate(dst, size, |k| g[k]),
                    Op::Sub => {
                        let sign = if slot == 0 { 1.0 } else { -1.0 };
                        accumulate(dst, size, |k| sign * g[k])
                    }
                    Op::Mul => {
                        let other = &vals[a[1 - slot]];
                        accumulate(dst, size, |k| scaled(g[k], at(other, k)))
                    }
                    Op::Div => {
                        let y = &vals[a[1]];
                        if slot == 0 {
                            accumulate(dst, size, |k| scaled(g[k], 1.0 / at(y, k)))
                        } else {
                            accumulate(dst, size, |k| {
                                let yk = at(y, k);
                                scaled(g[k], -at(x, k) / (yk * yk))
                            })
                        }
                    }
                    Op::Pow => {
                        let y = &vals[a[1]];
                        if slot == 0 {
                            accumulate(dst, size, |k| {
                                let (xk, yk) = (at(x, k), at(y, k));
                                scaled(g[k], yk * xk.powf(yk - 1.0))
                            })
                        } else {
                            accumulate(dst, size, |k| {
                                let xk = at(x, k);
                                if xk > 0.0 {
                                    scaled(g[k], out[k] * xk.ln())
                                } else {
                                    0.0
                                }
                            })
                        }
                    }
                    Op::Neg => accumulate(dst, size, |k| -g[k]),
                    Op::Exp => accumulate(dst, size, |k| scaled(g[k], out[k])),
                    Op::Log => accumulate(dst, size, |k| scaled(g[k], 1.0 / x[k])),
                    Op::Abs => accumulate(dst, size, |k| {
                        scaled(g[k], if x[k] > 0.0 { 1.0 } else if x[k] < 0.0 { -1.0 } else { 0.0 })
                    }),
                    Op::Sqrt => accumulate(dst, size, |k| scaled(g[k], 0.5 / out[k])),
                    Op::Lgamma => accumulate(dst, size, |k| scaled(g[k], digamma(x[k]))),
                    Op::Sigmoid => {
                        accumulate(dst, size, |k| scaled(g[k], out[k] * (1.0 - out[k])))
                    }
                    Op::SumAll => {
                        for d in dst.iter_mut() {
                            *d += g[0];
                        }
                    }
                    Op::Slice { start, .. } => {
                        for (k, gk) in g.iter().enumerate() {
                            dst[start + k] += gk;
                        }
                    }
                    Op::Index(idx) => dst[*idx] += g[0],
                    Op::Concat => {
                        let offset: usize = a[..slot].iter().map(|&p| self.nodes[p].size()).sum();
                        let len = self.nodes[j].size();
                        for (d, gk) in dst.iter_mut().zip(&g[offset..offset + len]) {
                            *d += gk;
                        }
                    }
                    Op::Switch => {
                        if slot == 0 {
                            continue;
                        }
                        let c = &vals[a[0]];
                        let take = slot == 1;
                        accumulate(dst, size, |k| {
                            if (at(c, k) != 0.0) == take {
                                g[k]
                            } else {
                                0.0
                            }
                        })
                    }
                    Op::Const(_) | Op::Input(_) | Op::CmpGe | Op::CmpGt | Op::Opaque { .. } => {}
                }
            }
        }

        let grads = wrt
            .iter()
            .map(|name| {
                let shape = match self.input_shape(name) {
                    Some(s) => s.to_vec(),
                    None => point.require(name)?.shape().to_vec(),
                };
                let mut total = vec![0.0; shape.iter().product()];
                for (n, i) in &self.inputs {
                    if n == name && !adj[*i].is_empty() {
                        for (t, v) in total.iter_mut().zip(&adj[*i]) {
                            *t += v;
                        }
                    }
                }
                Ok(Array::from_parts(shape, total, Dtype::Float))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((value, grads))
    }
}

fn binary(x: &[f64], y: &[f64], size: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    match (x.len(), y.len()) {
        (1, 1) => vec![f(x[0], y[0])],
        (1, _) => y.iter().map(|&b| f(x[0], b)).collect(),
        (_, 1) => x.iter().map(|&a| f(a, y[0])).collect(),
        _ => {
            debug_assert_eq!(x.len(), size);
            x.iter().zip(y).map(|(&a, &b)| f(a, b)).collect()
        }
    }
}
