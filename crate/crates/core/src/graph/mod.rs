//! Immutable computation graphs with forward evaluation and reverse-mode
//! gradients.
//!
//! An [`Expr`] is a cheap handle (an `Arc`) to a node. Nodes are created
//! bottom-up and never mutated, so a graph can be shared freely between
//! threads. Shapes are fixed at construction: elementwise operators accept
//! equal shapes or a scalar against any shape, anything else is rejected.
//!
//! Evaluation and differentiation go through a [`Tape`], a topologically
//! sorted copy of the graph. [`eval`] and [`grad`] compile a tape on every
//! call; hot paths (model densities) compile once and reuse it.

mod ops;
pub mod special;
mod tape;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::array::{broadcast_shapes, shape_size, Array, Dtype};
use crate::error::{Error, Result};
use crate::point::Point;

pub use tape::Tape;

/// A black-box array function used by [`Expr::opaque`].
pub type OpaqueFn = dyn Fn(&[Array]) -> Result<Array> + Send + Sync;

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

#[derive(Clone)]
pub(crate) enum Op {
    Const(Array),
    Input(String),
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Exp,
    Log,
    Abs,
    Sqrt,
    Lgamma,
    Sigmoid,
    SumAll,
    Slice { start: usize, end: usize },
    Index(usize),
    Concat,
    Switch,
    CmpGe,
    CmpGt,
    Opaque { name: String, func: Arc<OpaqueFn> },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Const(_) => "constant",
            Op::Input(_) => "free_input",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Pow => "pow",
            Op::Neg => "neg",
            Op::Exp => "exp",
            Op::Log => "log",
            Op::Abs => "abs",
            Op::Sqrt => "sqrt",
            Op::Lgamma => "lgamma",
            Op::Sigmoid => "sigmoid",
            Op::SumAll => "sum_all",
            Op::Slice { .. } => "slice",
            Op::Index(_) => "index",
            Op::Concat => "concat",
            Op::Switch => "switch",
            Op::CmpGe => "cmp_ge",
            Op::CmpGt => "cmp_gt",
            Op::Opaque { .. } => "opaque",
        }
    }
}

pub(crate) struct Node {
    pub(crate) id: u64,
    pub(crate) op: Op,
    pub(crate) args: Vec<Expr>,
    pub(crate) shape: Vec<usize>,
    pub(crate) dtype: Dtype,
}

#[derive(Clone)]
pub struct Expr(pub(crate) Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.op {
            Op::Input(name) => write!(f, "input({name}: {:?})", self.0.shape),
            Op::Const(a) if a.is_scalar() => write!(f, "{}", a.data()[0]),
            Op::Const(_) => write!(f, "const{:?}", self.0.shape),
            op => {
                write!(f, "{}(", op.name())?;
                for (i, a) in self.0.args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a:?}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn node(op: Op, args: Vec<Expr>, shape: Vec<usize>, dtype: Dtype) -> Expr {
    Expr(Arc::new(Node {
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        op,
        args,
        shape,
        dtype,
    }))
}

fn joint_dtype(args: &[&Expr]) -> Dtype {
    if args.iter().all(|a| a.dtype() == Dtype::Int) {
        Dtype::Int
    } else {
        Dtype::Float
    }
}

fn shape_error(context: &str, a: &[usize], b: &[usize]) -> Error {
    Error::ShapeMismatch {
        context: context.to_string(),
        expected: a.to_vec(),
        got: b.to_vec(),
    }
}

/// Binary elementwise operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl Expr {
    pub fn constant(value: impl Into<Array>) -> Expr {
        let value = value.into();
        let shape = value.shape().to_vec();
        let dtype = value.dtype();
        node(Op::Const(value), vec![], shape, dtype)
    }

    pub fn scalar(v: f64) -> Expr {
        Expr::constant(Array::scalar(v))
    }

    pub fn input(name: impl Into<String>, shape: &[usize], dtype: Dtype) -> Expr {
        node(Op::Input(name.into()), vec![], shape.to_vec(), dtype)
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn dtype(&self) -> Dtype {
        self.0.dtype
    }

    pub fn size(&self) -> usize {
        shape_size(&self.0.shape)
    }

    pub fn kind(&self) -> &'static str {
        self.0.op.name()
    }

    pub fn operands(&self) -> &[Expr] {
        &self.0.args
    }

    /// Name of a `free_input` node.
    pub fn input_name(&self) -> Option<&str> {
        match &self.0.op {
            Op::Input(name) => Some(name),
            _ => None,
        }
    }

    /// Value of a constant node.
    pub fn const_value(&self) -> Option<&Array> {
        match &self.0.op {
            Op::Const(a) => Some(a),
            _ => None,
        }
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn try_binary(op: BinaryOp, a: &Expr, b: &Expr) -> Result<Expr> {
        let (op, name) = match op {
            BinaryOp::Add => (Op::Add, "add"),
            BinaryOp::Sub => (Op::Sub, "sub"),
            BinaryOp::Mul => (Op::Mul, "mul"),
            BinaryOp::Div => (Op::Div, "div"),
            BinaryOp::Pow => (Op::Pow, "pow"),
        };
        let shape =
            broadcast_shapes(a.shape(), b.shape()).ok_or_else(|| shape_error(name, a.shape(), b.shape()))?;
        let dtype = match op {
            Op::Add | Op::Sub | Op::Mul => joint_dtype(&[a, b]),
            _ => Dtype::Float,
        };
        Ok(node(op, vec![a.clone(), b.clone()], shape, dtype))
    }

    fn binary(op: BinaryOp, a: &Expr, b: &Expr) -> Expr {
        match Expr::try_binary(op, a, b) {
            Ok(e) => e,
            Err(e) => panic!("{e}"),
        }
    }

    fn unary(&self, op: Op) -> Expr {
        let dtype = match op {
            Op::Neg | Op::Abs => self.dtype(),
            _ => Dtype::Float,
        };
        node(op, vec![self.clone()], self.shape().to_vec(), dtype)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, other)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, other)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, other)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, other)
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn powf(&self, exponent: f64) -> Expr {
        self.pow(&Expr::scalar(exponent))
    }

    pub fn neg(&self) -> Expr {
        self.unary(Op::Neg)
    }

    pub fn exp(&self) -> Expr {
        self.unary(Op::Exp)
    }

    /// Natural log; non-positive arguments evaluate to `-∞`.
    pub fn ln(&self) -> Expr {
        self.unary(Op::Log)
    }

    pub fn abs(&self) -> Expr {
        self.unary(Op::Abs)
    }

    pub fn sqrt(&self) -> Expr {
        self.unary(Op::Sqrt)
    }

    pub fn lgamma(&self) -> Expr {
        self.unary(Op::Lgamma)
    }

    /// Logistic function 1 / (1 + e^-x).
    pub fn sigmoid(&self) -> Expr {
        self.unary(Op::Sigmoid)
    }

    /// Sum of every element; the result is a scalar.
    pub fn sum(&self) -> Expr {
        let dtype = self.dtype();
        node(Op::SumAll, vec![self.clone()], vec![], dtype)
    }

    /// Elements `start..end` of a vector.
    pub fn try_slice(&self, start: usize, end: usize) -> Result<Expr> {
        if self.shape().len() != 1 || start > end || end > self.shape()[0] {
            return Err(Error::ShapeMismatch {
                context: format!("slice {start}..{end}"),
                expected: vec![end],
                got: self.shape().to_vec(),
            });
        }
        Ok(node(
            Op::Slice { start, end },
            vec![self.clone()],
            vec![end - start],
            self.dtype(),
        ))
    }

    pub fn slice(&self, start: usize, end: usize) -> Expr {
        self.try_slice(start, end).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Element `i` of a vector, as a scalar.
    pub fn try_index(&self, i: usize) -> Result<Expr> {
        if self.shape().len() != 1 || i >= self.shape()[0] {
            return Err(Error::ShapeMismatch {
                context: format!("index {i}"),
                expected: vec![i + 1],
                got: self.shape().to_vec(),
            });
        }
        Ok(node(Op::Index(i), vec![self.clone()], vec![], self.dtype()))
    }

    pub fn index(&self, i: usize) -> Expr {
        self.try_index(i).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Join scalars and vectors end to end into one vector.
    pub fn concat(parts: &[Expr]) -> Result<Expr> {
        if parts.is_empty() {
            return Err(Error::invalid("concat of zero expressions"));
        }
        let mut len = 0;
        for p in parts {
            match p.shape() {
                [] => len += 1,
                [n] => len += n,
                other => {
                    return Err(Error::ShapeMismatch {
                        context: "concat".into(),
                        expected: vec![],
                        got: other.to_vec(),
                    })
                }
            }
        }
        let refs: Vec<&Expr> = parts.iter().collect();
        let dtype = joint_dtype(&refs);
        Ok(node(Op::Concat, parts.to_vec(), vec![len], dtype))
    }

    /// Elementwise `if cond != 0 { a } else { b }`.
    pub fn switch(cond: &Expr, a: &Expr, b: &Expr) -> Result<Expr> {
        let ab = broadcast_shapes(a.shape(), b.shape())
            .ok_or_else(|| shape_error("switch", a.shape(), b.shape()))?;
        let shape = broadcast_shapes(cond.shape(), &ab)
            .ok_or_else(|| shape_error("switch", cond.shape(), &ab))?;
        let dtype = joint_dtype(&[a, b]);
        Ok(node(
            Op::Switch,
            vec![cond.clone(), a.clone(), b.clone()],
            shape,
            dtype,
        ))
    }

    fn compare(op: Op, a: &Expr, b: &Expr) -> Result<Expr> {
        let shape = broadcast_shapes(a.shape(), b.shape())
            .ok_or_else(|| shape_error("comparison", a.shape(), b.shape()))?;
        Ok(node(op, vec![a.clone(), b.clone()], shape, Dtype::Float))
    }

    /// `1.0` where `self >= other`, else `0.0`.
    pub fn ge(&self, other: &Expr) -> Expr {
        Expr::compare(Op::CmpGe, self, other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// `1.0` where `self > other`, else `0.0`.
    pub fn gt(&self, other: &Expr) -> Expr {
        Expr::compare(Op::CmpGt, self, other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// A node computed by an arbitrary function of its inputs' values.
    ///
    /// The function is a black box: differentiating through the node fails
    /// with [`Error::NoGradient`], so models using it can only be fitted by
    /// gradient-free methods.
    pub fn opaque<F>(
        name: impl Into<String>,
        func: F,
        inputs: &[Expr],
        out_shape: &[usize],
        out_dtype: Dtype,
    ) -> Expr
    where
        F: Fn(&[Array]) -> Result<Array> + Send + Sync + 'static,
    {
        node(
            Op::Opaque {
                name: name.into(),
                func: Arc::new(func),
            },
            inputs.to_vec(),
            out_shape.to_vec(),
            out_dtype,
        )
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::scalar(v)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

impl From<Array> for Expr {
    fn from(a: Array) -> Self {
        Expr::constant(a)
    }
}

/// Evaluate `expr` at `point`.
pub fn eval(expr: &Expr, point: &Point) -> Result<Array> {
    Tape::compile(expr)?.eval(point)
}

/// Gradient of the scalar `expr` with respect to the named inputs.
pub fn grad(expr: &Expr, wrt: &[&str], point: &Point) -> Result<Point> {
    let tape = Tape::compile(expr)?;
    let (_, grads) = tape.value_and_grad(point, wrt)?;
    Ok(wrt
        .iter()
        .map(|s| s.to_string())
        .zip(grads)
        .collect())
}
