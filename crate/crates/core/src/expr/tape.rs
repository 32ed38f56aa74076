use std::collections::HashMap;
use std::ops;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{rational_to_f64, Expr, Node, Point};

/// Denominators smaller than this in magnitude are treated as zero.
pub const EPS_DIV: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero (denominator magnitude {0:e})")]
    DivisionByZero(f64),
    #[error("non-finite intermediate result")]
    NonFinite,
}

/// A floating value together with a bound on the magnitudes that went into
/// it. `m` scales the accumulated rounding error, so `|v| / (1 + m)` is a
/// residual that is comparable across points and examples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tracked {
    pub v: f64,
    pub m: f64,
}

impl Tracked {
    pub fn exact(v: f64) -> Tracked {
        Tracked { v, m: v.abs() }
    }

    pub fn zero() -> Tracked {
        Tracked { v: 0.0, m: 0.0 }
    }

    /// Multiplication by an exact constant.
    pub fn scale(self, c: f64) -> Tracked {
        Tracked {
            v: self.v * c,
            m: self.m * c.abs(),
        }
    }

    pub fn normalized(self) -> f64 {
        self.v.abs() / (1.0 + self.m)
    }
}

impl ops::Add for Tracked {
    type Output = Tracked;
    fn add(self, o: Tracked) -> Tracked {
        Tracked {
            v: self.v + o.v,
            m: self.m + o.m,
        }
    }
}

impl ops::Sub for Tracked {
    type Output = Tracked;
    fn sub(self, o: Tracked) -> Tracked {
        Tracked {
            v: self.v - o.v,
            m: self.m + o.m,
        }
    }
}

impl ops::Neg for Tracked {
    type Output = Tracked;
    fn neg(self) -> Tracked {
        Tracked { v: -self.v, m: self.m }
    }
}

impl ops::Mul for Tracked {
    type Output = Tracked;
    fn mul(self, o: Tracked) -> Tracked {
        let v = self.v * o.v;
        Tracked {
            v,
            m: self.m * o.v.abs() + o.m * self.v.abs() + v.abs(),
        }
    }
}

impl std::iter::Sum for Tracked {
    fn sum<I: Iterator<Item = Tracked>>(iter: I) -> Tracked {
        iter.fold(Tracked::zero(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(u8),
    Neg(u32),
    Add(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, i32),
    Exp(u32),
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Const(u64),
    Var(u8),
    Neg(u32),
    Add(Vec<u32>),
    Mul(Vec<u32>),
    Div(u32, u32),
    Pow(u32, i32),
    Exp(u32),
}

/// Straight-line program evaluating a set of expressions with common
/// subexpressions shared.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    args: Vec<u32>,
    outputs: Vec<u32>,
}

struct Compiler {
    ops: Vec<Op>,
    args: Vec<u32>,
    by_id: HashMap<usize, (Expr, u32)>,
    by_key: HashMap<Key, u32>,
}

impl Compiler {
    fn intern(&mut self, key: Key, op: Op) -> u32 {
        if let Some(&s) = self.by_key.get(&key) {
            return s;
        }
        let s = self.ops.len() as u32;
        self.ops.push(op);
        self.by_key.insert(key, s);
        s
    }

    fn list(&mut self, slots: Vec<u32>, mul: bool) -> u32 {
        let key = if mul {
            Key::Mul(slots.clone())
        } else {
            Key::Add(slots.clone())
        };
        if let Some(&s) = self.by_key.get(&key) {
            return s;
        }
        let start = self.args.len() as u32;
        self.args.extend_from_slice(&slots);
        let len = slots.len() as u32;
        let op = if mul { Op::Mul(start, len) } else { Op::Add(start, len) };
        self.intern(key, op)
    }

    fn slot(&mut self, e: &Expr) -> u32 {
        if let Some((_, s)) = self.by_id.get(&e.id()) {
            return *s;
        }
        let s = match e.node() {
            Node::Const(c) => {
                let v = rational_to_f64(c);
                self.intern(Key::Const(v.to_bits()), Op::Const(v))
            }
            Node::Var(v) => self.intern(Key::Var(v.index() as u8), Op::Var(v.index() as u8)),
            Node::Neg(a) => {
                let a = self.slot(a);
                self.intern(Key::Neg(a), Op::Neg(a))
            }
            Node::Add(ts) => {
                let slots: Vec<u32> = ts.iter().map(|t| self.slot(t)).collect();
                self.list(slots, false)
            }
            Node::Mul(fs) => {
                let slots: Vec<u32> = fs.iter().map(|f| self.slot(f)).collect();
                self.list(slots, true)
            }
            Node::Div(a, b) => {
                let a = self.slot(a);
                let b = self.slot(b);
                self.intern(Key::Div(a, b), Op::Div(a, b))
            }
            Node::Pow(a, k) => {
                let a = self.slot(a);
                self.intern(Key::Pow(a, *k), Op::Pow(a, *k))
            }
            Node::Exp(a) => {
                let a = self.slot(a);
                self.intern(Key::Exp(a), Op::Exp(a))
            }
        };
        self.by_id.insert(e.id(), (e.clone(), s));
        s
    }
}

fn check(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl Tape {
    pub fn compile(outputs: &[Expr]) -> Tape {
        let mut c = Compiler {
            ops: Vec::new(),
            args: Vec::new(),
            by_id: HashMap::new(),
            by_key: HashMap::new(),
        };
        let outputs = outputs.iter().map(|e| c.slot(e)).collect();
        Tape {
            ops: c.ops,
            args: c.args,
            outputs,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn eval(&self, pt: &Point) -> Result<Vec<f64>, EvalError> {
        let x = pt.coords();
        let mut vals: Vec<f64> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(i) => x[i as usize],
                Op::Neg(a) => -vals[a as usize],
                Op::Add(s, n) => self.args[s as usize..(s + n) as usize]
                    .iter()
                    .map(|&a| vals[a as usize])
                    .sum(),
                Op::Mul(s, n) => self.args[s as usize..(s + n) as usize]
                    .iter()
                    .map(|&a| vals[a as usize])
                    .product(),
                Op::Div(a, b) => {
                    let d = vals[b as usize];
                    if d.abs() < EPS_DIV {
                        return Err(EvalError::DivisionByZero(d.abs()));
                    }
                    vals[a as usize] / d
                }
                Op::Pow(a, k) => {
                    let b = vals[a as usize];
                    if k < 0 && b.abs() < EPS_DIV {
                        return Err(EvalError::DivisionByZero(b.abs()));
                    }
                    b.powi(k)
                }
                Op::Exp(a) => vals[a as usize].exp(),
            };
            vals.push(check(v)?);
        }
        Ok(self.outputs.iter().map(|&o| vals[o as usize]).collect())
    }

    /// Evaluation with magnitude tracking (see [`Tracked`]).
    pub fn eval_tracked(&self, pt: &Point) -> Result<Vec<Tracked>, EvalError> {
        let x = pt.coords();
        let mut vals: Vec<Tracked> = Vec::with_capacity(self.ops.len());
        let mut scratch: Vec<Tracked> = Vec::new();
        for op in &self.ops {
            let t = match *op {
                Op::Const(c) => Tracked::exact(c),
                Op::Var(i) => Tracked::exact(x[i as usize]),
                Op::Neg(a) => -vals[a as usize],
                Op::Add(s, n) => self.args[s as usize..(s + n) as usize]
                    .iter()
                    .map(|&a| vals[a as usize])
                    .sum(),
                Op::Mul(s, n) => {
                    scratch.clear();
                    scratch.extend(
                        self.args[s as usize..(s + n) as usize]
                            .iter()
                            .map(|&a| vals[a as usize]),
                    );
                    product_tracked(&scratch)
                }
                Op::Div(a, b) => {
                    let (n, d) = (vals[a as usize], vals[b as usize]);
                    if d.v.abs() < EPS_DIV {
                        return Err(EvalError::DivisionByZero(d.v.abs()));
                    }
                    let v = n.v / d.v;
                    Tracked {
                        v,
                        m: n.m / d.v.abs() + v.abs() * d.m / d.v.abs() + v.abs(),
                    }
                }
                Op::Pow(a, k) => {
                    let b = vals[a as usize];
                    if k < 0 && b.v.abs() < EPS_DIV {
                        return Err(EvalError::DivisionByZero(b.v.abs()));
                    }
                    let v = b.v.powi(k);
                    let dm = (k as f64).abs() * b.v.abs().powi(k - 1) * b.m;
                    Tracked { v, m: dm + v.abs() }
                }
                Op::Exp(a) => {
                    let u = vals[a as usize];
                    let v = u.v.exp();
                    Tracked { v, m: v * (1.0 + u.m) }
                }
            };
            check(t.v)?;
            check(t.m)?;
            vals.push(t);
        }
        Ok(self.outputs.iter().map(|&o| vals[o as usize]).collect())
    }
}

fn product_tracked(fs: &[Tracked]) -> Tracked {
    let n = fs.len();
    // prefix and suffix products of |v| give each "all but i" product
    let mut prefix = vec![1.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * fs[i].v.abs();
    }
    let mut suffix = 1.0;
    let mut m = 0.0;
    for i in (0..n).rev() {
        m += fs[i].m * prefix[i] * suffix;
        suffix *= fs[i].v.abs();
    }
    let v: f64 = fs.iter().map(|f| f.v).product();
    Tracked { v, m: m + v.abs() }
}
