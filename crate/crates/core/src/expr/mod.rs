//! Symbolic scalar expressions over the four coordinates x1, x2, y1, y2.

mod diff;
mod display;
mod parse;
mod tape;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use diff::Differentiator;
pub use parse::{parse_expression, parse_with, ParseError, ParseErrorKind};
pub use tape::{EvalError, Tape, Tracked, EPS_DIV};

/// One of the four coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X1,
    X2,
    Y1,
    Y2,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X1, Var::X2, Var::Y1, Var::Y2];
    pub const X: [Var; 2] = [Var::X1, Var::X2];
    pub const Y: [Var; 2] = [Var::Y1, Var::Y2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::Y1 => "y1",
            Var::Y2 => "y2",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        match s {
            "x1" => Some(Var::X1),
            "x2" => Some(Var::X2),
            "y1" => Some(Var::Y1),
            "y2" => Some(Var::Y2),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point (x1, x2, y1, y2).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Point { x1, x2, y1, y2 }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_coords(c: [f64; 4]) -> Self {
        Point::new(c[0], c[1], c[2], c[3])
    }

    pub fn get(&self, v: Var) -> f64 {
        self.coords()[v.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }
}

impl fmt::Display for Point {
    /// Full precision, so that witnesses can be recomputed elsewhere.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}, {:?}, {:?})", self.x1, self.x2, self.y1, self.y2)
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(BigRational),
    Var(Var),
    Neg(Expr),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Exp(Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// Immutable, cheaply clonable expression tree. Subtrees are shared.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Expr {}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Const(c) => {
            0u8.hash(&mut h);
            c.hash(&mut h);
        }
        Node::Var(v) => {
            1u8.hash(&mut h);
            v.hash(&mut h);
        }
        Node::Neg(a) => {
            2u8.hash(&mut h);
            a.hash(&mut h);
        }
        Node::Add(ts) => {
            3u8.hash(&mut h);
            ts.hash(&mut h);
        }
        Node::Mul(fs) => {
            4u8.hash(&mut h);
            fs.hash(&mut h);
        }
        Node::Div(a, b) => {
            5u8.hash(&mut h);
            a.hash(&mut h);
            b.hash(&mut h);
        }
        Node::Pow(a, k) => {
            6u8.hash(&mut h);
            a.hash(&mut h);
            k.hash(&mut h);
        }
        Node::Exp(a) => {
            7u8.hash(&mut h);
            a.hash(&mut h);
        }
    }
    h.finish()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    /// Wraps a node without any rewriting.
    pub fn raw(node: Node) -> Expr {
        let hash = node_hash(&node);
        Expr(Arc::new(Inner { node, hash }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Address of the shared node; stable while any clone is alive.
    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::raw(Node::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::constant(rat(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::raw(Node::Var(v))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Sum with constant folding, flattening and like-term collection.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut konst = BigRational::zero();
        let mut order: Vec<Expr> = Vec::new();
        let mut coefs: HashMap<Expr, BigRational> = HashMap::new();
        let mut stack: Vec<(BigRational, Expr)> = terms.into_iter().rev().map(|t| (BigRational::one(), t)).collect();
        while let Some((scale, t)) = stack.pop() {
            match t.node() {
                Node::Add(inner) => {
                    for s in inner.iter().rev() {
                        stack.push((scale.clone(), s.clone()));
                    }
                }
                _ => {
                    let (c, rest) = split_coef(&t);
                    let c = c * &scale;
                    match rest {
                        None => konst += c,
                        Some(r) => {
                            if let Some(e) = coefs.get_mut(&r) {
                                *e += c;
                            } else {
                                order.push(r.clone());
                                coefs.insert(r, c);
                            }
                        }
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(order.len() + 1);
        if !konst.is_zero() {
            out.push(Expr::constant(konst));
        }
        for r in order {
            let c = coefs.remove(&r).unwrap_or_default();
            if c.is_zero() {
                continue;
            }
            if c.is_one() {
                out.push(r);
            } else {
                out.push(Expr::mul(vec![Expr::constant(c), r]));
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(Node::Add(out)),
        }
    }

    /// Product with constant folding, flattening, power collection and
    /// merging of exponential factors.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut coef = BigRational::one();
        let mut order: Vec<Expr> = Vec::new();
        let mut powers: HashMap<Expr, i64> = HashMap::new();
        let mut exp_args: Vec<Expr> = Vec::new();
        let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Const(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coef *= c;
                }
                Node::Mul(inner) => {
                    for g in inner.iter().rev() {
                        stack.push(g.clone());
                    }
                }
                Node::Neg(a) => {
                    coef = -coef;
                    stack.push(a.clone());
                }
                Node::Exp(a) => exp_args.push(a.clone()),
                _ => {
                    let (base, k) = match f.node() {
                        Node::Pow(b, k) => (b.clone(), *k as i64),
                        _ => (f.clone(), 1),
                    };
                    if let Some(e) = powers.get_mut(&base) {
                        *e += k;
                    } else {
                        order.push(base.clone());
                        powers.insert(base, k);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(order.len() + 2);
        for b in order {
            let k = powers.remove(&b).unwrap_or(0);
            match k {
                0 => {}
                1 => out.push(b),
                _ => out.push(Expr::pow(b, k as i32)),
            }
        }
        if !exp_args.is_empty() {
            let e = Expr::exp(Expr::add(exp_args));
            if !e.is_one() {
                out.push(e);
            }
        }
        if out.is_empty() {
            return Expr::constant(coef);
        }
        if coef.is_one() {
            if out.len() == 1 {
                return out.pop().unwrap();
            }
        } else {
            out.insert(0, Expr::constant(coef));
        }
        Expr::raw(Node::Mul(out))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::mul(vec![Expr::int(-1), e])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg(b)])
    }

    /// Quotient, normalized to a product with a negative power.
    pub fn div(n: Expr, d: Expr) -> Expr {
        if n.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = d.as_const() {
            if !c.is_zero() {
                return Expr::mul(vec![n, Expr::constant(c.recip())]);
            }
            return Expr::raw(Node::Div(n, d));
        }
        Expr::mul(vec![n, Expr::pow(d, -1)])
    }

    pub fn pow(b: Expr, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return b;
        }
        match b.node() {
            Node::Const(c) => {
                if c.is_zero() && k < 0 {
                    return Expr::raw(Node::Pow(b, k));
                }
                Expr::constant(num::pow::Pow::pow(c, k))
            }
            Node::Pow(inner, j) => match j.checked_mul(k) {
                Some(jk) => Expr::pow(inner.clone(), jk),
                None => Expr::raw(Node::Pow(b, k)),
            },
            Node::Mul(fs) => Expr::mul(fs.iter().map(|f| Expr::pow(f.clone(), k)).collect()),
            Node::Exp(a) => Expr::exp(Expr::mul(vec![Expr::int(k as i64), a.clone()])),
            _ => Expr::raw(Node::Pow(b, k)),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        if a.is_zero() {
            return Expr::one();
        }
        Expr::raw(Node::Exp(a))
    }

    /// Rebuilds the tree through the rewriting constructors. Value preserving.
    pub fn simplify(&self) -> Expr {
        let mut memo = HashMap::new();
        simplify_rec(self, &mut memo)
    }

    /// Replaces coordinates by expressions.
    pub fn substitute(&self, map: &[(Var, Expr)]) -> Expr {
        let mut memo = HashMap::new();
        subst_rec(self, map, &mut memo)
    }

    /// Direct evaluation. For repeated evaluation compile a [`Tape`].
    pub fn eval(&self, pt: &Point) -> Result<f64, EvalError> {
        let tape = Tape::compile(std::slice::from_ref(self));
        Ok(tape.eval(pt)?[0])
    }

    /// Number of distinct nodes in the shared graph.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            stack.extend(e.children());
        }
        seen.len()
    }

    pub(crate) fn children(&self) -> Vec<Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) => vec![],
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => vec![a.clone()],
            Node::Add(ts) | Node::Mul(ts) => ts.clone(),
            Node::Div(a, b) => vec![a.clone(), b.clone()],
        }
    }
}

/// Splits a term into its rational coefficient and the remaining factor.
fn split_coef(t: &Expr) -> (BigRational, Option<Expr>) {
    match t.node() {
        Node::Const(c) => (c.clone(), None),
        Node::Neg(a) => {
            let (c, r) = split_coef(a);
            (-c, r)
        }
        Node::Mul(fs) => match fs[0].as_const() {
            Some(c) => {
                let rest: Vec<Expr> = fs[1..].to_vec();
                let r = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::raw(Node::Mul(rest))
                };
                (c.clone(), Some(r))
            }
            None => (BigRational::one(), Some(t.clone())),
        },
        _ => (BigRational::one(), Some(t.clone())),
    }
}

fn simplify_rec(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(s) = memo.get(&e.id()) {
        return s.clone();
    }
    let out = match e.node() {
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Neg(a) => Expr::neg(simplify_rec(a, memo)),
        Node::Add(ts) => Expr::add(ts.iter().map(|t| simplify_rec(t, memo)).collect()),
        Node::Mul(fs) => Expr::mul(fs.iter().map(|f| simplify_rec(f, memo)).collect()),
        Node::Div(a, b) => Expr::div(simplify_rec(a, memo), simplify_rec(b, memo)),
        Node::Pow(a, k) => Expr::pow(simplify_rec(a, memo), *k),
        Node::Exp(a) => Expr::exp(simplify_rec(a, memo)),
    };
    memo.insert(e.id(), out.clone());
    out
}

fn subst_rec(e: &Expr, map: &[(Var, Expr)], memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(s) = memo.get(&e.id()) {
        return s.clone();
    }
    let out = match e.node() {
        Node::Const(_) => e.clone(),
        Node::Var(v) => map
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| e.clone()),
        Node::Neg(a) => Expr::neg(subst_rec(a, map, memo)),
        Node::Add(ts) => Expr::add(ts.iter().map(|t| subst_rec(t, map, memo)).collect()),
        Node::Mul(fs) => Expr::mul(fs.iter().map(|f| subst_rec(f, map, memo)).collect()),
        Node::Div(a, b) => Expr::div(subst_rec(a, map, memo), subst_rec(b, map, memo)),
        Node::Pow(a, k) => Expr::pow(subst_rec(a, map, memo), *k),
        Node::Exp(a) => Expr::exp(subst_rec(a, map, memo)),
    };
    memo.insert(e.id(), out.clone());
    out
}

pub(crate) fn rational_to_f64(c: &BigRational) -> f64 {
    match c.to_f64() {
        Some(v) => v,
        None => {
            // huge numerator or denominator: scale down before dividing
            let n = c
                .numer()
                .to_f64()
                .unwrap_or(f64::INFINITY * c.numer().signum().to_f64().unwrap_or(1.0));
            let d = c.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self.clone(), rhs.clone()])
    }
}

impl ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self.clone(), rhs.clone())
    }
}

impl ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(vec![self.clone(), rhs.clone()])
    }
}

impl ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self.clone(), rhs.clone())
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> Expr {
        Expr::var(Var::X1)
    }
    fn y1() -> Expr {
        Expr::var(Var::Y1)
    }

    #[test]
    fn like_terms_cancel() {
        let e = &(&x1() + &y1()) - &x1();
        assert_eq!(e, y1());
        let z = &x1() - &x1();
        assert!(z.is_zero());
    }

    #[test]
    fn factors_collect_into_powers() {
        let e = Expr::mul(vec![x1(), x1(), Expr::pow(x1(), -2)]);
        assert!(e.is_one());
        let s = Expr::mul(vec![x1(), x1()]);
        assert_eq!(s, Expr::raw(Node::Pow(x1(), 2)));
    }

    #[test]
    fn exponentials_merge() {
        let e = Expr::exp(x1()) * Expr::exp(-x1());
        assert!(e.is_one());
    }

    #[test]
    fn constants_fold() {
        let e = Expr::ratio(2, 4) * x1();
        match e.node() {
            Node::Mul(fs) => assert_eq!(fs[0].as_const(), Some(&rat(1, 2))),
            _ => panic!("expected product"),
        }
    }

    #[test]
    fn simplify_examples() {
        let e = parse_expression("0*x1 + y1").unwrap().simplify();
        assert_eq!(e, y1());
        let e = parse_expression("x1^1 * 1").unwrap().simplify();
        assert_eq!(e, x1());
        let e = parse_expression("(2/4)*x1").unwrap().simplify();
        assert_eq!(e.to_string(), "(1/2)*x1");
    }
}
