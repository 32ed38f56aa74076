use std::collections::HashMap;

use num::{BigInt, BigRational};

use super::{Expr, Node, Var};

/// Symbolic partial differentiation with a per-node cache.
///
/// The cache is keyed by node identity, so repeated derivatives of shared
/// subgraphs (and of previously returned derivatives) are computed once.
#[derive(Default)]
pub struct Differentiator {
    memo: HashMap<(usize, Var), (Expr, Expr)>,
}

impl Differentiator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cached(&self) -> usize {
        self.memo.len()
    }

    /// First partial derivative.
    pub fn d(&mut self, e: &Expr, v: Var) -> Expr {
        let key = (e.id(), v);
        if let Some((_, r)) = self.memo.get(&key) {
            return r.clone();
        }
        let r = self.rule(e, v);
        // keep `e` alive so its address cannot be reused by another node
        self.memo.insert(key, (e.clone(), r.clone()));
        r
    }

    /// Mixed partial for a multi-index; the order is normalized first.
    pub fn partial(&mut self, e: &Expr, vars: &[Var]) -> Expr {
        let mut vs = vars.to_vec();
        vs.sort();
        let mut out = e.clone();
        for v in vs {
            out = self.d(&out, v);
        }
        out
    }

    fn rule(&mut self, e: &Expr, v: Var) -> Expr {
        match e.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => Expr::neg(self.d(a, v)),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| self.d(t, v)).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let di = self.d(&fs[i], v);
                    if di.is_zero() {
                        continue;
                    }
                    let mut prod: Vec<Expr> = Vec::with_capacity(fs.len());
                    for (j, f) in fs.iter().enumerate() {
                        prod.push(if i == j { di.clone() } else { f.clone() });
                    }
                    terms.push(Expr::mul(prod));
                }
                Expr::add(terms)
            }
            Node::Div(n, d) => {
                let dn = self.d(n, v);
                let dd = self.d(d, v);
                let inv = Expr::pow(d.clone(), -1);
                Expr::sub(Expr::mul(vec![dn, inv.clone()]), Expr::mul(vec![e.clone(), dd, inv]))
            }
            Node::Pow(b, k) => {
                let db = self.d(b, v);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::mul(vec![
                    Expr::constant(BigRational::from_integer(BigInt::from(*k))),
                    Expr::pow(b.clone(), k - 1),
                    db,
                ])
            }
            Node::Exp(a) => {
                let da = self.d(a, v);
                Expr::mul(vec![e.clone(), da])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression, Point};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn linear_term() {
        let mut d = Differentiator::new();
        let e = parse_expression("x1 + y1").unwrap();
        assert!(d.d(&e, Var::X1).is_one());
    }

    #[test]
    fn product_of_independent_variables() {
        let mut d = Differentiator::new();
        let e = parse_expression("x1*y2 + x2*y1").unwrap();
        assert_eq!(d.d(&e, Var::Y2), Expr::var(Var::X1));
    }

    #[test]
    fn chain_rule_on_exp() {
        let mut d = Differentiator::new();
        let e = parse_expression("exp(x1*y1)").unwrap();
        let got = d.d(&e, Var::X1);
        let want = parse_expression("y1*exp(x1*y1)").unwrap().simplify();
        let pt = Point::new(0.3, -1.2, 0.7, 2.0);
        assert!(close(got.eval(&pt).unwrap(), want.eval(&pt).unwrap()));
    }

    #[test]
    fn quotient_rule() {
        let mut d = Differentiator::new();
        let e = parse_expression("x1/(1 + x1*y2)").unwrap();
        let got = d.d(&e, Var::X1);
        let pt = Point::new(0.5, 0.0, 0.0, 2.0);
        // 1/(1+x1 y2)^2 = 1/4
        assert!(close(got.eval(&pt).unwrap(), 0.25));
    }

    #[test]
    fn multi_index_is_order_free() {
        let mut d = Differentiator::new();
        let e = parse_expression("x1^3*y2^2/(1 + x1*y1)").unwrap();
        let a = d.partial(&e, &[Var::Y2, Var::X1]);
        let b = d.partial(&e, &[Var::X1, Var::Y2]);
        assert_eq!(a.id(), b.id());
    }
}
