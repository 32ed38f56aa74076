use std::fmt::{self, Write};

use num::{BigRational, Signed};

use super::{Expr, Node};

// Printed text always parses back to an expression with the same value.

fn write_const(out: &mut String, c: &BigRational) {
    if c.is_integer() {
        if c.is_negative() {
            let _ = write!(out, "({c})");
        } else {
            let _ = write!(out, "{c}");
        }
    } else {
        let _ = write!(out, "({}/{})", c.numer(), c.denom());
    }
}

fn needs_parens_as_factor(e: &Expr) -> bool {
    matches!(e.node(), Node::Add(_))
}

fn needs_parens_as_denominator(e: &Expr) -> bool {
    matches!(e.node(), Node::Add(_) | Node::Mul(_) | Node::Div(..))
}

fn is_atom(e: &Expr) -> bool {
    match e.node() {
        Node::Var(_) | Node::Exp(_) | Node::Neg(_) => true,
        Node::Const(c) => !c.is_integer() || !c.is_negative(),
        _ => false,
    }
}

fn wrapped(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

/// A term with a negative leading coefficient, printed without its sign.
fn negated_term(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Neg(a) => Some(a.clone()),
        Node::Mul(fs) => match fs[0].as_const() {
            Some(c) if c.is_negative() => {
                let mut rest = fs.clone();
                let c = -c.clone();
                if num::One::is_one(&c) {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::constant(c);
                }
                Some(if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    Expr::raw(Node::Mul(rest))
                })
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Const(c) => write_const(out, c),
        Node::Var(v) => out.push_str(v.name()),
        Node::Neg(a) => {
            out.push_str("(-");
            wrapped(out, a, !is_atom(a) && !matches!(a.node(), Node::Pow(..)));
            out.push(')');
        }
        Node::Add(ts) => {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_expr(out, t);
                    continue;
                }
                match negated_term(t) {
                    Some(n) => {
                        out.push_str(" - ");
                        wrapped(out, &n, needs_parens_as_factor(&n));
                    }
                    None => {
                        out.push_str(" + ");
                        write_expr(out, t);
                    }
                }
            }
        }
        Node::Mul(fs) => {
            for (i, f) in fs.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                wrapped(out, f, needs_parens_as_factor(f) || matches!(f.node(), Node::Div(..)));
            }
        }
        Node::Div(n, d) => {
            wrapped(out, n, needs_parens_as_factor(n));
            out.push('/');
            wrapped(out, d, needs_parens_as_denominator(d));
        }
        Node::Pow(b, k) => {
            wrapped(out, b, !is_atom(b) || matches!(b.node(), Node::Neg(_)));
            if *k < 0 {
                let _ = write!(out, "^({k})");
            } else {
                let _ = write!(out, "^{k}");
            }
        }
        Node::Exp(a) => {
            out.push_str("exp(");
            write_expr(out, a);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}
