use std::collections::HashMap;
use std::fmt;

use num::{BigInt, BigRational, Num};
use thiserror::Error;

use super::{Expr, Node, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownIdentifier(String),
    BadExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken { found, expected } => write!(f, "expected {expected}, found '{found}'"),
            ParseErrorKind::UnexpectedEnd { expected } => write!(f, "expected {expected}, found end of input"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
            ParseErrorKind::BadExponent => write!(f, "exponent must be an integer that fits in 32 bits"),
        }
    }
}

/// Syntax error; `column` is 1-based and counts characters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at column {column}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Sym(c) => write!(f, "{c}"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut int_part = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                int_part.push(chars[i]);
                i += 1;
            }
            let mut frac = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    frac.push(chars[i]);
                    i += 1;
                }
            }
            let digits = format!("{int_part}{frac}");
            let numer =
                BigInt::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).map_err(|_| ParseError {
                    kind: ParseErrorKind::UnexpectedChar(c),
                    column: start + 1,
                })?;
            let denom = num::pow(BigInt::from(10), frac.len());
            out.push((Tok::Num(BigRational::new(numer, denom)), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
            }
            out.push((Tok::Ident(s), start));
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), start));
            i += 1;
            continue;
        }
        return Err(ParseError {
            kind: ParseErrorKind::UnexpectedChar(c),
            column: start + 1,
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    env: &'a HashMap<String, Expr>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end) + 1
    }

    fn err_here(&self, expected: &'static str) -> ParseError {
        let kind = match self.peek() {
            Some(t) => ParseErrorKind::UnexpectedToken {
                found: t.to_string(),
                expected,
            },
            None => ParseErrorKind::UnexpectedEnd { expected },
        };
        ParseError {
            kind,
            column: self.column(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err_here(what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                terms.push(Expr::raw(Node::Neg(t)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::raw(Node::Add(terms))
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat('*') {
                factors.push(self.factor()?);
            } else if self.eat('/') {
                let num = collapse(std::mem::take(&mut factors));
                let den = self.factor()?;
                factors.push(Expr::raw(Node::Div(num, den)));
            } else {
                break;
            }
        }
        Ok(collapse(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        // unary minus applies to the whole power: -x^2 is -(x^2)
        if self.eat('-') {
            let f = self.factor()?;
            return Ok(Expr::raw(Node::Neg(f)));
        }
        let base = self.base()?;
        if self.eat('^') {
            let k = self.exponent()?;
            return Ok(Expr::raw(Node::Pow(base, k)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let col = self.column();
        let paren = self.eat('(');
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let n = match self.peek() {
            Some(Tok::Num(n)) if n.is_integer() => n.to_integer(),
            _ => return Err(self.err_here("integer exponent")),
        };
        self.pos += 1;
        if paren {
            self.expect(')', "')'")?;
        }
        let n = if neg { -n } else { n };
        i32::try_from(n).map_err(|_| ParseError {
            kind: ParseErrorKind::BadExponent,
            column: col,
        })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::constant(n))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')', "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "exp" {
                    self.expect('(', "'(' after exp")?;
                    let e = self.expr()?;
                    self.expect(')', "')'")?;
                    return Ok(Expr::raw(Node::Exp(e)));
                }
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::var(v));
                }
                if let Some(e) = self.env.get(&name) {
                    return Ok(e.clone());
                }
                Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name),
                    column: col,
                })
            }
            _ => Err(self.err_here("number, variable or '('")),
        }
    }
}

fn collapse(mut fs: Vec<Expr>) -> Expr {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Expr::raw(Node::Mul(fs))
    }
}

/// Parses the expression DSL. Identifiers are x1, x2, y1, y2 and `exp`.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, &HashMap::new())
}

/// Like [`parse_expression`], with extra named sub-expressions in scope.
pub fn parse_with(text: &str, env: &HashMap<String, Expr>) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        env,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err_here("operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Point;

    #[test]
    fn sum_of_two_variables() {
        let e = parse_expression("x1 + y1").unwrap();
        assert_eq!(e, Expr::raw(Node::Add(vec![Expr::var(Var::X1), Expr::var(Var::Y1)])));
    }

    #[test]
    fn example_one_first_function() {
        let e = parse_expression("x1 + y1 + (1/2)*x1^2*y2").unwrap();
        assert_eq!(e.eval(&Point::new(1.0, 0.0, 0.0, 2.0)).unwrap(), 2.0);
    }

    #[test]
    fn exponential_factor() {
        let e = parse_expression("x2*y2*exp(x1*y1)").unwrap();
        let v = e.eval(&Point::new(1.0, 2.0, 1.0, 3.0)).unwrap();
        assert!((v - 6.0 * std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse_expression("0.25").unwrap();
        assert_eq!(e.as_const(), Some(&crate::expr::rat(1, 4)));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse_expression("-x1^2").unwrap();
        assert_eq!(e.eval(&Point::new(3.0, 0.0, 0.0, 0.0)).unwrap(), -9.0);
    }

    #[test]
    fn negative_exponents() {
        let a = parse_expression("x1^-2").unwrap();
        let b = parse_expression("x1^(-2)").unwrap();
        let pt = Point::new(2.0, 0.0, 0.0, 0.0);
        assert_eq!(a.eval(&pt).unwrap(), 0.25);
        assert_eq!(b.eval(&pt).unwrap(), 0.25);
    }

    #[test]
    fn unknown_identifier_reports_column() {
        let err = parse_expression("x1 + z3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("z3".into()));
        assert_eq!(err.column, 6);
    }

    #[test]
    fn syntax_error_reports_column() {
        let err = parse_expression("x1 + * y1").unwrap_err();
        assert_eq!(err.column, 6);
        let err = parse_expression("(x1 + y1").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
        assert_eq!(err.column, 9);
        assert!(parse_expression("x1 $ y1").is_err());
        assert!(parse_expression("x1^1.5").is_err());
    }

    #[test]
    fn bindings_substitute() {
        let mut env = HashMap::new();
        env.insert("D".to_string(), parse_expression("1 + x1*y2").unwrap());
        let e = parse_with("2/D", &env).unwrap();
        assert_eq!(e.eval(&Point::new(1.0, 0.0, 0.0, 1.0)).unwrap(), 1.0);
    }
}
