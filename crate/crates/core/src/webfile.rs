//! The `key = "value"` web-definition format.
//!
//! ```text
//! # comment
//! name = "example"
//! let.D = "(1 + x1*y2)"
//! f1 = "x1 + y1 + (1/2)*x1^2*y2"
//! f2 = "x2 + y2 - (1/2)*x1*y2^2"
//! domain = "D != 0"
//! ```
//!
//! `let.NAME` binds a sub-expression usable anywhere in the file and by
//! later bindings. Corpus files
//! also carry `classes`, `columns`, `open`, `expect.<path>`, `erratum.<path>` and
//! `u4_1`/`u4_2`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::engine::{Constraint, ConstraintError, Relation, WebDefinition};
use crate::expr::{parse_with, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
pub struct WebFileError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// 1-based column of the first character of the value.
    pub value_column: usize,
}

fn err(line: usize, column: Option<usize>, message: impl Into<String>) -> WebFileError {
    WebFileError {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a document into entries without interpreting them.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, WebFileError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(eq) = raw.find('=') else {
            return Err(err(line, None, "expected `key = \"value\""));
        };
        let key = raw[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || "._^".contains(c)) {
            return Err(err(
                line,
                Some(1 + raw[..eq].chars().count() - raw[..eq].trim_start().chars().count()),
                format!("bad key `{key}`"),
            ));
        }
        let rest = &raw[eq + 1..];
        let lead = rest.len() - rest.trim_start().len();
        let body = rest.trim();
        let start_byte = eq + 1 + lead;
        let (value, value_start) = if let Some(inner) = body.strip_prefix('"') {
            let Some(inner) = inner.strip_suffix('"') else {
                return Err(err(
                    line,
                    Some(raw[..start_byte].chars().count() + 1),
                    "unterminated string",
                ));
            };
            (inner.to_string(), start_byte + 1)
        } else {
            (body.to_string(), start_byte)
        };
        out.push(Entry {
            key: key.to_string(),
            value,
            line,
            value_column: raw[..value_start].chars().count() + 1,
        });
    }
    Ok(out)
}

/// A parsed web file: the web itself plus any corpus annotations.
#[derive(Debug, Clone)]
pub struct WebFile {
    pub web: WebDefinition,
    pub env: HashMap<String, Expr>,
    /// Remaining keys (classes, columns, open, expect.*, erratum.*, u4_*) in order.
    pub extra: Vec<Entry>,
}

impl WebFile {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.extra.iter().find(|e| e.key == key)
    }

    /// Parses an expression-valued entry with the file's bindings in scope.
    pub fn expr(&self, e: &Entry) -> Result<Expr, WebFileError> {
        expr_at(e, &self.env)
    }
}

fn expr_at(e: &Entry, env: &HashMap<String, Expr>) -> Result<Expr, WebFileError> {
    parse_with(&e.value, env)
        .map_err(|p: ParseError| err(e.line, Some(e.value_column + p.column - 1), p.kind.to_string()))
}

const EXTRA_KEYS: [&str; 5] = ["classes", "columns", "open", "u4_1", "u4_2"];

pub fn parse_web_file(text: &str) -> Result<WebFile, WebFileError> {
    let entries = parse_entries(text)?;
    let mut env: HashMap<String, Expr> = HashMap::new();
    let mut name = None;
    let mut f = [None, None];
    let mut domain = Vec::new();
    let mut notes = Vec::new();
    let mut extra = Vec::new();
    // bindings are visible everywhere, in file order among themselves
    let (lets, rest): (Vec<Entry>, Vec<Entry>) = entries.into_iter().partition(|e| e.key.starts_with("let."));
    for e in &lets {
        let v = expr_at(e, &env)?;
        env.insert(e.key[4..].to_string(), v);
    }
    for e in rest {
        match e.key.as_str() {
            "name" => name = Some(e.value.clone()),
            "notes" => notes.push(e.value.clone()),
            "f1" | "f2" => {
                let i = usize::from(e.key == "f2");
                if f[i].is_some() {
                    return Err(err(e.line, None, format!("duplicate key `{}`", e.key)));
                }
                f[i] = Some(expr_at(&e, &env)?);
            }
            "domain" => {
                let c = Constraint::parse(&e.value, &env).map_err(|c| match c {
                    ConstraintError::Expr(p) => err(e.line, Some(e.value_column + p.column - 1), p.kind.to_string()),
                    other => err(e.line, None, other.to_string()),
                })?;
                domain.push(c);
            }
            k if EXTRA_KEYS.contains(&k) || k.starts_with("expect.") || k.starts_with("erratum.") => extra.push(e),
            k => return Err(err(e.line, None, format!("unknown key `{k}`"))),
        }
    }
    let [Some(f1), Some(f2)] = f else {
        let missing = if f[0].is_none() { "f1" } else { "f2" };
        return Err(err(0, None, format!("missing required key `{missing}`")));
    };
    let web = WebDefinition::new(
        name.unwrap_or_else(|| "unnamed".into()),
        f1,
        f2,
        domain,
        notes.join("\n"),
    );
    Ok(WebFile { web, env, extra })
}

/// Writes a web back out in the same format, with bindings expanded.
pub fn render_web(web: &WebDefinition) -> String {
    let mut s = String::new();
    let _ = fmt::Write::write_fmt(&mut s, format_args!("name = \"{}\"\n", web.name()));
    let _ = fmt::Write::write_fmt(
        &mut s,
        format_args!("f1 = \"{}\"\nf2 = \"{}\"\n", web.f()[0], web.f()[1]),
    );
    for c in web.domain() {
        let op = match c.relation {
            Relation::NonZero => "!=",
            Relation::Positive => ">",
            Relation::Negative => "<",
        };
        let _ = fmt::Write::write_fmt(&mut s, format_args!("domain = \"{} {op} 0\"\n", c.expr));
    }
    for n in web.notes().lines() {
        let _ = fmt::Write::write_fmt(&mut s, format_args!("notes = \"{n}\"\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Point;

    #[test]
    fn parses_a_minimal_web() {
        let w = parse_web_file("# c\nname = \"w\"\nf1 = \"x1 + y1\"\nf2 = \"x2 + y2\"\n").unwrap();
        assert_eq!(w.web.name(), "w");
        assert!(w.web.domain().is_empty());
    }

    #[test]
    fn bindings_reach_functions_and_domain() {
        let text = "let.D = \"(1 + x1*y2)\"\nf1 = \"x1 + y1 + D\"\nf2 = \"x2 + y2\"\ndomain = \"D != 0\"\n";
        let w = parse_web_file(text).unwrap();
        let v = w.web.f()[0].eval(&Point::new(1.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(w.web.domain()[0].text, "D != 0");
    }

    #[test]
    fn expression_errors_carry_line_and_column() {
        let e = parse_web_file("f1 = \"x1 + * y1\"\nf2 = \"x2\"\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.column, Some(12));
        let e = parse_web_file("f1 = \"x1\"\nf2 = \"x2 + z9\"\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, Some(12)));
    }

    #[test]
    fn structural_errors() {
        assert!(parse_web_file("f1 = \"x1\"\n").unwrap_err().message.contains("f2"));
        assert!(parse_web_file("f1 \"x1\"\n").is_err());
        assert!(parse_web_file("colour = \"red\"\n")
            .unwrap_err()
            .message
            .contains("unknown key"));
        assert!(parse_web_file("f1 = \"x1\nf2 = \"x2\"\n").is_err());
        assert!(parse_web_file("f1 = \"x1\"\nf2 = \"x2\"\ndomain = \"x1 = 0\"\n").is_err());
    }

    #[test]
    fn render_round_trips() {
        let w = parse_web_file("name = \"r\"\nf1 = \"x1 + y1 + x1*y2\"\nf2 = \"x2 + y2\"\ndomain = \"1 + y2 != 0\"\n")
            .unwrap();
        let back = parse_web_file(&render_web(&w.web)).unwrap();
        let pt = Point::new(0.3, 0.1, -0.2, 0.7);
        assert_eq!(back.web.f()[0].eval(&pt).unwrap(), w.web.f()[0].eval(&pt).unwrap());
        assert_eq!(back.web.domain()[0].text, "1 + y2 != 0");
    }
}
