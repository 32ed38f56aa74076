//! The built-in example webs with their expected tensors and classes.

use std::fmt;
use std::str::FromStr;

use num::{BigRational, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::classify::{sample_evaluated, ClassLabel, ClassifyError, Config, UnknownLabel};
use crate::engine::{Constraint, FrameInvariants, Relation, WebDefinition};
use crate::expr::{EvalError, Expr, Point, Tape, Var};
use crate::webfile::{parse_web_file, WebFileError};

const SOURCES: [(&str, &str); 19] = [
    ("1", include_str!("../corpus/ex01.web")),
    ("2", include_str!("../corpus/ex02.web")),
    ("3", include_str!("../corpus/ex03.web")),
    ("4", include_str!("../corpus/ex04.web")),
    ("5", include_str!("../corpus/ex05.web")),
    ("6", include_str!("../corpus/ex06.web")),
    ("7", include_str!("../corpus/ex07.web")),
    ("8", include_str!("../corpus/ex08.web")),
    ("9", include_str!("../corpus/ex09.web")),
    ("10", include_str!("../corpus/ex10.web")),
    ("11", include_str!("../corpus/ex11.web")),
    ("12", include_str!("../corpus/ex12.web")),
    ("13", include_str!("../corpus/ex13.web")),
    ("14", include_str!("../corpus/ex14.web")),
    ("15", include_str!("../corpus/ex15.web")),
    ("16", include_str!("../corpus/ex16.web")),
    ("17", include_str!("../corpus/ex17.web")),
    ("18", include_str!("../corpus/ex18.web")),
    ("group", include_str!("../corpus/group.web")),
];

/// Summary-table columns in display order.
pub const COLUMNS: [char; 7] = ['A', 'B', 'C', 'D', 'E', 'F', 'G'];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("example {id}: {source}")]
    Parse {
        id: String,
        #[source]
        source: WebFileError,
    },
    #[error("unknown tensor path `{0}`")]
    BadPath(String),
    #[error(transparent)]
    Label(#[from] UnknownLabel),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("closed form for {path} at {point}: {source}")]
    Eval {
        path: TensorPath,
        point: Point,
        #[source]
        source: EvalError,
    },
}

/// One named tensor component, with 1-based indices as displayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TensorPath {
    Gamma(usize, usize, usize),
    A(usize),
    B(usize, usize, usize, usize),
    PIJ(usize, usize),
    QIJ(usize, usize),
    P,
    Q,
    P1(usize),
    P2(usize),
    Q1(usize),
    Q2(usize),
}

impl TensorPath {
    pub fn value<T: Clone>(&self, inv: &FrameInvariants<T>) -> T {
        use TensorPath::*;
        let v = match *self {
            Gamma(i, j, k) => &inv.gamma.gamma[i - 1][j - 1][k - 1],
            A(i) => &inv.torsion.a[i - 1],
            B(i, j, k, l) => &inv.curvature.b[i - 1][j - 1][k - 1][l - 1],
            PIJ(i, j) => &inv.pq.p_ij[i - 1][j - 1],
            QIJ(i, j) => &inv.pq.q_ij[i - 1][j - 1],
            P => &inv.pq.p,
            Q => &inv.pq.q,
            P1(i) => &inv.pq2.p1[i - 1],
            P2(i) => &inv.pq2.p2[i - 1],
            Q1(i) => &inv.pq2.q1[i - 1],
            Q2(i) => &inv.pq2.q2[i - 1],
        };
        v.clone()
    }

    /// Every path, grouped by tensor.
    pub fn all() -> Vec<TensorPath> {
        use TensorPath::*;
        let r = [1, 2];
        let mut v = Vec::new();
        for i in r {
            for j in r {
                for k in r {
                    v.push(Gamma(i, j, k));
                }
            }
        }
        v.extend(r.map(A));
        for i in r {
            for j in r {
                for k in r {
                    for l in r {
                        v.push(B(i, j, k, l));
                    }
                }
            }
        }
        for i in r {
            for j in r {
                v.push(PIJ(i, j));
            }
        }
        for i in r {
            for j in r {
                v.push(QIJ(i, j));
            }
        }
        v.extend([P, Q]);
        v.extend(r.map(P1));
        v.extend(r.map(P2));
        v.extend(r.map(Q1));
        v.extend(r.map(Q2));
        v
    }
}

impl fmt::Display for TensorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TensorPath::*;
        match *self {
            Gamma(i, j, k) => write!(f, "Gamma^{i}_{j}{k}"),
            A(i) => write!(f, "a_{i}"),
            B(i, j, k, l) => write!(f, "b^{i}_{j}{k}{l}"),
            PIJ(i, j) => write!(f, "p_{i}{j}"),
            QIJ(i, j) => write!(f, "q_{i}{j}"),
            P => f.write_str("p"),
            Q => f.write_str("q"),
            P1(i) => write!(f, "p1_{i}"),
            P2(i) => write!(f, "p2_{i}"),
            Q1(i) => write!(f, "q1_{i}"),
            Q2(i) => write!(f, "q2_{i}"),
        }
    }
}

impl FromStr for TensorPath {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TensorPath::all()
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| CorpusError::BadPath(s.to_string()))
    }
}

impl Serialize for TensorPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct ExpectedTensor {
    pub path: TensorPath,
    pub expr: Expr,
    /// The value as written in the source file.
    pub text: String,
    /// Unverified values are reported but never counted as failures.
    pub verified: bool,
    pub erratum: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub web: WebDefinition,
    pub source: String,
    pub expected_tensors: Vec<ExpectedTensor>,
    pub expected_classes: Vec<ClassLabel>,
    /// Columns the expected classes speak for; `None` means all of them.
    pub columns: Option<Vec<char>>,
    /// Labels whose membership the source leaves undecided; never compared.
    pub open: Vec<ClassLabel>,
    pub errata_notes: String,
    /// Level-set functions of a known fourth foliation.
    pub u4: Option<[Expr; 2]>,
}

impl CorpusEntry {
    pub fn compares_column(&self, c: char) -> bool {
        self.columns.as_ref().is_none_or(|cols| cols.contains(&c))
    }

    fn compared(&self, l: ClassLabel) -> bool {
        !self.open.contains(&l) && l.column().map_or(self.columns.is_none(), |c| self.compares_column(c))
    }

    /// Expected labels restricted to the compared columns, plus any
    /// isoclinicity label when every column is compared.
    pub fn expected_row(&self) -> Vec<ClassLabel> {
        self.expected_classes
            .iter()
            .copied()
            .filter(|&l| self.compared(l))
            .collect()
    }

    /// Restricts computed classes to what this entry asserts.
    pub fn comparable(&self, computed: &[ClassLabel]) -> Vec<ClassLabel> {
        let mut v: Vec<ClassLabel> = computed.iter().copied().filter(|&l| self.compared(l)).collect();
        v.sort();
        v
    }

    pub fn classes_match(&self, computed: &[ClassLabel]) -> bool {
        let mut want = self.expected_row();
        want.sort();
        self.comparable(computed) == want
    }
}

pub fn ids() -> Vec<&'static str> {
    SOURCES.iter().map(|(id, _)| *id).collect()
}

fn canonical_id(id: &str) -> Option<&'static str> {
    let id = id.trim();
    let id = id.strip_prefix("example-").unwrap_or(id);
    if let Ok(n) = id.parse::<usize>() {
        return SOURCES.get(n.checked_sub(1)?).filter(|_| n <= 18).map(|(i, _)| *i);
    }
    SOURCES.iter().find(|(i, _)| *i == id).map(|(i, _)| *i)
}

pub fn source(id: &str) -> Result<&'static str, CorpusError> {
    let id = canonical_id(id).ok_or_else(|| CorpusError::UnknownExample(id.to_string()))?;
    Ok(SOURCES
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, s)| *s)
        .unwrap_or_default())
}

pub fn load_example(id: &str) -> Result<CorpusEntry, CorpusError> {
    let canon = canonical_id(id).ok_or_else(|| CorpusError::UnknownExample(id.to_string()))?;
    entry_from_source(canon, source(canon)?)
}

pub fn load_all() -> Result<Vec<CorpusEntry>, CorpusError> {
    ids().into_iter().map(load_example).collect()
}

/// Builds an entry from corpus-format text.
pub fn entry_from_source(id: &str, text: &str) -> Result<CorpusEntry, CorpusError> {
    let perr = |source| CorpusError::Parse {
        id: id.to_string(),
        source,
    };
    let file = parse_web_file(text).map_err(perr)?;
    let mut tensors = Vec::new();
    let mut errata = Vec::new();
    for e in &file.extra {
        if let Some(path) = e.key.strip_prefix("erratum.") {
            errata.push((path.parse::<TensorPath>()?, e.value.clone()));
        }
    }
    for e in &file.extra {
        let Some(path) = e.key.strip_prefix("expect.") else {
            continue;
        };
        let path: TensorPath = path.parse()?;
        let erratum = errata.iter().find(|(p, _)| *p == path).map(|(_, n)| n.clone());
        tensors.push(ExpectedTensor {
            path,
            expr: file.expr(e).map_err(perr)?,
            text: e.value.clone(),
            verified: erratum.is_none(),
            erratum,
        });
    }
    let labels = |key: &str| -> Result<Vec<ClassLabel>, CorpusError> {
        match file.get(key) {
            Some(e) => Ok(e.value.split_whitespace().map(str::parse).collect::<Result<_, _>>()?),
            None => Ok(Vec::new()),
        }
    };
    let expected_classes = labels("classes")?;
    let open = labels("open")?;
    let columns = file
        .get("columns")
        .map(|e| e.value.chars().filter(|c| COLUMNS.contains(c)).collect());
    let u4 = match (file.get("u4_1"), file.get("u4_2")) {
        (Some(a), Some(b)) => Some([file.expr(a).map_err(perr)?, file.expr(b).map_err(perr)?]),
        _ => None,
    };
    let mut notes: Vec<String> = file
        .web
        .notes()
        .lines()
        .filter(|l| l.starts_with("erratum"))
        .map(str::to_string)
        .collect();
    notes.extend(errata.iter().map(|(p, n)| format!("{p}: {n}")));
    Ok(CorpusEntry {
        id: id.to_string(),
        web: file.web,
        source: text.to_string(),
        expected_tensors: tensors,
        expected_classes,
        columns,
        open,
        errata_notes: notes.join("\n"),
        u4,
    })
}

/// Coefficients cⁱⱼₖ of a polynomial web, stored as `c[i][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialWebParams {
    pub c: [[[BigRational; 2]; 2]; 2],
}

impl PolynomialWebParams {
    pub fn zero() -> Self {
        PolynomialWebParams { c: Default::default() }
    }

    /// Sets cⁱⱼₖ with 1-based indices.
    pub fn with(mut self, i: usize, j: usize, k: usize, v: BigRational) -> Self {
        self.c[i - 1][j - 1][k - 1] = v;
        self
    }

    fn get(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.c[i - 1][j - 1][k - 1]
    }

    /// The combination whose nonvanishing forces p = q ≠ 0.
    pub fn nonisoclinic_criterion(&self) -> BigRational {
        let c = |i, j, k| self.get(i, j, k).clone();
        (c(2, 2, 2) + c(1, 1, 2)) * (c(2, 1, 2) - c(2, 2, 1)) + (c(1, 1, 1) + c(2, 2, 1)) * (c(1, 1, 2) - c(1, 2, 1))
    }

    fn is_zero(&self) -> bool {
        self.c.iter().flatten().flatten().all(Zero::is_zero)
    }

    fn label(&self) -> String {
        let mut parts = Vec::new();
        for i in 1..=2 {
            for j in 1..=2 {
                for k in 1..=2 {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        parts.push(format!("c^{i}_{j}{k}={v}"));
                    }
                }
            }
        }
        format!("poly({})", parts.join(", "))
    }
}

/// The web uⁱ = xⁱ + yⁱ + cⁱⱼₖxʲyᵏ with both Jacobian determinants as
/// domain constraints.
pub fn instantiate_polynomial(params: &PolynomialWebParams) -> CorpusEntry {
    let x = [Expr::var(Var::X1), Expr::var(Var::X2)];
    let y = [Expr::var(Var::Y1), Expr::var(Var::Y2)];
    let c = |i: usize, j: usize, k: usize| Expr::constant(params.get(i, j, k).clone());
    let f: Vec<Expr> = (1..=2)
        .map(|i| {
            let mut terms = vec![x[i - 1].clone(), y[i - 1].clone()];
            for j in 1..=2 {
                for k in 1..=2 {
                    terms.push(Expr::mul(vec![c(i, j, k), x[j - 1].clone(), y[k - 1].clone()]));
                }
            }
            Expr::add(terms)
        })
        .collect();
    // ∂fⁱ/∂xʲ = δⁱⱼ + cⁱⱼₖyᵏ and ∂fⁱ/∂yᵏ = δⁱₖ + cⁱⱼₖxʲ
    let delta = |i: usize, j: usize| if i == j { Expr::one() } else { Expr::zero() };
    let jx = |i: usize, j: usize| Expr::add(vec![delta(i, j), c(i, j, 1) * y[0].clone(), c(i, j, 2) * y[1].clone()]);
    let jy = |i: usize, k: usize| Expr::add(vec![delta(i, k), c(i, 1, k) * x[0].clone(), c(i, 2, k) * x[1].clone()]);
    let det = |m: &dyn Fn(usize, usize) -> Expr| (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)).simplify();
    let domain = [det(&jx), det(&jy)]
        .into_iter()
        .filter(|d| d.as_const().is_none())
        .map(|d| Constraint {
            text: format!("{d} != 0"),
            expr: d,
            relation: Relation::NonZero,
        })
        .collect();
    let name = params.label();
    let web = WebDefinition::new(name.clone(), f[0].clone(), f[1].clone(), domain, "");
    let criterion = params.nonisoclinic_criterion();
    let (expected_classes, columns) = if params.is_zero() {
        (
            vec![
                ClassLabel::D,
                ClassLabel::D1,
                ClassLabel::D11,
                ClassLabel::D12,
                ClassLabel::ISOCLINICLY_GEODESIC,
            ],
            None,
        )
    } else if !criterion.is_zero() {
        (vec![ClassLabel::G3], Some(vec!['G']))
    } else {
        (Vec::new(), Some(Vec::new()))
    };
    let source = crate::webfile::render_web(&web);
    CorpusEntry {
        id: name,
        web,
        source,
        expected_tensors: Vec::new(),
        expected_classes,
        columns,
        open: Vec::new(),
        errata_notes: String::new(),
        u4: None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorDeviation {
    pub path: TensorPath,
    pub verified: bool,
    /// max |expected − engine| / max(|engine|, 1) over the samples.
    pub max_deviation: f64,
    pub worst_point: Point,
}

/// Pass threshold for [`run_regression`] deviations.
pub const REGRESSION_TOL: f64 = 1e-7;

pub fn run_regression(entry: &CorpusEntry, samples: usize) -> Result<Vec<TensorDeviation>, CorpusError> {
    run_regression_with(
        entry,
        &Config {
            samples,
            ..Config::default()
        },
    )
}

/// Compares every expected tensor with the engine at the configured samples.
pub fn run_regression_with(entry: &CorpusEntry, config: &Config) -> Result<Vec<TensorDeviation>, CorpusError> {
    config.validate()?;
    let (set, evals) = sample_evaluated(&entry.web, config.samples, config.seed, config.box_halfwidth)?;
    let exprs: Vec<Expr> = entry.expected_tensors.iter().map(|t| t.expr.clone()).collect();
    let tape = Tape::compile(&exprs);
    let mut out: Vec<TensorDeviation> = entry
        .expected_tensors
        .iter()
        .map(|t| TensorDeviation {
            path: t.path,
            verified: t.verified,
            max_deviation: 0.0,
            worst_point: set.points[0],
        })
        .collect();
    for (pt, ev) in set.points.iter().zip(&evals) {
        let got = ev.inv.values();
        let want = tape.eval(pt);
        for (n, t) in entry.expected_tensors.iter().enumerate() {
            let e = match &want {
                Ok(v) => v[n],
                // the whole tape failed; find the offending entry for the message
                Err(_) => t.expr.eval(pt).map_err(|source| CorpusError::Eval {
                    path: t.path,
                    point: *pt,
                    source,
                })?,
            };
            let g = t.path.value(&got);
            let dev = (e - g).abs() / g.abs().max(1.0);
            if dev > out[n].max_deviation || dev.is_nan() {
                out[n].max_deviation = dev;
                out[n].worst_point = *pt;
            }
        }
    }
    Ok(out)
}

/// A summary-table row such as `16: A31 — C — E3 — G4`.
pub fn table_row(id: &str, classes: &[ClassLabel]) -> String {
    let mut cells: Vec<String> = COLUMNS
        .iter()
        .filter_map(|&c| {
            let ls: Vec<&str> = classes
                .iter()
                .filter(|l| l.column() == Some(c))
                .map(|l| l.as_str())
                .collect();
            (!ls.is_empty()).then(|| ls.join("∩"))
        })
        .collect();
    cells.extend(classes.iter().filter(|l| l.column().is_none()).map(|l| l.to_string()));
    if cells.is_empty() {
        cells.push("?".into());
    }
    format!("{id}: {}", cells.join(" — "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    #[test]
    fn every_entry_loads() {
        let all = load_all().unwrap();
        assert_eq!(all.len(), 19);
        for e in &all {
            assert!(!e.expected_classes.is_empty(), "{}", e.id);
        }
    }

    #[test]
    fn ids_resolve() {
        assert_eq!(load_example("01").unwrap().id, "1");
        assert_eq!(load_example("example-16").unwrap().id, "16");
        assert!(matches!(load_example("19"), Err(CorpusError::UnknownExample(_))));
        assert!(matches!(load_example("0"), Err(CorpusError::UnknownExample(_))));
    }

    #[test]
    fn paths_round_trip() {
        for p in TensorPath::all() {
            assert_eq!(p.to_string().parse::<TensorPath>().unwrap(), p);
        }
        assert!("b^3_111".parse::<TensorPath>().is_err());
    }

    #[test]
    fn table_rows() {
        use ClassLabel::*;
        assert_eq!(table_row("16", &[A31, C, E3, G4]), "16: A31 — C — E3 — G4");
        assert_eq!(table_row("2", &[A21, A22, C, E22, G1]), "2: A21∩A22 — C — E22 — G1");
    }

    #[test]
    fn polynomial_criterion() {
        let c = PolynomialWebParams::zero()
            .with(2, 2, 2, rat(1, 1))
            .with(2, 1, 2, rat(1, 1));
        assert_eq!(c.nonisoclinic_criterion(), rat(1, 1));
        assert_eq!(instantiate_polynomial(&c).expected_classes, vec![ClassLabel::G3]);
        let ten = PolynomialWebParams::zero()
            .with(1, 1, 2, rat(1, 1))
            .with(2, 2, 1, rat(1, 1));
        assert_eq!(ten.nonisoclinic_criterion(), rat(0, 1));
        let group = instantiate_polynomial(&PolynomialWebParams::zero());
        assert!(group.web.domain().is_empty());
        assert!(group.expected_classes.contains(&ClassLabel::D12));
    }
}
