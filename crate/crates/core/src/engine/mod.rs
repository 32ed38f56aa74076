mod forms;
mod identities;
mod symbolic;
mod tensors;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_with, Differentiator, EvalError, Expr, ParseError, Point, Tape, Tracked, Var};

pub use forms::{
    abelian_equation_residual, third_differential_residuals, structure_equation_residuals, fourth_foliation_covectors, wedge, StructureData,
    EPS_ISOCLINIC, WEDGE_PAIRS,
};
pub use identities::*;
pub use tensors::*;

/// Determinants below this magnitude mark a point as singular for the web.
pub const EPS_DET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("singular Jacobian at {point}: |det {which}| = {det:e}")]
    SingularJacobian {
        which: &'static str,
        det: f64,
        point: Point,
    },
    #[error("point {point} violates domain constraint `{constraint}`")]
    DomainViolation { constraint: String, point: Point },
    #[error("evaluation failed at {point}: {source}")]
    Eval { source: EvalError, point: Point },
    #[error("p and q both vanish at {point}")]
    IsoclinicAtPoint { point: Point },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    NonZero,
    Positive,
    Negative,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub expr: Expr,
    pub relation: Relation,
    pub text: String,
}

impl Constraint {
    /// Parses `<expr> != 0`, `<expr> > 0` or `<expr> < 0`.
    pub fn parse(text: &str, env: &std::collections::HashMap<String, Expr>) -> Result<Constraint, ConstraintError> {
        let t = text.trim();
        let (lhs, relation, op) = if let Some(i) = t.find("!=") {
            (&t[..i], Relation::NonZero, &t[i + 2..])
        } else if let Some(i) = t.find('>') {
            (&t[..i], Relation::Positive, &t[i + 1..])
        } else if let Some(i) = t.find('<') {
            (&t[..i], Relation::Negative, &t[i + 1..])
        } else {
            return Err(ConstraintError::MissingRelation(t.to_string()));
        };
        if op.trim() != "0" {
            return Err(ConstraintError::RightHandSide(t.to_string()));
        }
        let expr = parse_with(lhs, env).map_err(ConstraintError::Expr)?;
        Ok(Constraint {
            expr,
            relation,
            text: t.to_string(),
        })
    }

    /// Signed distance from violation; positive when satisfied.
    pub fn margin(&self, value: f64) -> f64 {
        match self.relation {
            Relation::NonZero => value.abs(),
            Relation::Positive => value,
            Relation::Negative => -value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("constraint `{0}` needs one of `!= 0`, `> 0`, `< 0`")]
    MissingRelation(String),
    #[error("constraint `{0}` must compare against 0")]
    RightHandSide(String),
    #[error(transparent)]
    Expr(ParseError),
}

/// A web given by u₃ⁱ = fⁱ(x, y) with its admissible domain.
#[derive(Clone)]
pub struct WebDefinition {
    name: String,
    f: [Expr; 2],
    domain: Vec<Constraint>,
    notes: String,
    compiled: Arc<OnceLock<CompiledWeb>>,
}

impl fmt::Debug for WebDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WebDefinition")
            .field("name", &self.name)
            .field("f1", &self.f[0].to_string())
            .field("f2", &self.f[1].to_string())
            .field(
                "domain",
                &self.domain.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl WebDefinition {
    pub fn new(name: impl Into<String>, f1: Expr, f2: Expr, domain: Vec<Constraint>, notes: impl Into<String>) -> Self {
        WebDefinition {
            name: name.into(),
            f: [f1, f2],
            domain,
            notes: notes.into(),
            compiled: Arc::new(OnceLock::new()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self) -> &[Expr; 2] {
        &self.f
    }

    pub fn domain(&self) -> &[Constraint] {
        &self.domain
    }

    pub fn notes(&self) -> &str {
        &self.notes
    }

    /// Symbolic invariants and evaluation tapes, built on first use.
    pub fn compiled(&self) -> &CompiledWeb {
        self.compiled.get_or_init(|| CompiledWeb::new(&self.f, &self.domain))
    }

    /// Smallest constraint margin at `pt`; an evaluation failure counts as a
    /// violation of that constraint.
    pub fn domain_margin(&self, pt: &Point) -> Result<f64, String> {
        self.compiled().domain_margin(&self.domain, pt)
    }

    pub fn check_domain(&self, pt: &Point) -> Result<(), EngineError> {
        let c = self.compiled();
        match c.domain_tape.eval(pt) {
            Ok(vals) => {
                for (con, v) in self.domain.iter().zip(vals) {
                    if con.margin(v) <= crate::expr::EPS_DIV {
                        return Err(EngineError::DomainViolation {
                            constraint: con.text.clone(),
                            point: *pt,
                        });
                    }
                }
                Ok(())
            }
            Err(_) => {
                let culprit = self.domain.iter().find(|con| con.expr.eval(pt).is_err());
                Err(EngineError::DomainViolation {
                    constraint: culprit.map(|c| c.text.clone()).unwrap_or_default(),
                    point: *pt,
                })
            }
        }
    }
}

/// Tapes for one web: the Jacobians alone (cheap singularity screen), every
/// frame invariant, the coordinate-form checks, and the domain constraints.
#[derive(Debug)]
pub struct CompiledWeb {
    symbolic: FrameInvariants<Expr>,
    jac_tape: Tape,
    tape: Tape,
    structure_tape: Tape,
    domain_tape: Tape,
}

fn eval_err(point: Point) -> impl Fn(EvalError) -> EngineError {
    move |source| EngineError::Eval { source, point }
}

impl CompiledWeb {
    fn new(f: &[Expr; 2], domain: &[Constraint]) -> CompiledWeb {
        let fs = [f[0].simplify(), f[1].simplify()];
        let (symbolic, _) = symbolic::Builder::build(&fs);
        let mut jac = Vec::new();
        for m in [&symbolic.jac.f_bar, &symbolic.jac.f_tilde] {
            jac.extend(m.iter().flatten().cloned());
        }
        let jac_tape = Tape::compile(&jac);
        let tape = Tape::compile(&symbolic.components());

        // separate derivatives of the unsimplified input
        let mut d = Differentiator::new();
        let mut structure = Vec::new();
        for fi in f {
            for v in Var::ALL {
                structure.push(d.d(fi, v));
            }
        }
        for fi in f {
            for j in 0..2 {
                let fij = d.d(fi, Var::X[j]);
                for v in Var::ALL {
                    structure.push(d.d(&fij, v));
                }
            }
        }
        let structure_tape = Tape::compile(&structure);
        let domain_exprs: Vec<Expr> = domain.iter().map(|c| c.expr.clone()).collect();
        let domain_tape = Tape::compile(&domain_exprs);
        CompiledWeb {
            symbolic,
            jac_tape,
            tape,
            structure_tape,
            domain_tape,
        }
    }

    /// Closed-form trees of every component.
    pub fn symbolic(&self) -> &FrameInvariants<Expr> {
        &self.symbolic
    }

    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }

    fn domain_margin(&self, domain: &[Constraint], pt: &Point) -> Result<f64, String> {
        match self.domain_tape.eval(pt) {
            Ok(vals) => Ok(domain
                .iter()
                .zip(vals)
                .map(|(c, v)| c.margin(v))
                .fold(f64::INFINITY, f64::min)),
            Err(e) => Err(e.to_string()),
        }
    }

    fn screen(&self, pt: &Point) -> Result<(), EngineError> {
        let j = self.jac_tape.eval(pt).map_err(eval_err(*pt))?;
        let det_bar = j[0] * j[3] - j[1] * j[2];
        let det_tilde = j[4] * j[7] - j[5] * j[6];
        for (which, det) in [("f_bar", det_bar), ("f_tilde", det_tilde)] {
            if det.abs() < EPS_DET {
                return Err(EngineError::SingularJacobian { which, det, point: *pt });
            }
        }
        Ok(())
    }

    /// Jacobians only, at points where they are nonsingular.
    pub fn jacobians(&self, pt: &Point) -> Result<JacobianPair, EngineError> {
        self.screen(pt)?;
        let j = self.jac_tape.eval(pt).map_err(eval_err(*pt))?;
        let f_bar = [[j[0], j[1]], [j[2], j[3]]];
        let f_tilde = [[j[4], j[5]], [j[6], j[7]]];
        let inv = |m: [[f64; 2]; 2]| {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            ([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]], det)
        };
        let (g_bar, det_bar) = inv(f_bar);
        let (g_tilde, det_tilde) = inv(f_tilde);
        Ok(JacobianPair {
            f_bar,
            f_tilde,
            g_bar,
            g_tilde,
            det_bar,
            det_tilde,
        })
    }

    pub fn eval(&self, pt: &Point) -> Result<FrameInvariants, EngineError> {
        self.screen(pt)?;
        let vals = self.tape.eval(pt).map_err(eval_err(*pt))?;
        Ok(self.symbolic.relayout(&vals, *pt))
    }

    /// Evaluation with magnitude tracking, for residual normalization.
    pub fn eval_tracked(&self, pt: &Point) -> Result<FrameInvariants<Tracked>, EngineError> {
        self.screen(pt)?;
        let vals = self.tape.eval_tracked(pt).map_err(eval_err(*pt))?;
        Ok(self.symbolic.relayout(&vals, *pt))
    }

    pub fn structure(&self, pt: &Point) -> Result<StructureData<Tracked>, EngineError> {
        let v = self.structure_tape.eval_tracked(pt).map_err(eval_err(*pt))?;
        let grad = std::array::from_fn(|i| std::array::from_fn(|c| v[4 * i + c]));
        let dfbar = std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|c| v[8 + 8 * i + 4 * j + c])));
        Ok(StructureData { grad, dfbar })
    }
}

pub fn compute_jacobians(web: &WebDefinition, pt: &Point) -> Result<JacobianPair, EngineError> {
    web.check_domain(pt)?;
    web.compiled().jacobians(pt)
}

pub fn frame_invariants(web: &WebDefinition, pt: &Point) -> Result<FrameInvariants, EngineError> {
    web.check_domain(pt)?;
    web.compiled().eval(pt)
}

pub fn chern_connection(web: &WebDefinition, pt: &Point) -> Result<ChernConnection, EngineError> {
    Ok(frame_invariants(web, pt)?.gamma)
}

/// Antisymmetrized connection and the covector (a₁, a₂).
pub fn torsion<T: Scalar>(gamma: &ChernConnection<T>) -> TorsionData<T> {
    let g = &gamma.gamma;
    let a_jk_i: T3<T> =
        std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| (g[i][j][k] - g[i][k][j]).half())));
    let a = [a_jk_i[1][0][1] * T::constant(2.0), a_jk_i[0][0][1] * T::constant(-2.0)];
    TorsionData { a_jk_i, a }
}

pub fn curvature(web: &WebDefinition, pt: &Point) -> Result<CurvatureTensor, EngineError> {
    Ok(frame_invariants(web, pt)?.curvature)
}

pub fn pfaffian_derivatives(web: &WebDefinition, pt: &Point) -> Result<PfaffianDerivatives, EngineError> {
    Ok(frame_invariants(web, pt)?.pq)
}

pub fn second_order_pfaffian(web: &WebDefinition, pt: &Point) -> Result<SecondOrderPfaffian, EngineError> {
    Ok(frame_invariants(web, pt)?.pq2)
}

pub fn covariant_pq(web: &WebDefinition, pt: &Point) -> Result<CovariantPQ, EngineError> {
    Ok(frame_invariants(web, pt)?.cov_pq)
}
