//! Forms as coefficient arrays over (dx¹, dx², dy¹, dy²) and the six
//! basis 2-forms dx¹∧dx², dx¹∧dy¹, dx¹∧dy², dx²∧dy¹, dx²∧dy², dy¹∧dy².

use crate::expr::{Differentiator, Expr, Point, Tape, Tracked, Var};

use super::tensors::{FrameInvariants, Scalar};
use super::EngineError;

pub const WEDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn wedge<T: Scalar>(a: &[T; 4], b: &[T; 4]) -> [T; 6] {
    WEDGE_PAIRS.map(|(r, s)| a[r] * b[s] - a[s] * b[r])
}

fn pair_index(r: usize, s: usize) -> usize {
    WEDGE_PAIRS.iter().position(|&p| p == (r, s)).expect("ordered pair")
}

/// Coordinate derivatives of f used by the structure-equation checks:
/// `grad[i][c]` = ∂fⁱ/∂c and `dfbar[i][j][c]` = ∂f̄ⁱⱼ/∂c.
#[derive(Debug, Clone, Copy)]
pub struct StructureData<T> {
    pub grad: [[T; 4]; 2],
    pub dfbar: [[[T; 4]; 2]; 2],
}

/// du₃ⁱ against ω₁ⁱ + ω₂ⁱ, componentwise over the coordinate cobasis.
pub fn third_differential_residuals(inv: &FrameInvariants<Tracked>, s: &StructureData<Tracked>) -> Vec<Tracked> {
    let mut out = Vec::with_capacity(8);
    for i in 0..2 {
        let w = [
            inv.jac.f_bar[i][0],
            inv.jac.f_bar[i][1],
            inv.jac.f_tilde[i][0],
            inv.jac.f_tilde[i][1],
        ];
        for c in 0..4 {
            out.push(s.grad[i][c] - w[c]);
        }
    }
    out
}

/// dω₁ⁱ against Γⁱⱼₖ ω₁ʲ∧ω₂ᵏ, componentwise over the 2-form basis.
pub fn structure_equation_residuals(inv: &FrameInvariants<Tracked>, s: &StructureData<Tracked>) -> Vec<Tracked> {
    let z = Tracked::zero();
    let mut out = Vec::with_capacity(12);
    for i in 0..2 {
        let mut lhs = [z; 6];
        for j in 0..2 {
            for c in 0..4 {
                if c == j {
                    continue;
                }
                let t = s.dfbar[i][j][c];
                if c < j {
                    lhs[pair_index(c, j)] = lhs[pair_index(c, j)] + t;
                } else {
                    lhs[pair_index(j, c)] = lhs[pair_index(j, c)] - t;
                }
            }
        }
        let mut rhs = [z; 6];
        for j in 0..2 {
            let w1 = [inv.jac.f_bar[j][0], inv.jac.f_bar[j][1], z, z];
            for k in 0..2 {
                let w2 = [z, z, inv.jac.f_tilde[k][0], inv.jac.f_tilde[k][1]];
                let w = wedge(&w1, &w2);
                for (r, wr) in rhs.iter_mut().zip(w) {
                    *r = *r + inv.gamma.gamma[i][j][k] * wr;
                }
            }
        }
        out.extend(lhs.iter().zip(rhs).map(|(l, r)| *l - r));
    }
    out
}

/// Threshold below which p and q count as zero at a single point.
pub const EPS_ISOCLINIC: f64 = 1e-12;

/// The forms p·ω₁ⁱ + q·ω₂ⁱ (i = 1, 2) in the coordinate cobasis. Their
/// common kernel is tangent to the leaves of the fourth foliation.
pub fn fourth_foliation_covectors(inv: &FrameInvariants) -> Result<[[f64; 4]; 2], EngineError> {
    let (p, q) = (inv.pq.p, inv.pq.q);
    if p.abs() < EPS_ISOCLINIC && q.abs() < EPS_ISOCLINIC {
        return Err(EngineError::IsoclinicAtPoint { point: inv.point });
    }
    let fb = &inv.jac.f_bar;
    let ft = &inv.jac.f_tilde;
    Ok(std::array::from_fn(|i| {
        [p * fb[i][0], p * fb[i][1], q * ft[i][0], q * ft[i][1]]
    }))
}

fn differentials(u: &[Expr; 2], pt: &Point) -> Result<[[f64; 4]; 2], EngineError> {
    let mut d = Differentiator::new();
    let exprs: Vec<Expr> = u.iter().flat_map(|ui| Var::ALL.map(|v| d.d(ui, v))).collect();
    let vals = Tape::compile(&exprs)
        .eval(pt)
        .map_err(|source| EngineError::Eval { source, point: *pt })?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|c| vals[4 * i + c])))
}

/// Max-norm of 2dx¹∧dx² + 2dy¹∧dy² − du₃¹∧du₃² + du₄¹∧du₄².
pub fn abelian_equation_residual(u3: &[Expr; 2], u4: &[Expr; 2], pt: &Point) -> Result<f64, EngineError> {
    let d3 = differentials(u3, pt)?;
    let d4 = differentials(u4, pt)?;
    let w3 = wedge(&d3[0], &d3[1]);
    let w4 = wedge(&d4[0], &d4[1]);
    let mut form = [0.0; 6];
    form[0] += 2.0;
    form[5] += 2.0;
    for k in 0..6 {
        form[k] += w4[k] - w3[k];
    }
    Ok(form.iter().fold(0.0f64, |m, c| m.max(c.abs())))
}
