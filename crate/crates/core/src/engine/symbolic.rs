use crate::expr::{Differentiator, Expr, Point, Var};

use super::tensors::*;

fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
    Expr::add(terms.into_iter().collect())
}

fn prod(factors: impl IntoIterator<Item = Expr>) -> Expr {
    Expr::mul(factors.into_iter().collect())
}

fn half(e: Expr) -> Expr {
    Expr::mul(vec![Expr::ratio(1, 2), e])
}

fn inverse(m: &M2<Expr>) -> (M2<Expr>, Expr) {
    let det = Expr::sub(
        prod([m[0][0].clone(), m[1][1].clone()]),
        prod([m[0][1].clone(), m[1][0].clone()]),
    );
    let inv = Expr::pow(det.clone(), -1);
    let entry = |e: &Expr, neg: bool| {
        let e = prod([e.clone(), inv.clone()]);
        if neg {
            Expr::neg(e)
        } else {
            e
        }
    };
    let g = [
        [entry(&m[1][1], false), entry(&m[0][1], true)],
        [entry(&m[1][0], true), entry(&m[0][0], false)],
    ];
    (g, det)
}

/// Builds closed-form trees for every frame invariant of the web `f`.
pub(crate) struct Builder {
    pub d: Differentiator,
    g_bar: M2<Expr>,
    g_tilde: M2<Expr>,
}

impl Builder {
    /// Derivative along the frame vector dual to ω₁ʲ.
    fn d1(&mut self, e: &Expr, j: usize) -> Expr {
        let terms: Vec<Expr> = (0..2)
            .map(|k| prod([self.d.d(e, Var::X[k]), self.g_bar[k][j].clone()]))
            .collect();
        sum(terms)
    }

    /// Derivative along the frame vector dual to ω₂ʲ.
    fn d2(&mut self, e: &Expr, j: usize) -> Expr {
        let terms: Vec<Expr> = (0..2)
            .map(|k| prod([self.d.d(e, Var::Y[k]), self.g_tilde[k][j].clone()]))
            .collect();
        sum(terms)
    }

    fn covariant(&mut self, m: &M2<Expr>, g: &T3<Expr>) -> (T3<Expr>, T3<Expr>) {
        let mut c1: T3<Expr> = Default::default();
        let mut c2: T3<Expr> = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    let mut t1 = vec![self.d1(&m[i][j], l)];
                    let mut t2 = vec![self.d2(&m[i][j], l)];
                    for k in 0..2 {
                        t1.push(Expr::neg(prod([m[k][j].clone(), g[k][l][i].clone()])));
                        t1.push(Expr::neg(prod([m[i][k].clone(), g[k][l][j].clone()])));
                        t2.push(Expr::neg(prod([m[k][j].clone(), g[k][i][l].clone()])));
                        t2.push(Expr::neg(prod([m[i][k].clone(), g[k][j][l].clone()])));
                    }
                    c1[i][j][l] = sum(t1);
                    c2[i][j][l] = sum(t2);
                }
            }
        }
        (c1, c2)
    }

    pub fn build(f: &[Expr; 2]) -> (FrameInvariants<Expr>, Differentiator) {
        let mut d = Differentiator::new();
        let f_bar: M2<Expr> = std::array::from_fn(|i| std::array::from_fn(|j| d.d(&f[i], Var::X[j])));
        let f_tilde: M2<Expr> = std::array::from_fn(|i| std::array::from_fn(|j| d.d(&f[i], Var::Y[j])));
        let (g_bar, det_bar) = inverse(&f_bar);
        let (g_tilde, det_tilde) = inverse(&f_tilde);
        let mut b = Builder {
            d,
            g_bar: g_bar.clone(),
            g_tilde: g_tilde.clone(),
        };

        // Γⁱⱼₖ = −∂²fⁱ/∂xˡ∂yᵐ ḡˡⱼ g̃ᵐₖ
        let mut gamma: T3<Expr> = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut terms = Vec::new();
                    for l in 0..2 {
                        for m in 0..2 {
                            let fxy = b.d.partial(&f[i], &[Var::X[l], Var::Y[m]]);
                            terms.push(prod([Expr::int(-1), fxy, g_bar[l][j].clone(), g_tilde[m][k].clone()]));
                        }
                    }
                    gamma[i][j][k] = sum(terms);
                }
            }
        }

        let at: T3<Expr> = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| half(Expr::sub(gamma[i][j][k].clone(), gamma[i][k][j].clone())))
            })
        });
        let a = [
            prod([Expr::int(2), at[1][0][1].clone()]),
            prod([Expr::int(-2), at[0][0][1].clone()]),
        ];

        let mut p_ij: M2<Expr> = Default::default();
        let mut q_ij: M2<Expr> = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                let mut tp = vec![b.d1(&a[i], j)];
                let mut tq = vec![b.d2(&a[i], j)];
                for m in 0..2 {
                    tp.push(Expr::neg(prod([a[m].clone(), gamma[m][j][i].clone()])));
                    tq.push(Expr::neg(prod([a[m].clone(), gamma[m][i][j].clone()])));
                }
                p_ij[i][j] = sum(tp);
                q_ij[i][j] = sum(tq);
            }
        }
        let p = half(Expr::sub(p_ij[0][1].clone(), p_ij[1][0].clone()));
        let q = half(Expr::sub(q_ij[0][1].clone(), q_ij[1][0].clone()));

        let mut curv: T4<Expr> = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let mut t = vec![
                            b.d1(&gamma[i][k][l], j),
                            b.d1(&gamma[i][j][l], k),
                            Expr::neg(b.d2(&gamma[i][k][j], l)),
                            Expr::neg(b.d2(&gamma[i][k][l], j)),
                        ];
                        for m in 0..2 {
                            t.push(prod([gamma[m][j][l].clone(), gamma[i][k][m].clone()]));
                            t.push(Expr::neg(prod([gamma[m][k][j].clone(), gamma[i][m][l].clone()])));
                            t.push(prod([Expr::int(2), gamma[m][k][l].clone(), at[i][m][j].clone()]));
                        }
                        curv[i][j][k][l] = half(sum(t));
                    }
                }
            }
        }

        // ωᵢⁱ = tr1ₖ ω₁ᵏ + tr2ₖ ω₂ᵏ
        let tr1: [Expr; 2] = std::array::from_fn(|k| sum((0..2).map(|i| gamma[i][k][i].clone())));
        let tr2: [Expr; 2] = std::array::from_fn(|k| sum((0..2).map(|i| gamma[i][i][k].clone())));
        let mut second = |s: &Expr| -> ([Expr; 2], [Expr; 2]) {
            let o1 = std::array::from_fn(|k| Expr::sub(b.d1(s, k), prod([s.clone(), tr1[k].clone()])));
            let o2 = std::array::from_fn(|k| Expr::sub(b.d2(s, k), prod([s.clone(), tr2[k].clone()])));
            (o1, o2)
        };
        let (p1, p2) = second(&p);
        let (q1, q2) = second(&q);

        let (cp1, cp2) = b.covariant(&p_ij, &gamma);
        let (cq1, cq2) = b.covariant(&q_ij, &gamma);

        let inv = FrameInvariants {
            point: Point::default(),
            jac: JacobianPair {
                f_bar,
                f_tilde,
                g_bar,
                g_tilde,
                det_bar,
                det_tilde,
            },
            gamma: ChernConnection { gamma },
            torsion: TorsionData { a_jk_i: at, a },
            curvature: CurvatureTensor { b: curv },
            pq: PfaffianDerivatives { p_ij, q_ij, p, q },
            pq2: SecondOrderPfaffian { p1, p2, q1, q2 },
            cov_pq: CovariantPQ {
                p1: cp1,
                p2: cp2,
                q1: cq1,
                q2: cq2,
            },
        };
        (inv, b.d)
    }
}
