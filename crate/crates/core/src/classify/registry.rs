use std::sync::OnceLock;

use crate::engine::{self, sym3};
use crate::expr::Tracked;

use super::sampling::SampleEval;

type Residual = Box<dyn Fn(&SampleEval) -> Vec<Tracked> + Send + Sync>;

/// A tensor identity: holds on the web iff every residual component
/// vanishes identically.
pub struct Identity {
    pub id: String,
    pub statement: String,
    residual: Residual,
}

impl Identity {
    pub fn residuals(&self, s: &SampleEval) -> Vec<Tracked> {
        (self.residual)(s)
    }

    /// Largest normalized component at one sample.
    pub fn normalized(&self, s: &SampleEval) -> f64 {
        self.residuals(s).iter().map(|t| t.normalized()).fold(0.0, f64::max)
    }
}

fn a(s: &SampleEval) -> [Tracked; 2] {
    s.inv.torsion.a
}

fn p(s: &SampleEval) -> [[Tracked; 2]; 2] {
    s.inv.pq.p_ij
}

fn q(s: &SampleEval) -> [[Tracked; 2]; 2] {
    s.inv.pq.q_ij
}

fn k(c: f64) -> Tracked {
    Tracked::exact(c)
}

// a₂²m₁₁ − a₁a₂(m₁₂ + m₂₁) + a₁²m₂₂
fn integrability(a: [Tracked; 2], m: [[Tracked; 2]; 2]) -> Tracked {
    a[1] * a[1] * m[0][0] - a[0] * a[1] * (m[0][1] + m[1][0]) + a[0] * a[0] * m[1][1]
}

// −bⁱ₁₁₁a₂³ + 3bⁱ₍₁₁₂₎a₂²a₁ − 3bⁱ₍₁₂₂₎a₂a₁² + bⁱ₂₂₂a₁³
fn hexagonality(s: &SampleEval, a1: Tracked, a2: Tracked) -> Vec<Tracked> {
    let b = &s.inv.curvature.b;
    (0..2)
        .map(|i| {
            -(b[i][0][0][0] * a2 * a2 * a2) + (sym3(b, i, 0, 0, 1) * a2 * a2 * a1).scale(3.0)
                - (sym3(b, i, 0, 1, 1) * a2 * a1 * a1).scale(3.0)
                + b[i][1][1][1] * a1 * a1 * a1
        })
        .collect()
}

fn build() -> Vec<Identity> {
    let mut r: Vec<Identity> = Vec::new();
    let mut add = |id: &str, statement: &str, f: Residual| {
        r.push(Identity {
            id: id.to_string(),
            statement: statement.to_string(),
            residual: f,
        });
    };

    add(
        "(8)",
        "a₂²m₁₁ − a₁a₂(m₁₂ + m₂₁) + a₁²m₂₂ = 0 for m = p, q",
        Box::new(|s| vec![integrability(a(s), p(s)), integrability(a(s), q(s))]),
    );
    add(
        "(8)-p-part",
        "a₂²p₁₁ − a₁a₂(p₁₂ + p₂₁) + a₁²p₂₂ = 0",
        Box::new(|s| vec![integrability(a(s), p(s))]),
    );
    add(
        "(8)-q-part",
        "a₂²q₁₁ − a₁a₂(q₁₂ + q₂₁) + a₁²q₂₂ = 0",
        Box::new(|s| vec![integrability(a(s), q(s))]),
    );
    add("(13)", "p₂₂ = q₂₂ = 0", Box::new(|s| vec![p(s)[1][1], q(s)[1][1]]));
    add("(14)", "p₁₁ = q₁₁ = 0", Box::new(|s| vec![p(s)[0][0], q(s)[0][0]]));
    add(
        "(15)",
        "p₁₁ − p₁₂ − p₂₁ + p₂₂ = 0, same for q",
        Box::new(|s| {
            let f = |m: [[Tracked; 2]; 2]| m[0][0] - m[0][1] - m[1][0] + m[1][1];
            vec![f(p(s)), f(q(s))]
        }),
    );
    add(
        "(16)",
        "p₁₁ + p₁₂ + p₂₁ + p₂₂ = 0, same for q",
        Box::new(|s| {
            let f = |m: [[Tracked; 2]; 2]| m[0][0] + m[0][1] + m[1][0] + m[1][1];
            vec![f(p(s)), f(q(s))]
        }),
    );
    add(
        "(17)",
        "a₂p₁₂ − a₁p₂₂ = a₁p₂₁ − a₂p₁₁ = 0, same for q",
        Box::new(|s| {
            let a = a(s);
            let f = |m: [[Tracked; 2]; 2]| [a[1] * m[0][1] - a[0] * m[1][1], a[0] * m[1][0] - a[1] * m[0][0]];
            [f(p(s)), f(q(s))].concat()
        }),
    );
    add(
        "(20)",
        "p₂ᵢ = q₂ᵢ = 0",
        Box::new(|s| vec![p(s)[1][0], p(s)[1][1], q(s)[1][0], q(s)[1][1]]),
    );
    add(
        "(21)",
        "p₁ᵢ = q₁ᵢ = 0",
        Box::new(|s| vec![p(s)[0][0], p(s)[0][1], q(s)[0][0], q(s)[0][1]]),
    );
    add(
        "(22)",
        "p₁ᵢ = p₂ᵢ, q₁ᵢ = q₂ᵢ",
        Box::new(|s| {
            let (p, q) = (p(s), q(s));
            vec![
                p[0][0] - p[1][0],
                p[0][1] - p[1][1],
                q[0][0] - q[1][0],
                q[0][1] - q[1][1],
            ]
        }),
    );
    add(
        "(23)",
        "p₁ᵢ = −p₂ᵢ, q₁ᵢ = −q₂ᵢ",
        Box::new(|s| {
            let (p, q) = (p(s), q(s));
            vec![
                p[0][0] + p[1][0],
                p[0][1] + p[1][1],
                q[0][0] + q[1][0],
                q[0][1] + q[1][1],
            ]
        }),
    );
    add(
        "(24)",
        "hexagonality of the W(3,2,1) cut by the a-distribution",
        Box::new(|s| hexagonality(s, a(s)[0], a(s)[1])),
    );
    add(
        "(25)",
        "b¹₂₂₂ = b²₂₂₂ = 0",
        Box::new(|s| vec![s.inv.curvature.b[0][1][1][1], s.inv.curvature.b[1][1][1][1]]),
    );
    add(
        "(26)",
        "b¹₁₁₁ = b²₁₁₁ = 0",
        Box::new(|s| vec![s.inv.curvature.b[0][0][0][0], s.inv.curvature.b[1][0][0][0]]),
    );
    add(
        "(27)",
        "(24) with a₁ = a₂ = 1",
        Box::new(|s| hexagonality(s, k(1.0), k(1.0))),
    );
    add(
        "(28)",
        "(24) with a₁ = 1, a₂ = −1",
        Box::new(|s| hexagonality(s, k(1.0), k(-1.0))),
    );
    add(
        "(29)",
        "−du₃ⁱ has the coordinate coefficients of ω₁ⁱ + ω₂ⁱ",
        Box::new(|s| engine::third_differential_residuals(&s.inv, &s.structure)),
    );
    add("(33)a", "bⁱ[ⱼ|ₗ|ₖ] = δⁱ[ₖpⱼ]ₗ", Box::new(|s| engine::curvature_p_relation(&s.inv)));
    add("(33)b", "bⁱ[ⱼₖ]ₗ = δⁱ[ₖqⱼ]ₗ", Box::new(|s| engine::curvature_q_relation(&s.inv)));
    add("(35)a", "p⁽¹⁾ᵢ[ⱼₖ] + pᵢ[ⱼaₖ] = 0", Box::new(|s| engine::covariant_p1_relation(&s.inv)));
    add("(35)b", "q⁽²⁾ᵢ[ⱼₖ] − qᵢ[ⱼaₖ] = 0", Box::new(|s| engine::covariant_q2_relation(&s.inv)));
    add(
        "(35)c",
        "p⁽²⁾ᵢⱼₖ − q⁽²⁾ᵢⱼₖ + aₘbᵐᵢⱼₖ = 0",
        Box::new(|s| engine::mixed_covariant_q2_form(&s.inv)),
    );
    add(
        "(35)c-corrected",
        "p⁽²⁾ᵢⱼₖ − q⁽¹⁾ᵢₖⱼ − aₘbᵐᵢⱼₖ = 0",
        Box::new(|s| engine::mixed_covariant_relation(&s.inv)),
    );
    add("(37)", "p = q = 0", Box::new(|s| vec![s.inv.pq.p, s.inv.pq.q]));
    add("(38)", "bⁱ₍ⱼₖₗ₎ = δⁱ₍ⱼbₖₗ₎", Box::new(|s| engine::transversal_geodesic_residual(&s.inv)));
    add("(39)", "bⁱ₍ⱼₖₗ₎ = 0", Box::new(|s| engine::symmetric_curvature(&s.inv)));
    add("(40)", "bⁱⱼ₍ₖₗ₎ = 0", Box::new(|s| engine::curvature_last_pair_symmetric(&s.inv)));
    add("(41)", "b = 0", Box::new(|s| engine::curvature_components(&s.inv)));
    add(
        "(42)",
        "pq(p − q) = 0; failing means p ≠ 0, q ≠ 0, p ≠ q generically",
        Box::new(|s| {
            let (p, q) = (s.inv.pq.p, s.inv.pq.q);
            vec![p * q * (p - q)]
        }),
    );
    add(
        "(43)",
        "q(qp⁽¹⁾ᵢ − pq⁽¹⁾ᵢ) − p(qp⁽²⁾ᵢ − pq⁽²⁾ᵢ) = pq(p − q)aᵢ",
        Box::new(|s| engine::extension_residual(&s.inv)),
    );
    add(
        "(47)",
        "dω₁ⁱ = Γⁱⱼₖ ω₁ʲ∧ω₂ᵏ",
        Box::new(|s| engine::structure_equation_residuals(&s.inv, &s.structure)),
    );
    add(
        "torsion",
        "aⁱⱼₖ = ½(aⱼδⁱₖ − aₖδⁱⱼ)",
        Box::new(|s| engine::torsion_reconstruction(&s.inv)),
    );

    add("a1=0", "a₁ = 0", Box::new(|s| vec![a(s)[0]]));
    add("a2=0", "a₂ = 0", Box::new(|s| vec![a(s)[1]]));
    add("a1=a2", "a₁ = a₂", Box::new(|s| vec![a(s)[0] - a(s)[1]]));
    add("a1=-a2", "a₁ = −a₂", Box::new(|s| vec![a(s)[0] + a(s)[1]]));
    add("p=0", "p = 0", Box::new(|s| vec![s.inv.pq.p]));
    add("q=0", "q = 0", Box::new(|s| vec![s.inv.pq.q]));
    add("p=q", "p = q", Box::new(|s| vec![s.inv.pq.p - s.inv.pq.q]));
    for (name, which) in [("p", 0usize), ("q", 1)] {
        for i in 0..2 {
            for j in 0..2 {
                let id = format!("{name}_{}{}=0", i + 1, j + 1);
                add(
                    &id,
                    &format!("{name}{}{} = 0", i + 1, j + 1),
                    Box::new(move |s| vec![if which == 0 { p(s)[i][j] } else { q(s)[i][j] }]),
                );
            }
        }
    }

    add(
        "E11",
        "pᵢ₂ = qᵢ₁ = 0",
        Box::new(|s| vec![p(s)[0][1], p(s)[1][1], q(s)[0][0], q(s)[1][0]]),
    );
    add("E111", "p₂₁ = −q₁₂", Box::new(|s| vec![p(s)[1][0] + q(s)[0][1]]));
    add(
        "E12",
        "p₁₂ = p₂₁, q₁₁ = q₂₂, q₁₂ = −q₂₁",
        Box::new(|s| {
            let (p, q) = (p(s), q(s));
            vec![p[0][1] - p[1][0], q[0][0] - q[1][1], q[0][1] + q[1][0]]
        }),
    );
    add("E13", "p₁₁ = p₂₂ = 0", Box::new(|s| vec![p(s)[0][0], p(s)[1][1]]));
    add(
        "E131",
        "p₁₂ = q₁₂, p₂₁ = q₂₁",
        Box::new(|s| vec![p(s)[0][1] - q(s)[0][1], p(s)[1][0] - q(s)[1][0]]),
    );
    add(
        "E2",
        "p₂ᵢ = q₂ᵢ = 0",
        Box::new(|s| vec![p(s)[1][0], p(s)[1][1], q(s)[1][0], q(s)[1][1]]),
    );
    add("E21", "q₁₂ = 0", Box::new(|s| vec![q(s)[0][1]]));
    add("E22", "p₁ᵢ = 0", Box::new(|s| vec![p(s)[0][0], p(s)[0][1]]));
    add("E23", "p₁₂ = q₁₂", Box::new(|s| vec![p(s)[0][1] - q(s)[0][1]]));
    add(
        "E3",
        "p₁ᵢ = q₁ᵢ = 0",
        Box::new(|s| vec![p(s)[0][0], p(s)[0][1], q(s)[0][0], q(s)[0][1]]),
    );
    add("E31", "q₂ⱼ = 0", Box::new(|s| vec![q(s)[1][0], q(s)[1][1]]));
    add("E32", "p₂₁ = q₂₁", Box::new(|s| vec![p(s)[1][0] - q(s)[1][0]]));
    add("E321", "p₂₂ = 0", Box::new(|s| vec![p(s)[1][1]]));
    add("E33", "p₂₁ = −q₂₁", Box::new(|s| vec![p(s)[1][0] + q(s)[1][0]]));

    for i in 0..2 {
        add(
            &format!("b^{}=0", i + 1),
            &format!("b{}ⱼₖₗ = 0", i + 1),
            Box::new(move |s| s.inv.curvature.b[i].iter().flatten().flatten().copied().collect()),
        );
    }
    add(
        "b^i_jjj=0",
        "b¹₂₂₂ = b²₁₁₁ = 0",
        Box::new(|s| vec![s.inv.curvature.b[0][1][1][1], s.inv.curvature.b[1][0][0][0]]),
    );
    for n in 0..16 {
        let (i, j, kk, l) = (n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1);
        add(
            &format!("{}=0", b_name(i, j, kk, l)),
            &format!("{} = 0", b_name(i, j, kk, l)),
            Box::new(move |s| vec![s.inv.curvature.b[i][j][kk][l]]),
        );
    }
    r
}

pub fn b_name(i: usize, j: usize, k: usize, l: usize) -> String {
    format!("b^{}_{}{}{}", i + 1, j + 1, k + 1, l + 1)
}

pub fn registry() -> &'static [Identity] {
    static REG: OnceLock<Vec<Identity>> = OnceLock::new();
    REG.get_or_init(build)
}

pub fn lookup(id: &str) -> Option<&'static Identity> {
    registry().iter().find(|i| i.id == id)
}
