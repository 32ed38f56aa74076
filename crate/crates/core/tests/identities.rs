mod common;

use webclass::classify::{Config, Evidence, Status};
use webclass::corpus::{load_all, load_example, CorpusEntry};

const TOL: f64 = 1e-8;

fn evidence(e: &CorpusEntry) -> Evidence {
    Evidence::gather(&e.web, &Config::default()).unwrap()
}

fn holds_everywhere(id: &str) {
    for e in load_all().unwrap() {
        let worst = evidence(&e).residuals(id).unwrap().into_iter().fold(0.0, f64::max);
        assert!(worst < TOL, "{id} on {}: {worst:e}", e.id);
    }
}

#[test]
fn curvature_against_p() {
    holds_everywhere("(33)a");
}

#[test]
fn curvature_against_q() {
    holds_everywhere("(33)b");
}

#[test]
fn first_covariant_derivative_of_p() {
    holds_everywhere("(35)a");
}

#[test]
fn second_covariant_derivative_of_q() {
    holds_everywhere("(35)b");
}

#[test]
fn mixed_covariant_derivatives() {
    holds_everywhere("(35)c-corrected");
}

#[test]
fn third_foliation_differential() {
    holds_everywhere("(29)");
}

#[test]
fn first_structure_equation() {
    holds_everywhere("(47)");
}

#[test]
fn torsion_is_determined_by_a() {
    holds_everywhere("torsion");
}

#[test]
fn uncorrected_mixed_identity_fails_somewhere() {
    let failing = load_all()
        .unwrap()
        .iter()
        .filter(|e| evidence(e).verdicts["(35)c"].status == Status::Fails)
        .count();
    assert!(failing > 0);
}

#[test]
fn example_11_p21_against_q12() {
    let e = load_example("11").unwrap();
    let ev = evidence(&e);
    assert_eq!(ev.verdicts["E111"].status, Status::Holds);
    for s in &ev.evals {
        let (p, q) = (s.inv.pq.p_ij, s.inv.pq.q_ij);
        assert!((p[1][0] + q[0][1]).normalized() < TOL);
    }
}

#[test]
fn example_11_sum_forms_are_closed() {
    // coefficients of ω₁ⁱ + ω₂ⁱ in (dx¹, dx², dy¹, dy²), taken from the engine
    let e = load_example("11").unwrap();
    let c = e.web.compiled();
    let coeffs = |z: [f64; 4]| -> Vec<f64> {
        let j = c.jacobians(&webclass::expr::Point::from_coords(z)).unwrap();
        (0..2)
            .flat_map(|i| [j.f_bar[i][0], j.f_bar[i][1], j.f_tilde[i][0], j.f_tilde[i][1]])
            .collect()
    };
    for pt in common::interior_points(&e.web, 10, 11, 2.0) {
        let x = pt.coords();
        let d: Vec<Vec<f64>> = (0..4).map(|a| common::derivative(&coeffs, x, a, 1e-2)).collect();
        for i in 0..2 {
            for a in 0..4 {
                for b in 0..a {
                    let r = d[a][4 * i + b] - d[b][4 * i + a];
                    assert!(r.abs() < TOL, "d(ω₁{i} + ω₂{i}) at {pt}: {r:e}");
                }
            }
        }
    }
}

#[test]
fn nonisoclinic_examples_violate_the_extension_identity() {
    for id in ["16", "17"] {
        let ev = evidence(&load_example(id).unwrap());
        assert_eq!(ev.verdicts["(43)"].status, Status::Fails, "{id}");
    }
    let ev = evidence(&load_example("1").unwrap());
    assert_eq!(ev.verdicts["(43)"].status, Status::Holds);
}
