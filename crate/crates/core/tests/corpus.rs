use num::BigRational;
use webclass::classify::{full_report, ClassLabel, Config};
use webclass::corpus::{
    self, entry_from_source, instantiate_polynomial, load_all, load_example, run_regression, CorpusError,
    PolynomialWebParams, TensorPath, REGRESSION_TOL,
};
use webclass::expr::Point;

fn r(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[test]
fn verified_tensors_agree_with_the_engine() {
    for e in load_all().unwrap() {
        for d in run_regression(&e, 20).unwrap() {
            if d.verified {
                assert!(
                    d.max_deviation <= REGRESSION_TOL,
                    "{} {}: {:e} at {}",
                    e.id,
                    d.path,
                    d.max_deviation,
                    d.worst_point
                );
            }
        }
    }
}

#[test]
fn every_numbered_example_carries_tensors_and_classes() {
    for id in 1..=18 {
        let e = load_example(&id.to_string()).unwrap();
        assert!(!e.expected_tensors.is_empty(), "{id}");
        assert!(!e.expected_classes.is_empty(), "{id}");
    }
}

#[test]
fn example_7_p_and_q_are_flagged_and_the_correction_holds() {
    let e = load_example("7").unwrap();
    for path in [TensorPath::P, TensorPath::Q] {
        let t = e.expected_tensors.iter().find(|t| t.path == path).unwrap();
        assert!(!t.verified);
        assert!(t.erratum.as_deref().unwrap().contains("-p_21/2"));
    }
    let c = e.web.compiled();
    for pt in [Point::new(1.0, 0.5, 2.0, -1.0), Point::new(-1.5, 2.0, 0.7, 1.3)] {
        let inv = c.eval(&pt).unwrap();
        let half = -inv.pq.p_ij[1][0] / 2.0;
        assert!((inv.pq.p - half).abs() < 1e-12 * half.abs().max(1.0));
        assert!((inv.pq.q - half).abs() < 1e-12 * half.abs().max(1.0));
    }
}

#[test]
fn example_14_carries_an_erratum_note() {
    let e = load_example("14").unwrap();
    assert!(e.errata_notes.contains("erratum"));
    assert!(e.expected_classes.contains(&ClassLabel::C));
    let rep = full_report(&e.web, &Config::default()).unwrap();
    assert!(rep.classes.contains(&ClassLabel::C));
    assert!(!rep.classes.contains(&ClassLabel::D));
}

#[test]
fn group_web_loads_and_expects_isoclinic_geodesic() {
    let e = load_example("group").unwrap();
    assert!(e.expected_classes.contains(&ClassLabel::ISOCLINICLY_GEODESIC));
    assert_eq!(corpus::ids().len(), 19);
}

#[test]
fn unknown_ids_are_rejected() {
    for id in ["0", "19", "ex", ""] {
        assert!(matches!(load_example(id), Err(CorpusError::UnknownExample(_))), "{id}");
    }
    assert_eq!(load_example("example-16").unwrap().id, load_example("16").unwrap().id);
}

#[test]
fn source_round_trips_through_the_parser() {
    for id in corpus::ids() {
        let e = load_example(id).unwrap();
        let again = entry_from_source(id, &e.source).unwrap();
        assert_eq!(again.expected_classes, e.expected_classes);
        assert_eq!(again.expected_tensors.len(), e.expected_tensors.len());
    }
}

#[test]
fn zero_polynomial_is_the_group_web() {
    let e = instantiate_polynomial(&PolynomialWebParams::zero());
    assert!(e.web.domain().is_empty());
    let rep = full_report(&e.web, &Config::default()).unwrap();
    assert!(e.classes_match(&rep.classes), "{:?}", rep.classes);
}

#[test]
fn nonisoclinic_polynomial_lands_in_g3() {
    let params = PolynomialWebParams::zero().with(1, 1, 1, r(1)).with(1, 1, 2, r(1));
    assert_ne!(params.nonisoclinic_criterion(), r(0));
    let e = instantiate_polynomial(&params);
    assert_eq!(e.expected_classes, vec![ClassLabel::G3]);
    let rep = full_report(&e.web, &Config::default()).unwrap();
    assert!(e.classes_match(&rep.classes), "{:?}", rep.classes);
}

#[test]
fn rendered_polynomial_source_parses() {
    let params = PolynomialWebParams::zero().with(1, 2, 1, r(3)).with(2, 1, 1, r(-2));
    let e = instantiate_polynomial(&params);
    let again = entry_from_source("poly", &e.source).unwrap();
    let pt = Point::new(0.3, -0.2, 0.1, 0.4);
    let (a, b) = (
        e.web.compiled().eval(&pt).unwrap(),
        again.web.compiled().eval(&pt).unwrap(),
    );
    assert_eq!(a.torsion.a, b.torsion.a);
}

#[test]
fn regression_rejects_too_few_samples() {
    let e = load_example("1").unwrap();
    assert!(run_regression(&e, 2).is_err());
}
