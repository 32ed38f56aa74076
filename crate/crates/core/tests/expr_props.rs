use proptest::prelude::*;
use webclass::expr::{parse_expression, Differentiator, Expr, Point, Var};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::ratio(n, d)),
        prop::sample::select(Var::ALL.to_vec()).prop_map(Expr::var),
    ]
}

/// Expressions that stay finite on [-1, 1]⁴: denominators are kept away
/// from zero and exponents small.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::int(3) + Expr::pow(b, 2))),
            (inner.clone(), 0i32..=3).prop_map(|(a, k)| Expr::pow(a, k)),
            inner
                .clone()
                .prop_map(|a| Expr::exp(&a / &(Expr::int(1) + Expr::pow(a.clone(), 2)))),
            inner.prop_map(|a| -a),
        ]
    })
}

fn point() -> impl Strategy<Value = Point> {
    prop::array::uniform4(-1.0f64..1.0).prop_map(Point::from_coords)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Fourth-order central difference.
fn fd(e: &Expr, pt: &Point, v: Var) -> f64 {
    let at = |t: f64| {
        let mut c = pt.coords();
        c[v.index()] += t;
        e.eval(&Point::from_coords(c)).unwrap()
    };
    let h = 1e-3;
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_finite_difference(e in expr(), pt in point(), v in prop::sample::select(Var::ALL.to_vec())) {
        let d = Differentiator::new().d(&e, v);
        let (got, want) = (d.eval(&pt).unwrap(), fd(&e, &pt, v));
        prop_assert!(close(got, want, 1e-5), "d/d{v} of {e}: {got} vs {want}");
    }

    #[test]
    fn mixed_partials_commute(e in expr(), pt in point()) {
        let mut dz = Differentiator::new();
        let xy = dz.partial(&e, &[Var::X1, Var::Y2]);
        let yx = dz.partial(&e, &[Var::Y2, Var::X1]);
        prop_assert!(close(xy.eval(&pt).unwrap(), yx.eval(&pt).unwrap(), 1e-9));
    }

    #[test]
    fn simplify_preserves_value(e in expr(), pt in point()) {
        prop_assert!(close(e.simplify().eval(&pt).unwrap(), e.eval(&pt).unwrap(), 1e-9));
    }

    #[test]
    fn display_parses_back(e in expr(), pt in point()) {
        let back = parse_expression(&e.to_string()).unwrap();
        prop_assert!(close(back.eval(&pt).unwrap(), e.eval(&pt).unwrap(), 1e-9), "{e}");
    }

    #[test]
    fn parser_never_panics(s in "[-+*/^()xy12. e]{0,24}") {
        let _ = parse_expression(&s);
    }
}
