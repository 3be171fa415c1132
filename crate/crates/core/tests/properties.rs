mod common;

use common::*;
use hysteresis::expr::{Env, Expr, Var};
use hysteresis::loopanal::geometry;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Expr::Const),
        prop::sample::select(vec![Var::T, Var::X1, Var::X2, Var::U, Var::Du]).prop_map(Expr::Var),
    ]
}

/// Smooth expressions: no abs, and division only by `1 + e^2`.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Add(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Sub(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Mul(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| {
                Expr::Div(b(l), b(Expr::Add(b(Expr::Const(1.0)), b(Expr::Pow(b(r), 2)))))
            }),
            (inner.clone(), 2u32..4).prop_map(move |(e, k)| Expr::Pow(b(e), k)),
            inner.clone().prop_map(move |e| Expr::Neg(b(e))),
            inner.clone().prop_map(move |e| Expr::Sin(b(e))),
            inner.clone().prop_map(move |e| Expr::Cos(b(e))),
            inner.prop_map(move |e| Expr::Exp(b(Expr::Sin(b(e))))),
        ]
    })
}

fn env() -> impl Strategy<Value = Env> {
    (0.0..3.0f64, -1.5..1.5f64, -1.5..1.5f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(t, x1, x2, u, du)| Env { t, x1, x2, u, du })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn symbolic_derivative_matches_finite_difference(e in smooth_expr(), env in env()) {
        for var in [Var::T, Var::X1, Var::X2, Var::U, Var::Du] {
            prop_assert!(derivative_agrees(&e, var, &env).is_ok(), "{:?}", derivative_agrees(&e, var, &env));
        }
    }

    #[test]
    fn simplify_preserves_value(e in smooth_expr(), env in env()) {
        let (a, b) = (e.eval(&env), e.simplify().eval(&env));
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn printed_expression_reparses(e in smooth_expr(), env in env()) {
        let back = hysteresis::expr::parse(&e.to_text()).unwrap();
        if let (Ok(a), Ok(b)) = (e.eval(&env), back.eval(&env)) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} -> {}", e.to_text(), back.to_text());
        }
    }

    #[test]
    fn polygon_area_invariances(seed in any::<u64>(), n in 3usize..40, sx in -100.0..100.0f64, sy in -100.0..100.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_polygon(&mut rng, n);
        prop_assert!(area_invariances(&pts, (sx, sy)).is_ok(), "{:?}", area_invariances(&pts, (sx, sy)));
    }

    #[test]
    fn polygon_scaling_is_quadratic(seed in any::<u64>(), n in 3usize..30, k in 0.1..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = random_polygon(&mut rng, n);
        let scaled: Vec<_> = pts.iter().map(|p| (k * p.0, k * p.1)).collect();
        let (a, b) = (geometry::geometric_area(&pts), geometry::geometric_area(&scaled));
        prop_assert!((b - k * k * a).abs() <= 1e-9 * (1.0 + b));
        prop_assert_eq!(geometry::crossings(&pts).len(), geometry::crossings(&scaled).len());
    }

    #[test]
    fn loop_distance_symmetric_with_zero_self_distance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_loop(&mut rng, 300), random_loop(&mut rng, 500));
        prop_assert!(distance_laws(&a, &b).is_ok(), "{:?}", distance_laws(&a, &b));
    }
}

#[test]
fn derivative_corpus_agrees() {
    assert!(derivative_corpus_check(40, 7).unwrap() > 1000);
}

#[test]
fn rk4_order_factor_in_range() {
    let f = rk4_order_factor();
    assert!((12.0..=20.0).contains(&f), "{f}");
}

#[test]
fn stability_alternates_on_random_polynomials() {
    alternation_check(20, 2024).unwrap();
}

#[test]
fn perturbation_agrees_with_classification() {
    let runs = perturbation_experiments(4);
    assert!(runs.len() > 20, "only {} experiments", runs.len());
    let bad: Vec<_> = runs.iter().filter(|r| !r.agrees()).collect();
    assert!(bad.is_empty(), "{bad:#?}");
}
