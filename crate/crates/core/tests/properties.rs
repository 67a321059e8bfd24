use lojax_core::algebra::{parse_poly, vars, Binding, Complex64, GaussRat, Monomial, Order, Polynomial, Vars};
use lojax_core::basis::{groebner, normal_form, quotient_dimension, s_polynomial, Dim, MonomialOrder};
use lojax_core::charpoly::charpoly_exact;
use lojax_core::exponent::{empirical_verify, gradient_exponent, ShellConfig, Verdict};
use lojax_core::milnor::Germ;
use num_rational::BigRational;
use proptest::prelude::*;

fn xy() -> Vars {
    vars(&["x", "y"])
}

fn poly_from(terms: &[(u32, u32, i64)]) -> Polynomial {
    Polynomial::from_terms(xy(), terms.iter().map(|&(a, b, c)| (Monomial::new(vec![a, b]), GaussRat::from_int(c))))
}

fn small_poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((0u32..4, 0u32..4, -3i64..=3), 0..6).prop_map(|t| poly_from(&t))
}

fn complex_point() -> impl Strategy<Value = (i64, i64, i64, i64)> {
    (-4i64..=4, -4i64..=4, -4i64..=4, -4i64..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(p in small_poly(), q in small_poly(), r in small_poly()) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn order_and_initial_form_are_multiplicative(p in small_poly(), q in small_poly()) {
        prop_assume!(!p.is_zero() && !q.is_zero());
        let pq = &p * &q;
        match (p.ord_zero(), q.ord_zero(), pq.ord_zero()) {
            (Order::Finite(a), Order::Finite(b), Order::Finite(c)) => prop_assert_eq!(a + b, c),
            other => prop_assert!(false, "unexpected orders {:?}", other),
        }
        prop_assert_eq!(pq.initial_form().unwrap(), &p.initial_form().unwrap() * &q.initial_form().unwrap());
    }

    #[test]
    fn derivative_commutes_with_substitution(p in small_poly(), n in -5i64..=5, d in 1i64..=4) {
        let c = GaussRat::from_frac(n, d);
        let sub = |q: &Polynomial| q.substitute(&[("y", Binding::Scalar(c.clone()))]).unwrap();
        prop_assert_eq!(sub(&p).derivative(0), sub(&p.derivative(0)));
    }

    #[test]
    fn float_evaluation_matches_exact(p in small_poly(), (a, b, c, d) in complex_point()) {
        let q = |n: i64| BigRational::new(n.into(), 4.into());
        let pt = [GaussRat::new(q(a), q(b)), GaussRat::new(q(c), q(d))];
        let exact = p.eval_exact(&pt).unwrap().to_complex();
        let z: Vec<Complex64> = pt.iter().map(GaussRat::to_complex).collect();
        let approx = p.evaluate(&z).unwrap();
        prop_assert!((exact - approx).norm() <= 1e-12 * (1.0 + p.max_abs_coeff() * 64.0));
    }

    #[test]
    fn milnor_number_is_invariant_under_linear_change(a in 2u32..=5, b in 2u32..=5, m in -3i64..=3) {
        // (x, y) ↦ (x + m·y, y) has determinant 1
        let f = Germ::parse(&format!("x^{a} + y^{b}"), &["x", "y"]).unwrap();
        let ctx = f.vars().clone();
        let images = [parse_poly(&format!("x + {m}*y"), &ctx).unwrap(), parse_poly("y", &ctx).unwrap()];
        let g = Germ::new(f.f().compose(&images)).unwrap();
        prop_assert_eq!(g.milnor_number().unwrap(), ((a - 1) * (b - 1)) as usize);
    }

    #[test]
    fn groebner_s_pairs_reduce_to_zero(p in small_poly(), q in small_poly()) {
        prop_assume!(!p.is_zero() && !q.is_zero());
        let order = MonomialOrder::DegRevLex;
        let gb = groebner(&[p.clone(), q.clone()], &order).unwrap();
        let gens = gb.generators();
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                let s = s_polynomial(&gens[i], &gens[j], &order);
                prop_assert!(normal_form(&s, &gb).unwrap().is_zero());
            }
        }
        prop_assert!(normal_form(&p, &gb).unwrap().is_zero());
        prop_assert!(normal_form(&q, &gb).unwrap().is_zero());
    }
}

#[test]
fn brieskorn_milnor_numbers() {
    for a in 2..=6u32 {
        for b in 2..=6u32 {
            let f = Germ::parse(&format!("x^{a} + y^{b}"), &["x", "y"]).unwrap();
            assert_eq!(f.milnor_number().unwrap(), ((a - 1) * (b - 1)) as usize, "x^{a}+y^{b}");
        }
    }
    let f = Germ::parse("x^2 + y^3 + z^4", &["x", "y", "z"]).unwrap();
    assert_eq!(f.milnor_number().unwrap(), 6);
}

#[test]
fn global_and_local_dimensions_agree_for_homogeneous_germs() {
    for text in ["x^3 + y^3", "x^2*y + y^4 + x^4", "x^4 + x*y^3 + y^4", "x^3 - 3*x*y^2"] {
        let f = Germ::parse(text, &["x", "y"]).unwrap();
        let global = quotient_dimension(&groebner(&f.gradient(), &MonomialOrder::DegRevLex).unwrap());
        let local = f.milnor_number().unwrap();
        if f.f().is_homogeneous() {
            assert_eq!(global, Dim::Finite(local), "{text}");
        } else {
            assert!(matches!(global, Dim::Finite(d) if d >= local), "{text}");
        }
    }
}

/// Raising θ above the certified value weakens the inequality while
/// `|f| < 1`, so no shell trend may appear.
#[test]
fn larger_exponents_are_never_divergent() {
    let shells = ShellConfig { points: 200, ..ShellConfig::default() };
    for (text, names) in [("z^3", vec!["z"]), ("x^2 + y^3", vec!["x", "y"]), ("x^3 + y^4", vec!["x", "y"])] {
        let f = Germ::parse(text, &names).unwrap();
        let p = charpoly_exact(&f, &f.gradient()).unwrap();
        let theta = gradient_exponent(&f, &p).unwrap().theta_f64();
        for k in 1..=4 {
            let th = theta + (1.0 - theta) * k as f64 / 5.0;
            let r = empirical_verify(&f, th, &shells).unwrap();
            assert!(r.f_below_one);
            assert_ne!(r.verdict, Verdict::Divergent, "{text} at θ = {th}");
        }
    }
}

#[test]
fn exponent_below_certificate_is_caught() {
    let f = Germ::parse("z^3", &["z"]).unwrap();
    let r = empirical_verify(&f, 0.4, &ShellConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Divergent);
}
