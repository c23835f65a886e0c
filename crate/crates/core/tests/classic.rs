mod common;

use approx::assert_abs_diff_eq;
use errbound::{
    builtin, compare_all, evaluate_classic, map_error, ClassicBound, Error, ExpectationConfig,
    HypothesisProblem,
};
use proptest::prelude::*;

use common::{build, discrete, exact, uniform_posteriors};

fn eval(q: &HypothesisProblem, c: ClassicBound) -> f64 {
    evaluate_classic(q, c, &exact()).unwrap().value
}

/// Catalog plus a spread of parameter values.
fn all_specs() -> Vec<ClassicBound> {
    use ClassicBound::*;
    let mut v = ClassicBound::catalog();
    v.extend([
        FDiv { l: 2.5 },
        JAlpha { alpha: 3.0 },
        Atlb { alpha: 1.0 },
        Atlb { alpha: 25.0 },
        Gmd1 { alpha: 2.0, beta: 3.0 },
        Gmd1 { alpha: 0.5, beta: 4.0 },
        Gmd2 { alpha: 0.25, beta: 3.0 },
    ]);
    v
}

#[test]
fn uniform_binary_values() {
    let u = uniform_posteriors(2);
    assert_abs_diff_eq!(eval(&u, ClassicBound::Blb2), 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(eval(&u, ClassicBound::Harmonic), 0.25, epsilon = 1e-14);
    let rows = compare_all(&u, &ClassicBound::catalog(), &[2.0], &exact());
    for r in rows.iter().filter(|r| r.name != "map") {
        if let Some(v) = r.value() {
            assert!(v <= 0.5 + 1e-12, "{} {} = {v}", r.name, r.params);
        }
    }
}

#[test]
fn uniform_ternary_values() {
    let u = uniform_posteriors(3);
    assert_abs_diff_eq!(eval(&u, ClassicBound::Bayes2), 1.0 - 3f64.sqrt().recip(), epsilon = 1e-14);
    // (M-1)/M^{M-1} · (Π (1/M)^{1/M})^M = (M-1)/M^{2M-1}.
    assert_abs_diff_eq!(eval(&u, ClassicBound::Matusita), 2.0 / 243.0, epsilon = 1e-15);
}

#[test]
fn binary_only_bounds_reject_ternary() {
    let u = uniform_posteriors(3);
    for c in ClassicBound::catalog().into_iter().filter(ClassicBound::binary_only) {
        let r = evaluate_classic(&u, c, &exact());
        assert!(matches!(r, Err(Error::Unsupported(ref m)) if m.contains(c.name())), "{c}: {r:?}");
    }
}

#[test]
fn parameter_ranges() {
    use ClassicBound::*;
    for c in [FDiv { l: 0.5 }, Atlb { alpha: 0.0 }, Gmd1 { alpha: 0.2, beta: 2.0 }, Gmd2 { alpha: 1.0, beta: 2.0 }, Gmd1 { alpha: 1.0, beta: 1.0 }] {
        assert!(matches!(c.check_params(), Err(Error::InvalidParameter { .. })), "{c}");
    }
}

#[test]
fn divergence_with_disjoint_support_is_zero() {
    let q = build(vec![0.5, 0.5], vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]]);
    let e = evaluate_classic(&q, ClassicBound::Divergence, &exact()).unwrap();
    assert_eq!(e.value, 0.0);
    assert!(e.degenerate);
}

#[test]
fn exponential_table_below_map() {
    let q: HypothesisProblem = builtin::exponential(1.0).unwrap().into();
    let rows = compare_all(&q, &ClassicBound::catalog(), &[1.5, 2.0], &ExpectationConfig::default());
    let map = rows.iter().find(|r| r.name == "map").unwrap();
    assert_abs_diff_eq!(map.value().unwrap(), 0.375, epsilon = 1e-9);
    let values: Vec<f64> = rows.iter().filter_map(|r| r.value()).collect();
    // JAlpha at α = 1 is the MAP error itself.
    assert!(values.iter().all(|&v| v <= 0.375 + 1e-9), "{values:?}");
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn ternary_table_contains_b1() {
    let q: HypothesisProblem = builtin::ternary().unwrap().into();
    let rows = compare_all(&q, &[ClassicBound::Bayes3, ClassicBound::Quad], &[2.0], &ExpectationConfig::default());
    let b1 = rows.iter().find(|r| r.name == "b1").unwrap();
    assert!((b1.value().unwrap() - 0.2286).abs() < 5e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn classic_bounds_are_sound(q in discrete(2..=5, 2..=20)) {
        let pe = map_error(&q, &exact()).unwrap().value;
        for c in all_specs().into_iter().filter(|c| c.applicable(&q)) {
            let v = eval(&q, c);
            prop_assert!(v <= pe + 1e-10, "{c} = {v} > {pe}");
        }
    }

    #[test]
    fn bayes_chain(q in discrete(2..=5, 2..=20)) {
        let quad = eval(&q, ClassicBound::Quad);
        let b2 = eval(&q, ClassicBound::Bayes2);
        let b1 = eval(&q, ClassicBound::Bayes1);
        prop_assert!(quad <= b2 + 1e-12 && b2 <= b1 + 1e-12, "{quad} {b2} {b1}");
    }

    #[test]
    fn gmd1_reduces_to_bayes2(q in discrete(2..=5, 2..=20)) {
        let g = eval(&q, ClassicBound::Gmd1 { alpha: 1.0, beta: 2.0 });
        prop_assert!((g - eval(&q, ClassicBound::Bayes2)).abs() < 1e-12);
    }

    #[test]
    fn binary_identities(q in discrete(2..=2, 2..=20)) {
        let ja = eval(&q, ClassicBound::JAlpha { alpha: 2.0 });
        prop_assert!((eval(&q, ClassicBound::Bayes1) - ja).abs() < 1e-12);
        let HypothesisProblem::Discrete(d) = &q else { unreachable!() };
        let mut e4 = 0.0;
        for row in d.likelihoods() {
            let pr = d.priors().as_slice();
            let (a, b) = (pr[0] * row[0], pr[1] * row[1]);
            if a + b > 0.0 {
                e4 += 4.0 * a * b / (a + b);
            }
        }
        let fdiv = eval(&q, ClassicBound::FDiv { l: 1.0 });
        prop_assert!((fdiv - (0.5 - 0.5 * (1.0 - e4).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn atlb_tightens_with_alpha(q in discrete(2..=2, 2..=20)) {
        let v: Vec<f64> = [1.0, 5.0, 25.0].iter().map(|&a| eval(&q, ClassicBound::Atlb { alpha: a })).collect();
        prop_assert!(v[0] <= v[1] + 1e-9 && v[1] <= v[2] + 1e-9, "{v:?}");
    }
}
