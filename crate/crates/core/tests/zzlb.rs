use approx::assert_abs_diff_eq;
use errbound::zzlb::{detection_subproblem, zzlb_profile, ConditionalModel};
use errbound::{
    builtin, c_bound, valley_fill, zzlb, Density, Error, EstimationProblem, ExpectationConfig,
    Interval, PExponent, PminProvider, TermClass, ZzlbGrid,
};
use proptest::prelude::*;
use std::sync::Arc;

fn model() -> EstimationProblem {
    builtin::linear_gaussian(1.0, 1.0).unwrap()
}

fn coarse(est: &EstimationProblem) -> ZzlbGrid {
    ZzlbGrid::uniform(est, 0.25, 0.25).unwrap()
}

#[test]
fn subproblem_priors() {
    let est = model();
    let sub = detection_subproblem(&est, 0.0, 1.0).unwrap();
    assert_abs_diff_eq!(sub.priors().as_slice()[0], 1.0 / (1.0 + (-0.5f64).exp()), epsilon = 1e-14);
    let sym = detection_subproblem(&est, -0.5, 1.0).unwrap();
    assert_abs_diff_eq!(sym.priors().as_slice()[0], 0.5, epsilon = 1e-14);

    let tri = EstimationProblem::new(
        Density::custom(|x| if (0.0..=1.0).contains(&x) { 2.0 * (1.0 - x) } else { 0.0 }, Interval::new(0.0, 1.0).unwrap()),
        ConditionalModel::Additive(Density::gaussian(0.0, 1.0).unwrap()),
    )
    .unwrap();
    // f(0.25) = 1.5 = 2 f(0.625)
    let sub = detection_subproblem(&tri, 0.25, 0.375).unwrap();
    assert_abs_diff_eq!(sub.priors().as_slice()[0], 2.0 / 3.0, epsilon = 1e-14);
    assert!(matches!(detection_subproblem(&tri, 2.0, 1.0), Err(Error::DegeneratePoint { .. })));
}

#[test]
fn valley_fill_examples() {
    let pts = |v: &[f64]| v.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect::<Vec<_>>();
    let out: Vec<f64> = valley_fill(&pts(&[1.0, 0.5, 0.8, 0.3])).into_iter().map(|p| p.1).collect();
    assert_eq!(out, vec![1.0, 0.8, 0.8, 0.3]);
    assert!(valley_fill(&[]).is_empty());
    let flat = pts(&[0.4; 5]);
    assert_eq!(valley_fill(&flat), flat);
}

#[test]
fn grid_validation() {
    let w = Interval::new(-1.0, 1.0).unwrap();
    assert!(ZzlbGrid::new(vec![0.5, 0.25], w, 0.1).is_err());
    assert!(ZzlbGrid::new(vec![0.25, 0.5], w, 0.0).is_err());
    assert!(ZzlbGrid::new(vec![0.25, 0.5], w, 0.1).is_ok());
}

#[test]
fn trivial_provider_gives_zero() {
    let est = model();
    let zero = PminProvider::Custom(Arc::new(|_, _| Ok(0.0)));
    assert_eq!(zzlb(&est, &zero, &coarse(&est), &ExpectationConfig::default()).unwrap().value, 0.0);
}

#[test]
fn provider_failure_names_the_point() {
    let est = model();
    let bad = PminProvider::Custom(Arc::new(|_, _| Err(Error::Unsupported("nope".into()))));
    let r = zzlb(&est, &bad, &coarse(&est), &ExpectationConfig::default());
    assert!(matches!(r, Err(Error::ProviderFailure { .. })), "{r:?}");
}

#[test]
fn orderings_on_linear_gaussian() {
    let est = model();
    let grid = coarse(&est);
    let cfg = ExpectationConfig::default();
    let map = zzlb_profile(&est, &PminProvider::ExactMap, &grid, &cfg).unwrap();
    assert!(map.bound.value <= 0.5 + 1e-3, "{}", map.bound.value);
    assert!(map.filled.windows(2).all(|w| w[1] <= w[0]));
    assert!(map.filled.iter().zip(&map.inner).all(|(f, i)| f >= i));
    let p = |v| PExponent::new(v).unwrap();
    let c2: Vec<f64> = [1.1, 1.5, 2.0]
        .iter()
        .map(|&v| c_bound(&est, p(v), TermClass::Second, &grid, &cfg).unwrap().value)
        .collect();
    assert!(c2.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{c2:?}");
    assert!(c2[0] <= map.bound.value + 1e-12);
    let c1 = c_bound(&est, p(2.0), TermClass::First, &grid, &cfg).unwrap().value;
    assert!(c1 <= map.bound.value + 1e-12);
}

proptest! {
    #[test]
    fn valley_fill_properties(values in prop::collection::vec(-5.0f64..5.0, 0..40)) {
        let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (i as f64 * 0.1, v)).collect();
        let out = valley_fill(&pts);
        prop_assert_eq!(out.len(), pts.len());
        prop_assert!(out.windows(2).all(|w| w[1].1 <= w[0].1));
        prop_assert!(out.iter().zip(&pts).all(|(o, i)| o.1 >= i.1 && o.0 == i.0));
        prop_assert_eq!(valley_fill(&out), out);
    }
}
