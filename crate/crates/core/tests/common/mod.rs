#![allow(dead_code)]

use errbound::{DiscreteProblem, ExpectationConfig, HypothesisProblem, Method, PriorVector};
use proptest::prelude::*;

pub fn exact() -> ExpectationConfig {
    ExpectationConfig {
        method: Method::ExactDiscrete,
        ..ExpectationConfig::default()
    }
}

fn normalise(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// A positive weight, or occasionally an exact zero.
fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![9 => 1e-3f64..1.0, 1 => Just(0.0)]
}

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(weight(), k)
        .prop_filter("needs positive mass", |w| w.iter().any(|&v| v > 0.0))
        .prop_map(normalise)
}

pub fn build(priors: Vec<f64>, columns: Vec<Vec<f64>>) -> HypothesisProblem {
    DiscreteProblem::from_columns(PriorVector::new(priors).unwrap(), columns)
        .unwrap()
        .into()
}

/// Discrete problem with `M` hypotheses and `N` symbols in the given ranges.
pub fn discrete(m: std::ops::RangeInclusive<usize>, n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = HypothesisProblem> {
    (m, n).prop_flat_map(|(m, n)| {
        (simplex(m), prop::collection::vec(simplex(n), m)).prop_map(|(priors, cols)| build(priors, cols))
    })
}

/// Same, with every prior and likelihood strictly positive.
pub fn positive_discrete(m: std::ops::RangeInclusive<usize>, n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = HypothesisProblem> {
    (m, n).prop_flat_map(|(m, n)| {
        let pos = move |k: usize| prop::collection::vec(1e-2f64..1.0, k).prop_map(normalise);
        (pos(m), prop::collection::vec(pos(n), m)).prop_map(|(priors, cols)| build(priors, cols))
    })
}

/// Binary problem whose posterior is `(π, 1-π)` at every symbol.
pub fn flat_binary(pi: f64) -> HypothesisProblem {
    build(vec![pi, 1.0 - pi], vec![vec![0.3, 0.7], vec![0.3, 0.7]])
}

pub fn uniform_posteriors(m: usize) -> HypothesisProblem {
    build(vec![1.0 / m as f64; m], vec![vec![0.2, 0.5, 0.3]; m])
}
