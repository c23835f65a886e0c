//! Exact MAP error probabilities and lower/upper bounds on the minimum error
//! probability of M-ary Bayesian hypothesis tests, plus Ziv-Zakai bounds on
//! the mean-square error of scalar Bayesian estimators.

pub mod bounds;
pub mod builtin;
pub mod classic;
pub mod curve;
pub mod density;
pub mod error;
pub mod expectation;
pub mod holder;
pub mod model;
pub mod numerics;
pub mod quadrature;
pub mod special;
pub mod zzlb;

pub use bounds::BoundSpec;
pub use classic::{compare_all, evaluate_classic, ClassicBound, ComparisonRow};
pub use curve::{format_sig, BoundCurve, CurvePoint};
pub use density::{Density, Interval, Trig};
pub use error::{Error, Result};
pub use expectation::{expect, expect_given, sample_marginal, Estimate, ExpectationConfig, Method};
pub use holder::{HolderBound, PExponent, TermClass};
pub use model::{
    map_error, posterior, ContinuousProblem, DiscreteProblem, HypothesisProblem, Observation,
    PosteriorVector, PriorVector,
};
pub use special::hyp2f1;
pub use zzlb::{c_bound, valley_fill, zzlb, EstimationProblem, PminProvider, ZzlbGrid};
