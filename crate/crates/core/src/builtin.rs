//! Ready-made problems: a binary exponential test, a ternary test with
//! trigonometric-Laplace densities, and a linear-Gaussian estimation model.

use crate::density::{Density, Trig};
use crate::error::Result;
use crate::model::{ContinuousProblem, PriorVector};
use crate::zzlb::{ConditionalModel, EstimationProblem};

/// Rate of the first hypothesis in [`exponential`].
pub const EXPONENTIAL_RATE_1: f64 = 0.5;

/// Equal-prior binary test between `Exp(0.5)` and `Exp(rate2)`.
pub fn exponential(rate2: f64) -> Result<ContinuousProblem> {
    ContinuousProblem::new(
        PriorVector::uniform(2)?,
        vec![Density::exponential(EXPONENTIAL_RATE_1)?, Density::exponential(rate2)?],
    )
}

/// Ternary test with densities `(2/3)cos²(x/2)e^{-|x|}`, `2 sin²(x/2)e^{-|x|}`,
/// `(5/4)sin²(x)e^{-|x|}` and priors `(15, 5, 8)/28`.
pub fn ternary() -> Result<ContinuousProblem> {
    ContinuousProblem::new(
        PriorVector::new(vec![15.0 / 28.0, 5.0 / 28.0, 8.0 / 28.0])?,
        vec![
            Density::trig_exp(Trig::Cos, 0.5, None)?,
            Density::trig_exp(Trig::Sin, 0.5, None)?,
            Density::trig_exp(Trig::Sin, 1.0, None)?,
        ],
    )
}

/// `x = φ + n` with `φ ~ N(0, σ_φ²)` and `n ~ N(0, σ_n²)`.
pub fn linear_gaussian(prior_std: f64, noise_std: f64) -> Result<EstimationProblem> {
    EstimationProblem::new(
        Density::gaussian(0.0, prior_std)?,
        ConditionalModel::Additive(Density::gaussian(0.0, noise_std)?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::trig_exp_normalizer;

    #[test]
    fn ternary_scales() {
        assert!((trig_exp_normalizer(Trig::Cos, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((trig_exp_normalizer(Trig::Sin, 0.5) - 2.0).abs() < 1e-15);
        assert!((trig_exp_normalizer(Trig::Sin, 1.0) - 1.25).abs() < 1e-15);
        assert!(ternary().is_ok());
    }

    #[test]
    fn exponential_rejects_bad_rate() {
        assert!(exponential(0.0).is_err());
        assert!(exponential(1.0).is_ok());
    }
}
