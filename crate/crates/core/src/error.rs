use thiserror::Error;

/// Errors produced while building problems or evaluating expectations and bounds.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("invalid likelihoods: {0}")]
    InvalidLikelihoods(String),

    #[error("density {index} integrates to {integral} over its support (tolerance {tolerance})")]
    DensityNotNormalized {
        index: usize,
        integral: f64,
        tolerance: f64,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("observation {0} is outside the problem's alphabet or support")]
    InvalidObservation(String),

    #[error(
        "expectation did not converge: partial value {value}, achieved tolerance {achieved_tol:e} after {evaluations} evaluations"
    )]
    NonConvergence {
        value: f64,
        achieved_tol: f64,
        evaluations: usize,
    },

    #[error("integrand returned NaN at x = {0}")]
    NanIntegrand(String),

    #[error("zeta function is negative ({value}) at x = {x}")]
    NegativeZeta { x: String, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sampler available for density {0}")]
    MissingSampler(usize),

    #[error("degenerate detection subproblem at phi = {phi}, h = {h}: both prior densities vanish")]
    DegeneratePoint { phi: f64, h: f64 },

    #[error("probability-of-error provider failed at phi = {phi}, h = {h}: {message}")]
    ProviderFailure { phi: f64, h: f64, message: String },

    #[error("hypergeometric argument outside the supported domain: {0}")]
    Hyp2f1Domain(String),

    #[error("hypergeometric series did not converge within {0} terms")]
    SeriesNonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
